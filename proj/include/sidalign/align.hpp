#pragma once

#include <functional>
#include <vector>

#include "sidalign/backend.hpp"
#include "sidalign/dataset.hpp"
#include "sidalign/vocab.hpp"

namespace sidalign {

// The three scoring contexts of the contrastive framework.
enum class ContextKind { Expert, Amateur, Baseline };

enum class CandidatePolicy { ExpertBeam, UnionExpertBaseline };

struct AlignConfig {
    double alpha = 0.5;     // correction strength, >= 0
    double epsilon = 1e-6;  // normalization stabilizer, > 0
    CandidatePolicy candidate_policy = CandidatePolicy::UnionExpertBaseline;
    int num_beams = 32;
    int num_return = 32;

    void validate() const;  // throws InvalidConfig
};

// One candidate with its raw scores under the three contexts, the normalized
// scores, the drift component and the final contrastive score.
struct ScoredCandidate {
    SemanticId sid;
    double z_e = 0.0, z_a = 0.0, z_b = 0.0;
    double zt_e = 0.0, zt_a = 0.0, zt_b = 0.0;
    double drift = 0.0;  // zt_a - zt_b
    double final_score = 0.0;
};

using CompressFn = std::function<std::string(const std::string&)>;

// Context layouts:
//   Baseline: <|hist_begin|> H <|hist_end|> <|sid_begin|>
//   Expert:   <|hist_begin|> H <|hist_end|> <|cot_begin|> c_hat <|cot_end|> <|sid_begin|>
//   Amateur:  <|hist_begin|> <|hist_empty|> <|hist_end|> <|cot_begin|> c <|cot_end|> <|sid_begin|>
// Expert and Baseline require non-empty history; Expert requires non-empty
// compressed tokens; Amateur substitutes the null history regardless of input.
TokenSeq build_context(ContextKind kind, const std::vector<SemanticId>& history,
                       const TokenSeq& cot_tokens, const TokenSeq& compressed, int levels,
                       int codes_per_level);

// History + raw CoT ahead of <|sid_begin|>: the plain thinking-mode prompt.
// Empty history renders the <|hist_empty|> placeholder; empty CoT degrades to
// the Baseline layout.
TokenSeq think_on_context(const std::vector<SemanticId>& history, const TokenSeq& cot_tokens,
                          int levels, int codes_per_level);

// (x - mean) / (population std + epsilon). Epsilon is floored at 1e-12.
std::vector<double> zscore_normalize(const std::vector<double>& scores, double epsilon);

// (1 + alpha) * zt_e - alpha * (zt_a - zt_b).
double contrastive_score(double zt_e, double zt_a, double zt_b, double alpha);

struct CpmiParts {
    double cpmi;   // history-grounded information gain
    double prior;  // CoT-only score, amateur context
    double total;  // thinking-mode score; equals cpmi + prior by construction
};

CpmiParts cpmi_decompose(const ScoringBackend& backend, const std::vector<SemanticId>& history,
                         const TokenSeq& cot_tokens, const SemanticId& y, int levels,
                         int codes_per_level);

// Candidate pool for one episode. An explicit episode candidate list wins;
// otherwise the configured policy runs beam search under the Expert context
// (and, for the union policy, also the Baseline context, appending unseen
// entries after the expert list).
std::vector<SemanticId> generate_candidates(const ScoringBackend& backend,
                                            const EpisodeRecord& episode, const AlignConfig& cfg,
                                            const TokenSeq& compressed, int levels,
                                            int codes_per_level);

// Scores one episode's candidate pool under all three contexts and fills the
// normalized scores and drift. final_score is left at 0; apply
// finalize_ranking for a concrete alpha.
std::vector<ScoredCandidate> score_candidate_pool(const ScoringBackend& backend,
                                                  const EpisodeRecord& episode,
                                                  const AlignConfig& cfg,
                                                  const CompressFn& compressor, int levels,
                                                  int codes_per_level);

// Applies the contrastive score at the given alpha and sorts by
// (final desc, SID lexicographic asc).
std::vector<ScoredCandidate> finalize_ranking(std::vector<ScoredCandidate> pool, double alpha);

// compress -> generate candidates -> three-context scoring -> per-context
// z-score -> contrastive score -> sort.
std::vector<ScoredCandidate> rerank(const ScoringBackend& backend, const EpisodeRecord& episode,
                                    const AlignConfig& cfg, const CompressFn& compressor,
                                    int levels, int codes_per_level);

}  // namespace sidalign
