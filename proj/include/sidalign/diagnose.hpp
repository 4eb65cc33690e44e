#pragma once

#include <string>
#include <vector>

#include "sidalign/backend.hpp"
#include "sidalign/dataset.hpp"

namespace sidalign {

class SyntheticBackend;

struct DiagnosticsReport {
    double sdi = 0.0;
    double aei = 0.0;
    int n_general = 0;
    int n_sid = 0;
    std::string context_label;
};

// Space Dominance Index: mean attention mass per General token over mean mass
// per SemanticID token. Requires at least one token of each kind.
double sdi(const AttentionProfile& profile);

// Attention Efficiency Index: mean attention mass per General token, scaled
// by 100. Requires at least one General token.
double aei(const AttentionProfile& profile);

DiagnosticsReport diagnostics_from_profile(const AttentionProfile& profile,
                                           std::string context_label);

struct PcaResult {
    std::vector<std::vector<double>> components;   // k orthonormal d-vectors
    std::vector<std::vector<double>> projections;  // n points, k coordinates each
    std::vector<double> explained_variance_ratio;  // k values, non-increasing
};

// Top-k eigenvectors of the mean-centered covariance, deterministic sign
// (largest-magnitude entry positive). Ratios are eigenvalue shares of the
// total variance.
PcaResult pca_project(const std::vector<std::vector<double>>& vectors, int k);

// Instruction preamble prepended to diagnostic contexts so the think-off mode
// still carries General-subspace tokens and both indices stay defined.
const TokenSeq& diagnostic_instruction_tokens();

// Attention diagnostics for one episode under the thinking-mode prompt
// (raw CoT) and the no-thinking prompt, both with the instruction preamble.
std::pair<DiagnosticsReport, DiagnosticsReport> episode_diagnostics(const ScoringBackend& backend,
                                                                    const EpisodeRecord& episode,
                                                                    int levels,
                                                                    int codes_per_level);

// CSV with columns context_label,n_general,n_sid,sdi,aei; one think_off and
// one think_on row per episode, episode order.
std::string diagnostics_csv(const ScoringBackend& backend,
                            const std::vector<EpisodeRecord>& episodes, int levels,
                            int codes_per_level);

// CSV with columns token,tag,pc1,pc2 over the model vocabulary's SID and
// general token embeddings.
std::string projections_csv(const SyntheticBackend& backend);

}  // namespace sidalign
