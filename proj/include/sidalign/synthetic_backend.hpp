#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sidalign/backend.hpp"
#include "sidalign/vocab.hpp"

namespace sidalign {

// Knobs of the closed-form recommender used for oracle verification. Identical
// config means identical model.
struct SyntheticModelConfig {
    int levels = 3;             // L
    int codes_per_level = 8;    // C
    int k_clusters = 8;
    int n_general = 64;         // general vocabulary size, mentions + scaffold + filler
    double gamma = 0.6;         // drift strength in [0, 1]
    double zipf_s = 1.5;        // popularity exponent
    double lambda_sid = 1.0;    // SID weighting in the dilution ratio
    double kappa = 1.0;         // salience gain for general tokens
    double tau = 0.5;           // cluster sharpness temperature
    std::uint64_t seed = 0;

    std::string to_json_string() const;
    static SyntheticModelConfig from_json_string(const std::string& text);
    static SyntheticModelConfig from_json_file(const std::string& path);

    void validate() const;  // throws InvalidConfig
};

// What the synthetic model extracted from a context. Exposed for tests and
// diagnostics; everything downstream is a pure function of it.
struct ContextFeatures {
    std::vector<SemanticId> history;      // complete SIDs inside the history block
    std::vector<int> mention_counts;      // per-cluster pseudo-counts from CoT content tokens
    int n_general = 0;                    // general tokens anywhere in the context
    int n_sid = 0;                        // SID code tokens anywhere in the context
    bool cot_present = false;             // context carries a <|cot_begin|> block
    bool sid_ready = false;               // context ends with <|sid_begin|>
};

// Exactly computable mixture-of-clusters recommender with a controllable
// popularity drift. Immutable after construction; safe for concurrent reads.
class SyntheticBackend final : public ScoringBackend {
  public:
    explicit SyntheticBackend(const SyntheticModelConfig& config);

    // Injects explicit cluster distributions / prior / popularity instead of
    // sampling them from the seed. Rows of `clusters` must each sum to 1.
    static SyntheticBackend with_clusters(const SyntheticModelConfig& config,
                                          std::vector<std::vector<double>> clusters,
                                          std::vector<double> prior,
                                          std::vector<double> popularity);

    BackendCapabilities capabilities() const override;
    std::vector<double> score_candidates(const TokenSeq& context,
                                         const std::vector<SemanticId>& candidates) const override;
    std::vector<TokenProb> next_token_dist(const TokenSeq& context) const override;
    AttentionProfile attention_profile(const TokenSeq& context) const override;

    const SyntheticModelConfig& config() const { return config_; }
    const Vocabulary& vocabulary() const { return *vocab_; }
    std::uint64_t item_count() const { return n_items_; }

    const std::vector<std::vector<double>>& cluster_distributions() const { return clusters_; }
    const std::vector<double>& cluster_prior() const { return prior_; }
    const std::vector<double>& popularity() const { return popularity_; }

    // Cluster-mention token for cluster k ("cluster_{k}").
    std::string mention_token(int cluster) const;
    // Non-mention, non-scaffold general tokens usable as filler.
    const std::vector<std::string>& filler_tokens() const { return filler_tokens_; }

    ContextFeatures extract_features(const TokenSeq& context) const;

    // Posterior cluster weights given history items and mention pseudo-counts.
    std::vector<double> posterior(const std::vector<SemanticId>& history,
                                  const std::vector<int>& mention_counts) const;

    // Drift-free conditional over all items: sum_k u_k Q_k, or uniform for the
    // empty posterior (no history, no mentions).
    std::vector<double> base_distribution(const std::vector<SemanticId>& history,
                                          const std::vector<int>& mention_counts = {}) const;

    // Full conditional over all items for a prompt, drift mixed in when the
    // context carries a CoT block.
    std::vector<double> item_distribution(const TokenSeq& context) const;

    // gamma * n_gen / (n_gen + lambda_sid * n_sid); 0 when no general tokens.
    double effective_drift(const ContextFeatures& features) const;

    // Deterministic per-token embedding; SID and general tokens live around
    // separated subspace means. Dimension is embedding_dim().
    static constexpr int embedding_dim() { return 16; }
    std::vector<double> token_embedding(const std::string& token) const;

  private:
    SyntheticBackend(const SyntheticModelConfig& config, bool seed_tables);
    static Vocabulary make_vocabulary(const SyntheticModelConfig& config);

    SyntheticModelConfig config_;
    std::shared_ptr<const Vocabulary> vocab_;
    std::uint64_t n_items_ = 0;
    std::vector<std::vector<double>> clusters_;   // K x N, rows sum to 1
    std::vector<std::vector<double>> log_clusters_;
    std::vector<double> prior_;                   // K, sums to 1
    std::vector<double> popularity_;              // N, sums to 1
    std::vector<std::string> filler_tokens_;
};

// Strips trailing ASCII punctuation; used when matching CoT surface tokens
// against vocabulary entries ("cluster_3." counts as a cluster_3 mention).
std::string strip_trailing_punct(std::string_view token);

}  // namespace sidalign
