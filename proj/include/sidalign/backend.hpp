#pragma once

#include <string>
#include <vector>

#include "sidalign/vocab.hpp"

namespace sidalign {

struct BackendCapabilities {
    bool supports_attention = false;
    bool supports_full_distribution = false;
};

struct AttentionEntry {
    std::string token;
    SubspaceTag tag;
    double mass;
};

// Per-context-token attention mass over the non-structural tokens, in context
// order. Masses sum to 1 within 1e-9.
struct AttentionProfile {
    std::vector<AttentionEntry> entries;
};

struct TokenProb {
    std::string token;
    double prob;
};

// Deterministic autoregressive scorer. For a fixed context every call returns
// identical values; candidate log-probabilities are finite and <= 0.
class ScoringBackend {
  public:
    virtual ~ScoringBackend() = default;

    virtual BackendCapabilities capabilities() const = 0;

    // Total log-probability of each candidate's L code tokens generated after
    // the terminal <|sid_begin|>. One value per candidate, input order.
    virtual std::vector<double> score_candidates(const TokenSeq& context,
                                                 const std::vector<SemanticId>& candidates) const = 0;

    // Distribution over the legal next SID-level tokens given a context that
    // may carry a partial code prefix after <|sid_begin|>. Requires
    // supports_full_distribution.
    virtual std::vector<TokenProb> next_token_dist(const TokenSeq& context) const = 0;

    // Requires supports_attention.
    virtual AttentionProfile attention_profile(const TokenSeq& context) const = 0;
};

}  // namespace sidalign
