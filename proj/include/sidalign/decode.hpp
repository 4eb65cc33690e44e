#pragma once

#include <vector>

#include "sidalign/backend.hpp"
#include "sidalign/vocab.hpp"

namespace sidalign {

struct BeamConfig {
    int num_beams = 32;
    int num_return = 32;

    void validate() const;  // throws InvalidConfig
};

struct ScoredSid {
    SemanticId sid;
    double logprob;
};

// Length-L beam search over the code levels, constrained to legal code tokens.
// Scores are sums of step log-probabilities. Ties break by (score desc, SID
// lexicographic asc). No length normalization: every sequence has length L.
std::vector<ScoredSid> beam_search_sid(const ScoringBackend& backend, const TokenSeq& context,
                                       const BeamConfig& cfg);

// Exhaustive ranking of all C^L items by score_candidates; same tie rule.
// Guards the space at 4096 items.
std::vector<ScoredSid> enumerate_all_sids(const ScoringBackend& backend, const TokenSeq& context,
                                          int levels, int codes_per_level);

}  // namespace sidalign
