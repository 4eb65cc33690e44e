#include "sidalign/decode.hpp"

#include <algorithm>
#include <cmath>

#include "sidalign/errors.hpp"

namespace sidalign {

void BeamConfig::validate() const {
    if (num_beams < 1) throw InvalidConfig("num_beams must be >= 1");
    if (num_return < 1 || num_return > num_beams)
        throw InvalidConfig("num_return must be in [1, num_beams]");
}

namespace {

struct Beam {
    std::vector<int> codes;
    double logprob = 0.0;
};

bool beam_order(const Beam& a, const Beam& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.codes < b.codes;
}

}  // namespace

std::vector<ScoredSid> beam_search_sid(const ScoringBackend& backend, const TokenSeq& context,
                                       const BeamConfig& cfg) {
    cfg.validate();
    if (!backend.capabilities().supports_full_distribution)
        throw UnsupportedCapability("backend does not expose full next-token distributions");
    if (context.empty() || context.back() != kSidBegin)
        throw ContextNotSidReady("context must end with " + std::string(kSidBegin));

    // Level count comes from the first expansion; every prefix is extended by
    // exactly the legal code tokens for its level until <|sid_end|> is the
    // only continuation.
    std::vector<Beam> beams{Beam{}};
    TokenSeq scratch = context;
    bool done = false;
    while (!done) {
        std::vector<Beam> expanded;
        for (const auto& beam : beams) {
            scratch.resize(context.size());
            for (std::size_t l = 0; l < beam.codes.size(); ++l)
                scratch.push_back(sid_token(static_cast<int>(l), beam.codes[l]));
            const std::vector<TokenProb> dist = backend.next_token_dist(scratch);
            if (dist.size() == 1 && dist[0].token == kSidEnd) {
                // All beams share the same length, so the whole frontier is
                // complete once one beam is.
                done = true;
                break;
            }
            for (const auto& tp : dist) {
                const auto lc = parse_sid_token(tp.token);
                if (!lc) throw MalformedSid("backend produced non-SID continuation: " + tp.token);
                Beam next = beam;
                next.codes.push_back(lc->second);
                next.logprob += std::log(tp.prob);
                expanded.push_back(std::move(next));
            }
        }
        if (done) break;
        std::sort(expanded.begin(), expanded.end(), beam_order);
        if (static_cast<int>(expanded.size()) > cfg.num_beams)
            expanded.resize(static_cast<std::size_t>(cfg.num_beams));
        beams = std::move(expanded);
    }

    std::sort(beams.begin(), beams.end(), beam_order);
    if (static_cast<int>(beams.size()) > cfg.num_return)
        beams.resize(static_cast<std::size_t>(cfg.num_return));

    std::vector<ScoredSid> out;
    out.reserve(beams.size());
    for (auto& beam : beams) out.push_back({SemanticId(std::move(beam.codes)), beam.logprob});
    return out;
}

std::vector<ScoredSid> enumerate_all_sids(const ScoringBackend& backend, const TokenSeq& context,
                                          int levels, int codes_per_level) {
    if (levels < 1 || codes_per_level < 2) throw InvalidConfig("invalid SID space shape");
    std::uint64_t n = 1;
    for (int l = 0; l < levels; ++l) {
        n *= static_cast<std::uint64_t>(codes_per_level);
        if (n > 4096) throw SpaceTooLarge("C^L exceeds the 4096-item enumeration guard");
    }

    std::vector<SemanticId> all;
    all.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) all.push_back(index_to_sid(i, levels, codes_per_level));

    const std::vector<double> scores = backend.score_candidates(context, all);
    std::vector<ScoredSid> out(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) out[i] = {std::move(all[i]), scores[i]};
    std::sort(out.begin(), out.end(), [](const ScoredSid& a, const ScoredSid& b) {
        if (a.logprob != b.logprob) return a.logprob > b.logprob;
        return a.sid < b.sid;
    });
    return out;
}

}  // namespace sidalign
