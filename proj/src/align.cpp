#include "sidalign/align.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sidalign/decode.hpp"
#include "sidalign/errors.hpp"

namespace sidalign {

void AlignConfig::validate() const {
    if (alpha < 0.0) throw NegativeAlpha("alpha must be >= 0");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    if (num_beams < 1 || num_return < 1 || num_return > num_beams)
        throw InvalidConfig("num_return must be in [1, num_beams]");
}

namespace {

void append_history(TokenSeq& out, const std::vector<SemanticId>& history, int levels,
                    int codes_per_level) {
    for (const auto& sid : history) {
        if (static_cast<int>(sid.codes.size()) != levels)
            throw MalformedSid("history SID level count mismatch");
        for (int level = 0; level < levels; ++level) {
            const int code = sid.codes[static_cast<std::size_t>(level)];
            if (code < 0 || code >= codes_per_level)
                throw CodeRangeError("history SID code out of range");
            out.push_back(sid_token(level, code));
        }
    }
}

void append_cot_block(TokenSeq& out, const TokenSeq& cot) {
    out.emplace_back(kCotBegin);
    out.insert(out.end(), cot.begin(), cot.end());
    out.emplace_back(kCotEnd);
}

}  // namespace

TokenSeq build_context(ContextKind kind, const std::vector<SemanticId>& history,
                       const TokenSeq& cot_tokens, const TokenSeq& compressed, int levels,
                       int codes_per_level) {
    TokenSeq out;
    switch (kind) {
        case ContextKind::Baseline: {
            if (history.empty()) throw EmptyHistory("baseline context requires history");
            out.emplace_back(kHistBegin);
            append_history(out, history, levels, codes_per_level);
            out.emplace_back(kHistEnd);
            break;
        }
        case ContextKind::Expert: {
            if (history.empty()) throw EmptyHistory("expert context requires history");
            if (compressed.empty()) throw EmptyInput("expert context requires a compressed chain");
            out.emplace_back(kHistBegin);
            append_history(out, history, levels, codes_per_level);
            out.emplace_back(kHistEnd);
            append_cot_block(out, compressed);
            break;
        }
        case ContextKind::Amateur: {
            out.emplace_back(kHistBegin);
            out.emplace_back(kHistEmpty);
            out.emplace_back(kHistEnd);
            append_cot_block(out, cot_tokens);
            break;
        }
    }
    out.emplace_back(kSidBegin);
    return out;
}

TokenSeq think_on_context(const std::vector<SemanticId>& history, const TokenSeq& cot_tokens,
                          int levels, int codes_per_level) {
    TokenSeq out;
    out.emplace_back(kHistBegin);
    if (history.empty())
        out.emplace_back(kHistEmpty);
    else
        append_history(out, history, levels, codes_per_level);
    out.emplace_back(kHistEnd);
    if (!cot_tokens.empty()) append_cot_block(out, cot_tokens);
    out.emplace_back(kSidBegin);
    return out;
}

std::vector<double> zscore_normalize(const std::vector<double>& scores, double epsilon) {
    if (scores.empty()) throw EmptyInput("cannot normalize an empty score set");
    const double eps = std::max(epsilon, 1e-12);
    const double n = static_cast<double>(scores.size());
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= n;
    const double denom = std::sqrt(var) + eps;
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - mean) / denom;
    return out;
}

double contrastive_score(double zt_e, double zt_a, double zt_b, double alpha) {
    if (alpha < 0.0) throw NegativeAlpha("alpha must be >= 0");
    return (1.0 + alpha) * zt_e - alpha * (zt_a - zt_b);
}

CpmiParts cpmi_decompose(const ScoringBackend& backend, const std::vector<SemanticId>& history,
                         const TokenSeq& cot_tokens, const SemanticId& y, int levels,
                         int codes_per_level) {
    const TokenSeq total_ctx = think_on_context(history, cot_tokens, levels, codes_per_level);
    const TokenSeq prior_ctx =
        build_context(ContextKind::Amateur, {}, cot_tokens, {}, levels, codes_per_level);
    const std::vector<SemanticId> one{y};
    const double total = backend.score_candidates(total_ctx, one)[0];
    const double prior = backend.score_candidates(prior_ctx, one)[0];
    return {total - prior, prior, total};
}

std::vector<SemanticId> generate_candidates(const ScoringBackend& backend,
                                            const EpisodeRecord& episode, const AlignConfig& cfg,
                                            const TokenSeq& compressed, int levels,
                                            int codes_per_level) {
    cfg.validate();
    if (episode.candidates.has_value()) return *episode.candidates;

    const BeamConfig beam_cfg{cfg.num_beams, cfg.num_return};
    const TokenSeq expert_ctx = build_context(ContextKind::Expert, episode.history, {}, compressed,
                                              levels, codes_per_level);
    std::vector<SemanticId> out;
    std::set<SemanticId> seen;
    for (const auto& scored : beam_search_sid(backend, expert_ctx, beam_cfg)) {
        if (seen.insert(scored.sid).second) out.push_back(scored.sid);
    }
    if (cfg.candidate_policy == CandidatePolicy::UnionExpertBaseline) {
        const TokenSeq baseline_ctx =
            build_context(ContextKind::Baseline, episode.history, {}, {}, levels, codes_per_level);
        for (const auto& scored : beam_search_sid(backend, baseline_ctx, beam_cfg)) {
            if (seen.insert(scored.sid).second) out.push_back(scored.sid);
        }
    }
    return out;
}

std::vector<ScoredCandidate> score_candidate_pool(const ScoringBackend& backend,
                                                  const EpisodeRecord& episode,
                                                  const AlignConfig& cfg,
                                                  const CompressFn& compressor, int levels,
                                                  int codes_per_level) {
    cfg.validate();
    if (episode.history.empty()) throw EmptyHistory("rerank requires a non-empty history");

    const TokenSeq cot_tokens = split_whitespace(episode.cot);
    const TokenSeq compressed = split_whitespace(compressor(episode.cot));

    const std::vector<SemanticId> pool =
        generate_candidates(backend, episode, cfg, compressed, levels, codes_per_level);

    const TokenSeq expert_ctx =
        build_context(ContextKind::Expert, episode.history, {}, compressed, levels, codes_per_level);
    const TokenSeq amateur_ctx =
        build_context(ContextKind::Amateur, {}, cot_tokens, {}, levels, codes_per_level);
    const TokenSeq baseline_ctx =
        build_context(ContextKind::Baseline, episode.history, {}, {}, levels, codes_per_level);

    const std::vector<double> z_e = backend.score_candidates(expert_ctx, pool);
    const std::vector<double> z_a = backend.score_candidates(amateur_ctx, pool);
    const std::vector<double> z_b = backend.score_candidates(baseline_ctx, pool);
    const std::vector<double> zt_e = zscore_normalize(z_e, cfg.epsilon);
    const std::vector<double> zt_a = zscore_normalize(z_a, cfg.epsilon);
    const std::vector<double> zt_b = zscore_normalize(z_b, cfg.epsilon);

    std::vector<ScoredCandidate> out(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out[i].sid = pool[i];
        out[i].z_e = z_e[i];
        out[i].z_a = z_a[i];
        out[i].z_b = z_b[i];
        out[i].zt_e = zt_e[i];
        out[i].zt_a = zt_a[i];
        out[i].zt_b = zt_b[i];
        out[i].drift = zt_a[i] - zt_b[i];
    }
    return out;
}

std::vector<ScoredCandidate> finalize_ranking(std::vector<ScoredCandidate> pool, double alpha) {
    for (auto& c : pool) c.final_score = contrastive_score(c.zt_e, c.zt_a, c.zt_b, alpha);
    std::sort(pool.begin(), pool.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.final_score != b.final_score) return a.final_score > b.final_score;
        return a.sid < b.sid;
    });
    return pool;
}

std::vector<ScoredCandidate> rerank(const ScoringBackend& backend, const EpisodeRecord& episode,
                                    const AlignConfig& cfg, const CompressFn& compressor,
                                    int levels, int codes_per_level) {
    return finalize_ranking(
        score_candidate_pool(backend, episode, cfg, compressor, levels, codes_per_level),
        cfg.alpha);
}

}  // namespace sidalign
