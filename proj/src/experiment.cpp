#include "sidalign/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sidalign/decode.hpp"
#include "sidalign/errors.hpp"
#include "sidalign/metrics.hpp"
#include "sidalign/parallel.hpp"

namespace sidalign {

void ExperimentConfig::validate() const {
    align.validate();
    compressor.validate();
    for (double a : alpha_grid)
        if (a < 0.0) throw NegativeAlpha("alpha grid entries must be >= 0");
    if (k_list.empty()) throw InvalidConfig("k_list must be non-empty");
    for (int k : k_list)
        if (k < 1) throw InvalidConfig("K must be >= 1");
    if (workers < 1) throw InvalidConfig("workers must be >= 1");
}

double ReportTable::value(const std::string& method, const std::string& metric, int k,
                          std::optional<double> alpha) const {
    for (const auto& row : rows) {
        if (row.method != method || row.metric != metric || row.k != k) continue;
        if (alpha.has_value() != row.alpha.has_value()) continue;
        if (alpha && *alpha != *row.alpha) continue;
        return row.value;
    }
    throw InvalidConfig("no such report row: " + method + "/" + metric + "@" + std::to_string(k));
}

namespace {

struct MethodMetrics {
    std::vector<double> recall;  // one slot per K
    std::vector<double> ndcg;
};

struct EpisodeOutcome {
    MethodMetrics think_off;
    MethodMetrics think_on;
    std::vector<MethodMetrics> aligned;  // one per alpha
};

MethodMetrics measure(const std::vector<SemanticId>& ranking, const SemanticId& target,
                      const std::vector<int>& k_list) {
    MethodMetrics m;
    m.recall.reserve(k_list.size());
    m.ndcg.reserve(k_list.size());
    for (int k : k_list) {
        m.recall.push_back(recall_at_k(ranking, target, k));
        m.ndcg.push_back(ndcg_at_k(ranking, target, k));
    }
    return m;
}

std::vector<SemanticId> sids_of(const std::vector<ScoredSid>& scored) {
    std::vector<SemanticId> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.sid);
    return out;
}

std::vector<SemanticId> sids_of(const std::vector<ScoredCandidate>& scored) {
    std::vector<SemanticId> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.sid);
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_alpha(double a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", a);
    return buf;
}

}  // namespace

ReportTable run_experiment(const ScoringBackend& backend,
                           const std::vector<EpisodeRecord>& episodes,
                           const ExperimentConfig& cfg, int levels, int codes_per_level) {
    cfg.validate();
    const std::vector<double> alphas =
        cfg.alpha_grid.empty() ? std::vector<double>{cfg.align.alpha} : cfg.alpha_grid;
    const BeamConfig beam_cfg{cfg.align.num_beams, cfg.align.num_return};
    const CompressFn compressor = [&cfg](const std::string& cot) {
        return compress_rule_based(cot, cfg.compressor);
    };

    std::vector<EpisodeOutcome> outcomes(episodes.size());
    parallel_for_indexed(episodes.size(), cfg.workers, [&](std::size_t i) {
        const EpisodeRecord& ep = episodes[i];
        const TokenSeq cot_tokens = split_whitespace(ep.cot);

        const TokenSeq off_ctx = think_on_context(ep.history, {}, levels, codes_per_level);
        const TokenSeq on_ctx = think_on_context(ep.history, cot_tokens, levels, codes_per_level);

        EpisodeOutcome& out = outcomes[i];
        out.think_off =
            measure(sids_of(beam_search_sid(backend, off_ctx, beam_cfg)), ep.target, cfg.k_list);
        out.think_on =
            measure(sids_of(beam_search_sid(backend, on_ctx, beam_cfg)), ep.target, cfg.k_list);

        const std::vector<ScoredCandidate> pool =
            score_candidate_pool(backend, ep, cfg.align, compressor, levels, codes_per_level);
        out.aligned.reserve(alphas.size());
        for (double alpha : alphas) {
            out.aligned.push_back(
                measure(sids_of(finalize_ranking(pool, alpha)), ep.target, cfg.k_list));
        }
    });

    // Serial index-order aggregation keeps the table independent of worker
    // scheduling.
    const std::size_t n = episodes.size();
    const double denom = n == 0 ? 1.0 : static_cast<double>(n);
    auto mean_of = [&](auto select) {
        std::vector<double> recall(cfg.k_list.size(), 0.0), ndcg(cfg.k_list.size(), 0.0);
        for (const auto& out : outcomes) {
            const MethodMetrics& m = select(out);
            for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
                recall[ki] += m.recall[ki];
                ndcg[ki] += m.ndcg[ki];
            }
        }
        for (auto& v : recall) v /= denom;
        for (auto& v : ndcg) v /= denom;
        return std::make_pair(recall, ndcg);
    };

    ReportTable table;
    auto emit = [&](const std::string& method, std::optional<double> alpha,
                    const std::pair<std::vector<double>, std::vector<double>>& values) {
        for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
            table.rows.push_back(
                {method, "Recall", cfg.k_list[ki], alpha, values.first[ki], n});
        for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
            table.rows.push_back({method, "NDCG", cfg.k_list[ki], alpha, values.second[ki], n});
    };

    emit("think_off", std::nullopt,
         mean_of([](const EpisodeOutcome& o) -> const MethodMetrics& { return o.think_off; }));
    emit("think_on", std::nullopt,
         mean_of([](const EpisodeOutcome& o) -> const MethodMetrics& { return o.think_on; }));
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        emit("aligned", alphas[ai],
             mean_of([ai](const EpisodeOutcome& o) -> const MethodMetrics& {
                 return o.aligned[ai];
             }));
    }
    return table;
}

std::string report_to_csv(const ReportTable& table) {
    std::string out = "method,metric,K,alpha,value,n\n";
    for (const auto& row : table.rows) {
        out += row.method;
        out += ',';
        out += row.metric;
        out += ',';
        out += std::to_string(row.k);
        out += ',';
        if (row.alpha) out += format_alpha(*row.alpha);
        out += ',';
        out += format_value(row.value);
        out += ',';
        out += std::to_string(row.n);
        out += '\n';
    }
    return out;
}

std::string rerank_dataset_jsonl(const ScoringBackend& backend,
                                 const std::vector<EpisodeRecord>& episodes,
                                 const ExperimentConfig& cfg, int levels, int codes_per_level) {
    cfg.validate();
    const CompressFn compressor = [&cfg](const std::string& cot) {
        return compress_rule_based(cot, cfg.compressor);
    };
    const Vocabulary vocab(levels, codes_per_level, {});

    std::vector<std::string> lines(episodes.size());
    parallel_for_indexed(episodes.size(), cfg.workers, [&](std::size_t i) {
        const std::vector<ScoredCandidate> ranking =
            rerank(backend, episodes[i], cfg.align, compressor, levels, codes_per_level);
        nlohmann::ordered_json j;
        j["user"] = episodes[i].user;
        nlohmann::ordered_json sids = nlohmann::ordered_json::array();
        nlohmann::ordered_json scores = nlohmann::ordered_json::array();
        for (const auto& c : ranking) {
            sids.push_back(render_sid(c.sid, vocab));
            nlohmann::ordered_json s;
            s["sid"] = render_sid(c.sid, vocab);
            s["zE"] = c.z_e;
            s["zA"] = c.z_a;
            s["zB"] = c.z_b;
            s["ztE"] = c.zt_e;
            s["ztA"] = c.zt_a;
            s["ztB"] = c.zt_b;
            s["drift"] = c.drift;
            s["final"] = c.final_score;
            scores.push_back(std::move(s));
        }
        j["ranking"] = std::move(sids);
        j["scores"] = std::move(scores);
        lines[i] = j.dump();
    });

    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace sidalign
