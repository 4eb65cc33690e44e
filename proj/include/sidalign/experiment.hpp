#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sidalign/align.hpp"
#include "sidalign/backend.hpp"
#include "sidalign/compress.hpp"
#include "sidalign/dataset.hpp"

namespace sidalign {

struct ExperimentConfig {
    AlignConfig align;
    CompressorConfig compressor = CompressorConfig::defaults();
    std::vector<double> alpha_grid;  // empty: evaluate align.alpha only
    std::vector<int> k_list = {1, 5, 10};
    int workers = 1;

    void validate() const;
};

struct ReportRow {
    std::string method;  // think_off | think_on | aligned
    std::string metric;  // Recall | NDCG
    int k = 0;
    std::optional<double> alpha;  // set for aligned rows
    double value = 0.0;
    std::size_t n = 0;
};

struct ReportTable {
    std::vector<ReportRow> rows;

    // First matching row; throws InvalidConfig when absent.
    double value(const std::string& method, const std::string& metric, int k,
                 std::optional<double> alpha = std::nullopt) const;
};

// Compares think_off (Baseline-context beam search), think_on (raw-CoT-context
// beam search) and the aligned rerank pipeline per alpha over one dataset.
// Results are identical for any worker count.
ReportTable run_experiment(const ScoringBackend& backend,
                           const std::vector<EpisodeRecord>& episodes,
                           const ExperimentConfig& cfg, int levels, int codes_per_level);

// CSV with columns method,metric,K,alpha,value,n (alpha empty for the beam
// baselines).
std::string report_to_csv(const ReportTable& table);

// One JSON line per episode with the full per-candidate score breakdown at
// cfg.align.alpha.
std::string rerank_dataset_jsonl(const ScoringBackend& backend,
                                 const std::vector<EpisodeRecord>& episodes,
                                 const ExperimentConfig& cfg, int levels, int codes_per_level);

}  // namespace sidalign
