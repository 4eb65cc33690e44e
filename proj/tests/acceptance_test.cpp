// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Tolerances are pinned in the checks themselves.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "sidalign/align.hpp"
#include "sidalign/compress.hpp"
#include "sidalign/dataset.hpp"
#include "sidalign/decode.hpp"
#include "sidalign/diagnose.hpp"
#include "sidalign/errors.hpp"
#include "sidalign/experiment.hpp"
#include "sidalign/fixture_server.hpp"
#include "sidalign/metrics.hpp"
#include "sidalign/remote_backend.hpp"
#include "sidalign/rng.hpp"
#include "sidalign/synthetic_backend.hpp"

using namespace sidalign;
namespace fs = std::filesystem;

// Minimal stub backend for criterion 3's zero-drift construction.
namespace testing_stub {

class Stub final : public ScoringBackend {
  public:
    Stub(int items, std::vector<double> expert, std::vector<double> amateur_and_baseline)
        : items_(items), expert_(std::move(expert)), shared_(std::move(amateur_and_baseline)) {}

    BackendCapabilities capabilities() const override { return {false, false}; }

    std::vector<double> score_candidates(const TokenSeq& context,
                                         const std::vector<SemanticId>& candidates) const override {
        const bool amateur =
            std::find(context.begin(), context.end(), std::string(kHistEmpty)) != context.end();
        const bool cot =
            std::find(context.begin(), context.end(), std::string(kCotBegin)) != context.end();
        const std::vector<double>& table = amateur ? shared_ : (cot ? expert_ : shared_);
        std::vector<double> out;
        for (const auto& sid : candidates) out.push_back(table.at(sid_to_index(sid, 4)));
        return out;
    }
    std::vector<TokenProb> next_token_dist(const TokenSeq&) const override {
        throw UnsupportedCapability("stub");
    }
    AttentionProfile attention_profile(const TokenSeq&) const override {
        throw UnsupportedCapability("stub");
    }

  private:
    int items_;
    std::vector<double> expert_, shared_;
};

}  // namespace testing_stub

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

SyntheticModelConfig small_model(std::uint64_t seed, double gamma = 0.6) {
    SyntheticModelConfig cfg;
    cfg.levels = 2;
    cfg.codes_per_level = 4;
    cfg.k_clusters = 3;
    cfg.n_general = 16;
    cfg.gamma = gamma;
    cfg.seed = seed;
    return cfg;
}

SyntheticModelConfig drift_model(std::uint64_t seed) {
    SyntheticModelConfig cfg;
    cfg.levels = 3;
    cfg.codes_per_level = 8;
    cfg.k_clusters = 8;
    cfg.n_general = 64;
    cfg.gamma = 0.6;
    cfg.kappa = 1.0;
    cfg.seed = seed;
    return cfg;
}

std::string fuzz_cot(Rng& rng) {
    static const std::vector<std::string> pieces = {
        "I need to analyze", "First,", "the user repeatedly watches", "the user prefers",
        "likes", "sci-fi", "movies", "jazz", "vinyl", "w17", "cluster_3", "!!", "...",
        "The current user's preference is", "hiking gear.", "Overall", ";", "\t",
    };
    const std::size_t n = rng.next_below(48);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += pieces[rng.next_below(pieces.size())];
        out += rng.next_below(8) == 0 ? "." : " ";
    }
    return out;
}

// ---------------------------------------------------------------------------

// Score decomposition identity over 1,000 seeded (episode, candidate) pairs.
void criterion_1() {
    const SyntheticBackend backend(drift_model(101));
    const auto episodes = synth_dataset(backend, 200, CotStyle::Verbose, 101);
    Rng rng(202);
    std::size_t pairs = 0;
    for (const auto& ep : episodes) {
        const TokenSeq cot = split_whitespace(ep.cot);
        for (int c = 0; c < 5; ++c) {
            const SemanticId y = index_to_sid(rng.next_below(512), 3, 8);
            const auto parts = cpmi_decompose(backend, ep.history, cot, y, 3, 8);
            require(std::abs(parts.total - (parts.cpmi + parts.prior)) <= 1e-12,
                    "identity violated at pair " + std::to_string(pairs));
            ++pairs;
        }
    }
    require(pairs == 1000, "expected 1000 pairs");
}

// Z-score statistics over 1,000 random non-constant candidate sets.
void criterion_2() {
    Rng rng(42);
    const double eps = 1e-6;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.next_below(63);  // 2..64
        std::vector<double> scores(n);
        for (auto& s : scores) s = -20.0 * rng.next_double_open();
        scores[0] += 1.0;  // non-constant

        double mu = 0.0;
        for (double s : scores) mu += s;
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (double s : scores) var += (s - mu) * (s - mu);
        const double sigma = std::sqrt(var / static_cast<double>(n));

        const auto out = zscore_normalize(scores, eps);
        double out_mu = 0.0;
        for (double v : out) out_mu += v;
        out_mu /= static_cast<double>(n);
        double out_var = 0.0;
        for (double v : out) out_var += (v - out_mu) * (v - out_mu);
        const double out_sigma = std::sqrt(out_var / static_cast<double>(n));

        require(std::abs(out_mu) <= 1e-9, "normalized mean off at trial " + std::to_string(trial));
        require(std::abs(out_sigma - sigma / (sigma + eps)) <= 1e-6,
                "normalized std off at trial " + std::to_string(trial));
    }
}

// Alpha-zero degeneracy and zero-drift alpha-invariance, exact equality.
void criterion_3() {
    const SyntheticBackend backend(small_model(7));
    const auto episodes = synth_dataset(backend, 200, CotStyle::Verbose, 7);
    AlignConfig cfg;
    cfg.alpha = 0.0;
    cfg.num_beams = 8;
    cfg.num_return = 8;
    const CompressFn compressor = [](const std::string& cot) {
        return compress_rule_based(cot, CompressorConfig::defaults());
    };
    for (const auto& ep : episodes) {
        const auto ranking = rerank(backend, ep, cfg, compressor, 2, 4);
        auto by_expert = ranking;
        std::sort(by_expert.begin(), by_expert.end(),
                  [](const ScoredCandidate& a, const ScoredCandidate& b) {
                      if (a.z_e != b.z_e) return a.z_e > b.z_e;
                      return a.sid < b.sid;
                  });
        for (std::size_t i = 0; i < ranking.size(); ++i)
            require(ranking[i].sid == by_expert[i].sid, "alpha=0 ranking deviates from expert");
    }

    // zt_A == zt_B by construction: amateur and baseline tables identical.
    Rng rng(9);
    for (int instance = 0; instance < 50; ++instance) {
        std::vector<double> z_e(16), z_ab(16);
        for (auto& v : z_e) v = -10.0 * rng.next_double_open();
        for (auto& v : z_ab) v = -10.0 * rng.next_double_open();
        const testing_stub::Stub stub(16, z_e, z_ab);

        EpisodeRecord ep;
        ep.user = "stub";
        ep.history = {SemanticId({0, 0})};
        ep.cot = "the user likes jazz";
        std::vector<SemanticId> cands;
        for (int i = 0; i < 16; ++i) cands.push_back(index_to_sid(i, 2, 4));
        ep.candidates = cands;
        ep.target = cands[0];

        std::vector<std::vector<SemanticId>> orders;
        for (double alpha : {0.0, 0.5, 2.0}) {
            AlignConfig acfg;
            acfg.alpha = alpha;
            const auto ranking = rerank(stub, ep, acfg, compressor, 2, 4);
            std::vector<SemanticId> order;
            for (const auto& c : ranking) order.push_back(c.sid);
            orders.push_back(std::move(order));
        }
        require(orders[0] == orders[1] && orders[1] == orders[2],
                "zero-drift ranking changed with alpha");
    }
}

// Beam search equals the enumeration oracle at full width.
void criterion_4() {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SyntheticBackend backend(small_model(seed));
        const std::vector<SemanticId> history{index_to_sid(seed % 16, 2, 4),
                                              index_to_sid((3 * seed + 1) % 16, 2, 4)};
        const TokenSeq cot{"w" + std::to_string(seed % 9),
                           "cluster_" + std::to_string(seed % 3)};
        const TokenSeq ctx = think_on_context(history, cot, 2, 4);
        const auto beam = beam_search_sid(backend, ctx, BeamConfig{16, 16});
        const auto oracle = enumerate_all_sids(backend, ctx, 2, 4);
        require(beam.size() == oracle.size(), "cardinality mismatch");
        for (std::size_t i = 0; i < beam.size(); ++i) {
            require(beam[i].sid == oracle[i].sid,
                    "sid mismatch at seed " + std::to_string(seed));
            require(std::abs(beam[i].logprob - oracle[i].logprob) <= 1e-9,
                    "score mismatch at seed " + std::to_string(seed));
        }
    }
}

// Metric hand table plus the Recall@1 == NDCG@1 invariant on a real run.
void criterion_5() {
    std::vector<SemanticId> ranking;
    for (int i = 0; i < 8; ++i) ranking.push_back(SemanticId({i}));

    require(recall_at_k(ranking, SemanticId({0}), 1) == 1, "rank1 recall");
    require(ndcg_at_k(ranking, SemanticId({0}), 1) == 1.0, "rank1 ndcg");
    require(recall_at_k(ranking, SemanticId({2}), 10) == 1, "rank3@10 recall");
    require(std::abs(ndcg_at_k(ranking, SemanticId({2}), 10) - 0.5) <= 1e-12, "rank3@10 ndcg");
    require(recall_at_k(ranking, SemanticId({5}), 5) == 0, "rank6@5 recall");
    require(ndcg_at_k(ranking, SemanticId({5}), 5) == 0.0, "rank6@5 ndcg");

    const SyntheticBackend backend(small_model(31));
    const auto episodes = synth_dataset(backend, 40, CotStyle::Verbose, 31);
    ExperimentConfig cfg;
    cfg.align.num_beams = 8;
    cfg.align.num_return = 8;
    cfg.alpha_grid = {0.0, 0.5};
    const ReportTable table = run_experiment(backend, episodes, cfg, 2, 4);
    for (const auto& row : table.rows) {
        if (row.metric == "Recall" && row.k == 1)
            require(row.value == table.value(row.method, "NDCG", 1, row.alpha),
                    "Recall@1 != NDCG@1 for " + row.method);
    }
}

// Attention dynamics direction over 100 seeded episodes.
void criterion_6() {
    const SyntheticBackend backend(drift_model(61));
    const auto episodes = synth_dataset(backend, 100, CotStyle::Verbose, 61);
    double sdi_on = 0.0, sdi_off = 0.0, aei_on = 0.0, aei_off = 0.0;
    for (const auto& ep : episodes) {
        const auto [on, off] = episode_diagnostics(backend, ep, 3, 8);
        sdi_on += on.sdi;
        sdi_off += off.sdi;
        aei_on += on.aei;
        aei_off += off.aei;
    }
    const double n = static_cast<double>(episodes.size());
    require(sdi_on / n > sdi_off / n, "mean SDI did not rise under thinking");
    require(aei_on / n < aei_off / n, "mean AEI did not dilute under thinking");
}

// Drift-recovery experiment on the full synthetic setup.
void criterion_7() {
    const SyntheticBackend backend(drift_model(7));
    const auto episodes = synth_dataset(backend, 500, CotStyle::Verbose, 7);
    ExperimentConfig cfg;
    cfg.align.num_beams = 32;
    cfg.align.num_return = 32;
    cfg.alpha_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    cfg.k_list = {1, 5, 10};
    const ReportTable table = run_experiment(backend, episodes, cfg, 3, 8);

    const double off_r1 = table.value("think_off", "Recall", 1);
    const double on_r1 = table.value("think_on", "Recall", 1);
    double best_aligned_r1 = 0.0, best_aligned_n10 = 0.0;
    for (double alpha : cfg.alpha_grid) {
        best_aligned_r1 = std::max(best_aligned_r1, table.value("aligned", "Recall", 1, alpha));
        best_aligned_n10 = std::max(best_aligned_n10, table.value("aligned", "NDCG", 10, alpha));
    }
    const double on_n10 = table.value("think_on", "NDCG", 10);

    require(on_r1 < off_r1, "thinking did not degrade Recall@1 (" + std::to_string(on_r1) +
                                " vs " + std::to_string(off_r1) + ")");
    require(best_aligned_r1 > on_r1, "alignment did not recover Recall@1");
    require(best_aligned_n10 >= on_n10, "alignment did not recover NDCG@10");
}

// Compression contract over 10,000 fuzzed chains.
void criterion_8() {
    const CompressorConfig cfg = CompressorConfig::defaults();
    Rng rng(808);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::string cot = fuzz_cot(rng);
        const std::string out = compress_rule_based(cot, cfg);
        require(validate_compressed(out, cfg).ok(),
                "output failed validation at trial " + std::to_string(trial));
        require(static_cast<int>(split_whitespace(out).size()) <= 32,
                "budget exceeded at trial " + std::to_string(trial));
        require(compress_rule_based(out, cfg) == out,
                "not idempotent at trial " + std::to_string(trial));
    }
}

// Wire protocol conformance against the bundled fixture.
void criterion_9() {
    const std::string path = std::string(SIDALIGN_SOURCE_DIR) + "/fixtures/score_basic.json";
    auto server = FixtureServer::from_file(path);
    server.start();

    RemoteBackendConfig rcfg;
    rcfg.base_url = server.base_url();
    const RemoteBackend backend(rcfg);
    require(backend.healthy(), "health endpoint failed");

    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    const nlohmann::json fixture = nlohmann::json::parse(buf.str());
    for (const auto& c : fixture["score_cases"]) {
        const TokenSeq context = c["context_tokens"].get<TokenSeq>();
        std::vector<SemanticId> candidates;
        for (const auto& cand : c["candidates"]) {
            SemanticId sid;
            for (const auto& tok : cand) sid.codes.push_back(parse_sid_token(tok.get<std::string>())->second);
            candidates.push_back(std::move(sid));
        }
        const auto expected = c["logprobs"].get<std::vector<double>>();
        const auto got = backend.score_candidates(context, candidates);
        require(got == expected, "fixture logprobs did not round-trip bit-exactly");
    }

    httplib::Client client(server.base_url());
    for (const std::string body :
         {std::string("junk"), std::string(R"({"candidates": [["<s_0_0>"]]})"),
          std::string(R"({"context_tokens": [], "candidates": []})")}) {
        auto res = client.Post("/v1/score", body, "application/json");
        require(res && res->status == 400, "malformed request not rejected with 400");
        const nlohmann::json err = nlohmann::json::parse(res->body, nullptr, false);
        require(!err.is_discarded() && err.contains("error") && err["error"].is_string(),
                "400 body lacks a structured error");
    }
}

// PCA hand example and planted rank-2 recovery.
void criterion_10() {
    const PcaResult line = pca_project({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}, 1);
    const double inv_sqrt2 = 0.7071067811865475;
    require(std::abs(std::abs(line.components[0][0]) - inv_sqrt2) <= 1e-9, "PC1 x off");
    require(std::abs(std::abs(line.components[0][1]) - inv_sqrt2) <= 1e-9, "PC1 y off");
    require(std::abs(line.explained_variance_ratio[0] - 1.0) <= 1e-9, "ratio off");

    Rng rng(10);
    std::vector<double> u(8), v(8);
    for (auto& x : u) x = rng.next_normal();
    for (auto& x : v) x = rng.next_normal();
    double dot = 0.0, norm_u = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        dot += u[i] * v[i];
        norm_u += u[i] * u[i];
    }
    for (std::size_t i = 0; i < 8; ++i) v[i] -= dot / norm_u * u[i];
    std::vector<std::vector<double>> points;
    for (int t = 0; t < 60; ++t) {
        const double a = rng.next_normal(), b = rng.next_normal();
        std::vector<double> p(8);
        for (std::size_t i = 0; i < 8; ++i) p[i] = a * u[i] + b * v[i];
        points.push_back(std::move(p));
    }
    const PcaResult planted = pca_project(points, 2);
    require(std::abs(planted.explained_variance_ratio[0] + planted.explained_variance_ratio[1] -
                     1.0) <= 1e-9,
            "rank-2 variance not recovered");
}

// Byte-identical synth -> rerank -> eval -> diagnose pipeline, workers 1 and 8.
void criterion_11() {
    const fs::path dir = fs::temp_directory_path() / "sidalign_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = SIDALIGN_CLI_PATH;

    auto sh = [&](const std::string& cmd) {
        const std::string full = cmd + " > /dev/null 2>&1";
        const int status = std::system(full.c_str());
        require(status != -1 && WEXITSTATUS(status) == 0, "command failed: " + cmd);
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    auto pipeline = [&](const std::string& tag, int workers) {
        const std::string d = (dir / ("data_" + tag + ".jsonl")).string();
        const std::string m = (dir / ("model_" + tag + ".json")).string();
        const std::string r = (dir / ("rank_" + tag + ".jsonl")).string();
        const std::string e = (dir / ("report_" + tag + ".csv")).string();
        const std::string g = (dir / ("diag_" + tag + ".csv")).string();
        const std::string p = (dir / ("proj_" + tag + ".csv")).string();
        const std::string w = " --workers " + std::to_string(workers);
        sh(cli + " synth --items-levels 3 --codes 8 --clusters 8 --gamma 0.6 --episodes 40"
                 " --cot-style verbose --seed 17 --out " + d + " --model-out " + m);
        sh(cli + " rerank --data " + d + " --backend synth:" + m + " --out " + r + w);
        sh(cli + " eval --data " + d + " --backend synth:" + m +
           " --alpha-grid 0,0.5,1 --k 1,5,10 --out " + e + w);
        sh(cli + " diagnose --data " + d + " --backend synth:" + m + " --out " + g +
           " --projections-out " + p);
        return slurp(d) + "\x1e" + slurp(m) + "\x1e" + slurp(r) + "\x1e" + slurp(e) + "\x1e" +
               slurp(g) + "\x1e" + slurp(p);
    };

    const std::string w1_a = pipeline("w1a", 1);
    const std::string w1_b = pipeline("w1b", 1);
    const std::string w8_a = pipeline("w8a", 8);
    const std::string w8_b = pipeline("w8b", 8);
    require(!w1_a.empty(), "pipeline produced no output");
    require(w1_a == w1_b, "workers=1 reruns differ");
    require(w8_a == w8_b, "workers=8 reruns differ");
    require(w1_a == w8_a, "workers=1 and workers=8 differ");
    fs::remove_all(dir);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void()> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "score decomposition identity (1e-12, 1000 pairs)", criterion_1},
        {2, "z-score statistics (1000 random candidate sets)", criterion_2},
        {3, "alpha-zero degeneracy and zero-drift invariance", criterion_3},
        {4, "beam/oracle equivalence (C=4, L=2, 50 seeds)", criterion_4},
        {5, "recall/ndcg hand table and Recall@1 == NDCG@1", criterion_5},
        {6, "SDI rises and AEI dilutes under thinking (100 episodes)", criterion_6},
        {7, "drift-recovery experiment (500 episodes, alpha grid)", criterion_7},
        {8, "compression contract (10000 fuzzed chains)", criterion_8},
        {9, "wire protocol conformance (fixture round-trip, 400s)", criterion_9},
        {10, "PCA hand example and planted rank-2 recovery", criterion_10},
        {11, "byte-identical pipeline, workers 1 and 8", criterion_11},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            c.body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name
                  << " (" << ms << " ms)";
        if (!ok) std::cout << " -- " << detail;
        std::cout << std::endl;
        if (!ok) ++failures;
    }
    if (failures) {
        std::cout << failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all 11 criteria passed" << std::endl;
    return 0;
}
