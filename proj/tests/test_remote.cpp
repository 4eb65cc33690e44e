#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sidalign/align.hpp"
#include "sidalign/compress.hpp"
#include "sidalign/dataset.hpp"
#include "sidalign/errors.hpp"
#include "sidalign/fixture_server.hpp"
#include "sidalign/remote_backend.hpp"

using namespace sidalign;

namespace {

std::string fixture_path() {
    return std::string(SIDALIGN_SOURCE_DIR) + "/fixtures/score_basic.json";
}

nlohmann::json load_fixture() {
    std::ifstream in(fixture_path());
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return nlohmann::json::parse(buf.str());
}

}  // namespace

TEST_SUITE("remote") {

TEST_CASE("bundled fixture round-trips bit-exactly") {
    auto server = FixtureServer::from_file(fixture_path());
    server.start();

    RemoteBackendConfig cfg;
    cfg.base_url = server.base_url();
    const RemoteBackend backend(cfg);
    CHECK(backend.healthy());

    const nlohmann::json fixture = load_fixture();
    for (const auto& c : fixture["score_cases"]) {
        TokenSeq context = c["context_tokens"].get<TokenSeq>();
        std::vector<SemanticId> candidates;
        for (const auto& cand : c["candidates"]) {
            SemanticId sid;
            for (const auto& tok : cand) {
                const auto lc = parse_sid_token(tok.get<std::string>());
                REQUIRE(lc.has_value());
                sid.codes.push_back(lc->second);
            }
            candidates.push_back(std::move(sid));
        }
        const std::vector<double> expected = c["logprobs"].get<std::vector<double>>();
        const std::vector<double> got = backend.score_candidates(context, candidates);
        CHECK(got == expected);  // bit-exact
    }
}

TEST_CASE("capabilities and unsupported operations") {
    auto server = FixtureServer::from_file(fixture_path());
    server.start();
    RemoteBackendConfig cfg;
    cfg.base_url = server.base_url();
    const RemoteBackend backend(cfg);

    CHECK_FALSE(backend.capabilities().supports_attention);
    CHECK_FALSE(backend.capabilities().supports_full_distribution);
    CHECK_THROWS_AS(backend.next_token_dist({std::string(kSidBegin)}), UnsupportedCapability);
    CHECK_THROWS_AS(backend.attention_profile({std::string(kSidBegin)}), UnsupportedCapability);
}

TEST_CASE("client-side contract checks") {
    RemoteBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    const RemoteBackend backend(cfg);
    CHECK_THROWS_AS(backend.score_candidates({"w0"}, {SemanticId({0, 0})}), ContextNotSidReady);
    CHECK_THROWS_AS(backend.score_candidates({std::string(kSidBegin)}, {}), EmptyCandidates);
}

TEST_CASE("unreachable servers raise BackendUnavailable") {
    RemoteBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    const RemoteBackend backend(cfg);
    CHECK_THROWS_AS(backend.score_candidates({std::string(kSidBegin)}, {SemanticId({0, 0})}),
                    BackendUnavailable);
    CHECK_FALSE(backend.healthy());
}

TEST_CASE("malformed requests get HTTP 400 with a structured error") {
    auto server = FixtureServer::from_file(fixture_path());
    server.start();
    httplib::Client client(server.base_url());

    auto expect_400 = [&](const std::string& body) {
        auto res = client.Post("/v1/score", body, "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        const nlohmann::json err = nlohmann::json::parse(res->body, nullptr, false);
        REQUIRE_FALSE(err.is_discarded());
        CHECK(err.contains("error"));
        CHECK(err["error"].is_string());
    };

    expect_400("not json at all");
    expect_400(R"({"candidates": [["<s_0_0>"]]})");                           // no context
    expect_400(R"({"context_tokens": "oops", "candidates": [["<s_0_0>"]]})");  // wrong type
    expect_400(R"({"context_tokens": [], "candidates": []})");                // empty candidates
    expect_400(R"({"context_tokens": [], "candidates": [[]]})");              // empty candidate
    expect_400(R"({"context_tokens": [7], "candidates": [["<s_0_0>"]]})");    // non-string token
}

TEST_CASE("unmatched requests fall back to the default logprob") {
    FixtureServer server(R"({"default_logprob": -2.5})");
    server.start();
    RemoteBackendConfig cfg;
    cfg.base_url = server.base_url();
    const RemoteBackend backend(cfg);
    const auto scores = backend.score_candidates(
        {std::string(kHistBegin), "<s_0_1>", std::string(kHistEnd), std::string(kSidBegin)},
        {SemanticId({0}), SemanticId({1}), SemanticId({2})});
    CHECK(scores == std::vector<double>{-2.5, -2.5, -2.5});
}

TEST_CASE("unmatched requests without a default are a 400") {
    FixtureServer server("{}");
    server.start();
    RemoteBackendConfig cfg;
    cfg.base_url = server.base_url();
    const RemoteBackend backend(cfg);
    CHECK_THROWS_AS(
        backend.score_candidates({std::string(kSidBegin)}, {SemanticId({0})}),
        BackendUnavailable);
}

TEST_CASE("fixture validation rejects inconsistent cases") {
    CHECK_THROWS_AS(
        FixtureServer(R"({"score_cases": [{"context_tokens": [], "candidates": [["<s_0_0>"]],
                          "logprobs": [-1.0, -2.0]}]})"),
        InvalidConfig);
    CHECK_THROWS_AS(FixtureServer("[]"), InvalidConfig);
}

TEST_CASE("full contrastive rerank over the wire with explicit candidates") {
    // Remote backends cannot beam-search (no full distributions), so the
    // candidate pool comes from the episode record; every context is scored
    // through /v1/score.
    EpisodeRecord ep;
    ep.user = "wire";
    ep.history = {SemanticId({2, 1})};
    ep.cot = "the user likes jazz";
    const std::vector<SemanticId> cands{SemanticId({0, 0}), SemanticId({1, 2}),
                                        SemanticId({3, 3})};
    ep.candidates = cands;
    ep.target = cands[1];

    const CompressorConfig ccfg = CompressorConfig::defaults();
    const CompressFn compressor = [&ccfg](const std::string& cot) {
        return compress_rule_based(cot, ccfg);
    };
    const TokenSeq compressed = split_whitespace(compressor(ep.cot));
    const TokenSeq expert_ctx = build_context(ContextKind::Expert, ep.history, {}, compressed, 2, 4);
    const TokenSeq amateur_ctx =
        build_context(ContextKind::Amateur, {}, split_whitespace(ep.cot), {}, 2, 4);
    const TokenSeq baseline_ctx = build_context(ContextKind::Baseline, ep.history, {}, {}, 2, 4);

    auto case_for = [&cands](const TokenSeq& ctx, std::vector<double> logprobs) {
        nlohmann::json c;
        c["context_tokens"] = ctx;
        nlohmann::json cjs = nlohmann::json::array();
        for (const auto& sid : cands) {
            nlohmann::json toks = nlohmann::json::array();
            for (std::size_t l = 0; l < sid.codes.size(); ++l)
                toks.push_back(sid_token(static_cast<int>(l), sid.codes[l]));
            cjs.push_back(std::move(toks));
        }
        c["candidates"] = std::move(cjs);
        c["logprobs"] = std::move(logprobs);
        return c;
    };
    // Candidate 0 narrowly wins the expert context only because the chain
    // pushes it; the history-only context prefers the target.
    nlohmann::json fixture;
    fixture["score_cases"] = nlohmann::json::array(
        {case_for(expert_ctx, {-0.5, -0.6, -3.0}),
         case_for(amateur_ctx, {-0.1, -2.0, -1.0}),
         case_for(baseline_ctx, {-2.0, -0.5, -1.5})});
    FixtureServer server(fixture.dump());
    server.start();

    RemoteBackendConfig rcfg;
    rcfg.base_url = server.base_url();
    const RemoteBackend backend(rcfg);

    AlignConfig plain;
    plain.alpha = 0.0;
    const auto uncorrected = rerank(backend, ep, plain, compressor, 2, 4);
    REQUIRE(uncorrected.size() == 3);
    CHECK(uncorrected[0].sid == SemanticId({0, 0}));  // rides the chain-induced drift

    AlignConfig acfg;
    acfg.alpha = 0.5;
    const auto ranking = rerank(backend, ep, acfg, compressor, 2, 4);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0].sid == ep.target);  // drift subtraction flips the order
    CHECK(ranking[0].z_e == -0.6);
    CHECK(ranking[0].z_a == -2.0);
    CHECK(ranking[0].z_b == -0.5);
    CHECK(ranking[1].sid == SemanticId({0, 0}));

    // Beam-based candidate generation stays a clean capability error.
    EpisodeRecord no_cands = ep;
    no_cands.candidates.reset();
    CHECK_THROWS_AS(rerank(backend, no_cands, acfg, compressor, 2, 4), UnsupportedCapability);
}

TEST_CASE("concurrent scoring respects the bound and stays correct") {
    FixtureServer server(R"({"default_logprob": -1.5})");
    server.start();
    RemoteBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.max_concurrency = 2;
    const RemoteBackend backend(cfg);

    std::vector<std::thread> threads;
    std::vector<int> failures(8, 1);
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&backend, &failures, t] {
            const auto scores = backend.score_candidates(
                {std::string(kSidBegin)}, {SemanticId({t % 4}), SemanticId({(t + 1) % 4})});
            if (scores == std::vector<double>{-1.5, -1.5}) failures[static_cast<std::size_t>(t)] = 0;
        });
    }
    for (auto& t : threads) t.join();
    for (int f : failures) CHECK(f == 0);
}

}  // TEST_SUITE
