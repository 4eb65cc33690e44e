#include "sidalign/remote_backend.hpp"

#include <cmath>
#include <semaphore>

#include <httplib.h>
#include <json.hpp>

#include "sidalign/errors.hpp"

namespace sidalign {

void RemoteBackendConfig::validate() const {
    if (base_url.empty()) throw InvalidConfig("remote base_url must be set");
    if (max_concurrency < 1) throw InvalidConfig("max_concurrency must be >= 1");
    if (timeout_seconds < 1) throw InvalidConfig("timeout_seconds must be >= 1");
}

struct RemoteBackend::Impl {
    explicit Impl(RemoteBackendConfig cfg)
        : config(std::move(cfg)), slots(config.max_concurrency) {}

    struct SlotGuard {
        explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
        ~SlotGuard() { sem.release(); }
        std::counting_semaphore<>& sem;
    };

    // One client per request keeps in-flight requests isolated.
    httplib::Result post(const std::string& path, const std::string& body) const {
        SlotGuard guard(slots);
        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
        return client.Post(path, body, "application/json");
    }

    RemoteBackendConfig config;
    mutable std::counting_semaphore<> slots;
};

RemoteBackend::RemoteBackend(RemoteBackendConfig config) {
    config.validate();
    impl_ = std::make_unique<Impl>(std::move(config));
}

RemoteBackend::~RemoteBackend() = default;

BackendCapabilities RemoteBackend::capabilities() const {
    return {.supports_attention = false, .supports_full_distribution = false};
}

std::vector<double> RemoteBackend::score_candidates(
    const TokenSeq& context, const std::vector<SemanticId>& candidates) const {
    if (context.empty() || context.back() != kSidBegin)
        throw ContextNotSidReady("context must end with " + std::string(kSidBegin));
    if (candidates.empty()) throw EmptyCandidates("candidate list is empty");

    nlohmann::json body;
    body["context_tokens"] = context;
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& sid : candidates) {
        nlohmann::json tokens = nlohmann::json::array();
        for (std::size_t level = 0; level < sid.codes.size(); ++level)
            tokens.push_back(sid_token(static_cast<int>(level), sid.codes[level]));
        cands.push_back(std::move(tokens));
    }
    body["candidates"] = std::move(cands);

    auto res = impl_->post("/v1/score", body.dump());
    if (!res)
        throw BackendUnavailable("score endpoint unreachable: " + impl_->config.base_url);
    if (res->status != 200) {
        std::string detail;
        nlohmann::json err = nlohmann::json::parse(res->body, nullptr, false);
        if (!err.is_discarded() && err.contains("error") && err["error"].is_string())
            detail = ": " + err["error"].get<std::string>();
        throw BackendUnavailable("score endpoint returned HTTP " + std::to_string(res->status) +
                                 detail);
    }

    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("logprobs") || !reply["logprobs"].is_array())
        throw BackendUnavailable("score reply carries no logprobs array");
    const auto& logprobs = reply["logprobs"];
    if (logprobs.size() != candidates.size())
        throw BackendUnavailable("score reply cardinality mismatch");

    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& v : logprobs) {
        if (!v.is_number()) throw BackendUnavailable("score reply carries a non-numeric entry");
        const double lp = v.get<double>();
        if (!std::isfinite(lp)) throw BackendUnavailable("score reply carries a non-finite value");
        out.push_back(lp);
    }
    return out;
}

std::vector<TokenProb> RemoteBackend::next_token_dist(const TokenSeq&) const {
    throw UnsupportedCapability("remote backend does not expose full distributions");
}

AttentionProfile RemoteBackend::attention_profile(const TokenSeq&) const {
    throw UnsupportedCapability("remote backend does not expose attention");
}

bool RemoteBackend::healthy() const {
    auto res = impl_->post("/v1/health", "{}");
    if (!res || res->status != 200) return false;
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    return !reply.is_discarded() && reply.value("status", "") == "ok";
}

}  // namespace sidalign
