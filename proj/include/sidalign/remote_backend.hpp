#pragma once

#include <memory>
#include <string>

#include "sidalign/backend.hpp"

namespace sidalign {

struct RemoteBackendConfig {
    std::string base_url;     // e.g. http://127.0.0.1:8080
    int max_concurrency = 4;  // bound on in-flight requests
    int timeout_seconds = 30;

    void validate() const;  // throws InvalidConfig
};

// Client for the log-probability wire protocol:
//   POST /v1/score  {"context_tokens": [string], "candidates": [[string]]}
//     -> {"logprobs": [number]}
//   POST /v1/health -> {"status": "ok"}
// Requests are isolated per call; a counting semaphore enforces the
// concurrency bound. No attention or full-distribution support.
class RemoteBackend final : public ScoringBackend {
  public:
    explicit RemoteBackend(RemoteBackendConfig config);
    ~RemoteBackend() override;

    BackendCapabilities capabilities() const override;
    std::vector<double> score_candidates(const TokenSeq& context,
                                         const std::vector<SemanticId>& candidates) const override;
    std::vector<TokenProb> next_token_dist(const TokenSeq& context) const override;
    AttentionProfile attention_profile(const TokenSeq& context) const override;

    // True iff /v1/health answers {"status": "ok"}.
    bool healthy() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sidalign
