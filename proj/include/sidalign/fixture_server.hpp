#pragma once

#include <memory>
#include <string>

namespace sidalign {

// Serves the log-probability and compression wire protocol from a fixture
// document. Fixture schema:
//   {
//     "score_cases": [{"context_tokens": [...], "candidates": [[...], ...],
//                      "logprobs": [...]}, ...],
//     "default_logprob": -2.5,            // optional fallback per candidate
//     "compress_reply": "..."             // optional /v1/compress payload
//   }
// Malformed requests get HTTP 400 with {"error": "..."}.
class FixtureServer {
  public:
    explicit FixtureServer(const std::string& fixture_json);
    ~FixtureServer();

    static FixtureServer from_file(const std::string& path);

    // Binds 127.0.0.1 on the given port (0 picks an ephemeral one) and serves
    // on a background thread until stop() or destruction.
    void start(int port = 0);
    void stop();

    int port() const;
    std::string base_url() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sidalign
