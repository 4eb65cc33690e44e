#include "sidalign/fixture_server.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sidalign/errors.hpp"

namespace sidalign {

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
    nlohmann::json body;
    body["error"] = message;
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

bool is_string_array(const nlohmann::json& j) {
    if (!j.is_array()) return false;
    for (const auto& v : j)
        if (!v.is_string()) return false;
    return true;
}

}  // namespace

struct FixtureServer::Impl {
    nlohmann::json fixture;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    void install_routes() {
        const auto health = [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        };
        server.Post("/v1/health", health);
        server.Get("/v1/health", health);

        server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object())
                return reply_error(res, 400, "request body is not a JSON object");
            if (!body.contains("context_tokens") || !is_string_array(body["context_tokens"]))
                return reply_error(res, 400, "context_tokens must be an array of strings");
            if (!body.contains("candidates") || !body["candidates"].is_array() ||
                body["candidates"].empty())
                return reply_error(res, 400, "candidates must be a non-empty array");
            for (const auto& cand : body["candidates"])
                if (!is_string_array(cand) || cand.empty())
                    return reply_error(res, 400,
                                       "each candidate must be a non-empty array of strings");

            if (fixture.contains("score_cases")) {
                for (const auto& c : fixture["score_cases"]) {
                    if (c["context_tokens"] == body["context_tokens"] &&
                        c["candidates"] == body["candidates"]) {
                        nlohmann::json reply;
                        reply["logprobs"] = c["logprobs"];
                        res.set_content(reply.dump(), "application/json");
                        return;
                    }
                }
            }
            if (fixture.contains("default_logprob")) {
                nlohmann::json reply;
                reply["logprobs"] = nlohmann::json::array();
                for (std::size_t i = 0; i < body["candidates"].size(); ++i)
                    reply["logprobs"].push_back(fixture["default_logprob"]);
                res.set_content(reply.dump(), "application/json");
                return;
            }
            reply_error(res, 400, "no fixture case matches this request");
        });

        server.Post("/v1/compress", [this](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object())
                return reply_error(res, 400, "request body is not a JSON object");
            if (!body.contains("system") || !body["system"].is_string())
                return reply_error(res, 400, "system must be a string");
            if (!body.contains("cot") || !body["cot"].is_string())
                return reply_error(res, 400, "cot must be a string");
            if (!fixture.contains("compress_reply"))
                return reply_error(res, 400, "fixture has no compress_reply");
            nlohmann::json reply;
            reply["summary"] = fixture["compress_reply"];
            res.set_content(reply.dump(), "application/json");
        });
    }
};

FixtureServer::FixtureServer(const std::string& fixture_json) : impl_(std::make_unique<Impl>()) {
    impl_->fixture = nlohmann::json::parse(fixture_json, nullptr, false);
    if (impl_->fixture.is_discarded() || !impl_->fixture.is_object())
        throw InvalidConfig("fixture is not a JSON object");
    if (impl_->fixture.contains("score_cases")) {
        for (const auto& c : impl_->fixture["score_cases"]) {
            if (!c.contains("context_tokens") || !c.contains("candidates") ||
                !c.contains("logprobs"))
                throw InvalidConfig("score case needs context_tokens, candidates and logprobs");
            if (c["logprobs"].size() != c["candidates"].size())
                throw InvalidConfig("score case logprobs/candidates cardinality mismatch");
        }
    }
    impl_->install_routes();
}

FixtureServer::~FixtureServer() {
    stop();
}

FixtureServer FixtureServer::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open fixture: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return FixtureServer(buf.str());
}

void FixtureServer::start(int port) {
    if (impl_->thread.joinable()) throw InvalidConfig("server already running");
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port <= 0) throw BackendUnavailable("cannot bind mock server port");
        impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    } else {
        impl_->port = port;
        impl_->thread = std::thread([this, port] { impl_->server.listen("127.0.0.1", port); });
    }
    impl_->server.wait_until_ready();
}

void FixtureServer::stop() {
    if (!impl_) return;
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int FixtureServer::port() const {
    return impl_->port;
}

std::string FixtureServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace sidalign
