#pragma once

// Live chat-completion and embedding clients (OpenAI-compatible wire
// shapes). Unit tests never touch these; the optional live smoke test is
// gated by environment configuration.
//
// Environment: MODEL_ENDPOINT, MODEL_API_KEY, MODEL_NAME for completions;
// EMBED_ENDPOINT, EMBED_MODEL for embeddings. Endpoints are base URLs, the
// standard paths (/v1/chat/completions, /v1/embeddings) are appended.

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sqlscout/embedding.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/gateway.hpp"

namespace sqlscout {

namespace detail {

inline std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

inline nlohmann::json http_post_json(const std::string& endpoint, const std::string& path,
                                     const nlohmann::json& body, const std::string& api_key,
                                     int timeout_ms) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw BackendError("request to " + endpoint + path + " failed: " +
                               httplib::to_string(res.error()),
                           /*retriable=*/true);
    if (res->status >= 500)
        throw BackendError("server error " + std::to_string(res->status) + " from " + endpoint,
                           /*retriable=*/true);
    if (res->status != 200)
        throw BackendError("status " + std::to_string(res->status) + " from " + endpoint +
                               ": " + res->body,
                           /*retriable=*/false);
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError(std::string("unparseable response body: ") + e.what(),
                           /*retriable=*/false);
    }
}

}  // namespace detail

class HttpBackend final : public PolicyBackend {
public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty())
            throw BackendError("no endpoint configured (MODEL_ENDPOINT unset)", false);
    }

    std::string complete(const PolicyRequest& request) override {
        nlohmann::json body{
            {"model", config_.model},
            {"temperature", request.temperature},
            {"messages",
             nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                                    {{"role", "user"}, {"content", request.user}}})}};
        auto j = detail::http_post_json(config_.endpoint, "/v1/chat/completions", body,
                                        detail::env_or_empty(config_.api_key_env.c_str()),
                                        config_.timeout_ms);
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected completion shape: ") + e.what(), false);
        }
    }

    std::string name() const override { return "live:" + config_.model; }

private:
    BackendConfig config_;
};

class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(std::string endpoint, std::string model, int dimension, int timeout_ms = 30000)
        : endpoint_(std::move(endpoint)),
          model_(std::move(model)),
          dim_(dimension),
          timeout_ms_(timeout_ms) {
        if (endpoint_.empty())
            throw EmbedderError("no embedding endpoint configured (EMBED_ENDPOINT unset)",
                                false);
    }

    int dimension() const override { return dim_; }

    std::vector<double> embed(std::string_view text) override {
        nlohmann::json body{{"model", model_}, {"input", std::string(text)}};
        nlohmann::json j;
        try {
            j = detail::http_post_json(endpoint_, "/v1/embeddings", body,
                                       detail::env_or_empty("MODEL_API_KEY"), timeout_ms_);
        } catch (const BackendError& e) {
            throw EmbedderError(e.what(), e.retriable);
        }
        try {
            auto v = j.at("data").at(0).at("embedding").get<std::vector<double>>();
            if (static_cast<int>(v.size()) != dim_)
                throw EmbedderError("embedding dimension " + std::to_string(v.size()) +
                                        " != configured " + std::to_string(dim_),
                                    false);
            return v;
        } catch (const nlohmann::json::exception& e) {
            throw EmbedderError(std::string("unexpected embedding shape: ") + e.what(), false);
        }
    }

private:
    std::string endpoint_;
    std::string model_;
    int dim_;
    int timeout_ms_;
};

}  // namespace sqlscout
