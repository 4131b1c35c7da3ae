#pragma once

// Uniform policy interface: a live chat-completion client, a deterministic
// scripted backend for tests and offline runs, and the call-counting
// gateway both sit behind.
//
// Script file: JSON array of {"kind": "...", "response": "..."} records,
// consumed strictly in order. A request whose kind differs from the next
// record is a script error, as is exhaustion.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/actions.hpp"
#include "sqlscout/errors.hpp"

namespace sqlscout {

enum class RequestKind {
    ActionSelection,
    SqlCompletion,
    NlDescription,
    KeywordExtraction,
    ContextExpansion,
    FidelityJudgment,
};

inline const char* to_string(RequestKind k) {
    switch (k) {
        case RequestKind::ActionSelection: return "ActionSelection";
        case RequestKind::SqlCompletion: return "SqlCompletion";
        case RequestKind::NlDescription: return "NlDescription";
        case RequestKind::KeywordExtraction: return "KeywordExtraction";
        case RequestKind::ContextExpansion: return "ContextExpansion";
        case RequestKind::FidelityJudgment: return "FidelityJudgment";
    }
    return "?";
}

inline std::optional<RequestKind> request_kind_from_string(std::string_view s) {
    if (s == "ActionSelection") return RequestKind::ActionSelection;
    if (s == "SqlCompletion") return RequestKind::SqlCompletion;
    if (s == "NlDescription") return RequestKind::NlDescription;
    if (s == "KeywordExtraction") return RequestKind::KeywordExtraction;
    if (s == "ContextExpansion") return RequestKind::ContextExpansion;
    if (s == "FidelityJudgment") return RequestKind::FidelityJudgment;
    return std::nullopt;
}

struct PolicyRequest {
    RequestKind kind = RequestKind::ActionSelection;
    std::string system;
    std::string user;
    double temperature = 0.7;
};

class PolicyBackend {
public:
    virtual ~PolicyBackend() = default;
    virtual std::string complete(const PolicyRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct ScriptRecord {
    RequestKind kind;
    std::string response;
};

// Pure: the same script and request sequence always produce the same
// responses. Temperature is ignored. The cursor is mutex-guarded so
// concurrent callers serialize.
class ScriptedBackend final : public PolicyBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptRecord> records)
        : records_(std::move(records)) {}

    static std::shared_ptr<ScriptedBackend> from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ScriptError("cannot open script file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ScriptError("malformed script file " + path + ": " + e.what());
        }
        if (!j.is_array()) throw ScriptError("script file must be a JSON array: " + path);
        std::vector<ScriptRecord> records;
        for (const auto& r : j) {
            if (!r.contains("kind") || !r.contains("response"))
                throw ScriptError("script record needs kind and response: " + path);
            auto kind = request_kind_from_string(r["kind"].get<std::string>());
            if (!kind)
                throw ScriptError("unknown request kind \"" + r["kind"].get<std::string>() +
                                  "\" in " + path);
            records.push_back(ScriptRecord{*kind, r["response"].get<std::string>()});
        }
        return std::make_shared<ScriptedBackend>(std::move(records));
    }

    std::string complete(const PolicyRequest& request) override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (cursor_ >= records_.size())
            throw ScriptError(std::string("script exhausted: no response left for ") +
                              to_string(request.kind));
        const ScriptRecord& rec = records_[cursor_];
        if (rec.kind != request.kind)
            throw ScriptError("script kind mismatch at record " + std::to_string(cursor_) +
                              ": script has " + to_string(rec.kind) + ", request is " +
                              to_string(request.kind));
        ++cursor_;
        return rec.response;
    }

    std::string name() const override { return "scripted"; }
    std::size_t records_remaining() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return records_.size() - cursor_;
    }

private:
    std::vector<ScriptRecord> records_;
    std::size_t cursor_ = 0;
    mutable std::mutex mutex_;
};

struct BackendConfig {
    std::string endpoint;                      // http(s)://host[:port]
    std::string model;
    std::string api_key_env = "MODEL_API_KEY"; // env var holding the key
    int timeout_ms = 30000;
    int retry_budget = 2;
    double temperature = 0.7;

    static BackendConfig from_env() {
        BackendConfig c;
        if (const char* e = std::getenv("MODEL_ENDPOINT")) c.endpoint = e;
        if (const char* m = std::getenv("MODEL_NAME")) c.model = m;
        return c;
    }
};

// Calls are counted per attempt; retriable backend failures are retried up
// to the configured budget.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<PolicyBackend> backend, int retry_budget = 0)
        : backend_(std::move(backend)), retry_budget_(retry_budget) {}

    std::string complete(const PolicyRequest& request) {
        int attempts = 0;
        while (true) {
            ++attempts;
            calls_.fetch_add(1);
            try {
                return backend_->complete(request);
            } catch (const BackendError& e) {
                if (!e.retriable || attempts > retry_budget_) throw;
            }
        }
    }

    int llm_call_count() const { return calls_.load(); }
    PolicyBackend& backend() { return *backend_; }

private:
    std::shared_ptr<PolicyBackend> backend_;
    int retry_budget_;
    std::atomic<int> calls_{0};
};

// Maps the response line onto the legal set. The chosen action must match
// one legal skeleton structurally; free parameters come from the response.
inline Action parse_action_response(const std::string& text,
                                    const std::vector<Action>& legal) {
    if (legal.empty()) throw PolicyFault("no legal actions to match against");
    // first non-empty line
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        break;
    }
    Action parsed = parse_action_line(line);
    for (const Action& l : legal) {
        if (actions_match(l, parsed)) {
            Action chosen = l;  // canonical structural parts from the legal set
            chosen.sketch = parsed.sketch;
            if (!parsed.function.empty()) chosen.function = parsed.function;
            if (!parsed.direction.empty()) chosen.direction = parsed.direction;
            return chosen;
        }
    }
    throw PolicyFault("action not in the legal set: \"" + render_action(parsed) + "\"");
}

}  // namespace sqlscout
