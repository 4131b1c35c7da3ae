#pragma once

#include <stdexcept>
#include <string>

namespace sqlscout {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad catalog source: unreachable, malformed file, empty table.
struct CatalogError : Error {
    using Error::Error;
};

// Structural violations while building or mutating a schema graph.
struct GraphError : Error {
    using Error::Error;
};

// Version mismatch or corrupted payload on load.
struct SerializationError : Error {
    using Error::Error;
};

// Runtime failure from the embedded SQL engine (missing table, type error, timeout).
struct SqlError : Error {
    using Error::Error;
};

// Policy returned something unparseable or illegal.
struct PolicyFault : Error {
    using Error::Error;
};

// Scripted backend ran out of records or hit a kind mismatch.
struct ScriptError : Error {
    using Error::Error;
};

// Live backend failure; retriable ones are retried up to the configured budget.
struct BackendError : Error {
    explicit BackendError(const std::string& what, bool retriable = false)
        : Error(what), retriable(retriable) {}
    bool retriable;
};

struct EmbedderError : Error {
    explicit EmbedderError(const std::string& what, bool retriable = true)
        : Error(what), retriable(retriable) {}
    bool retriable;
};

}  // namespace sqlscout
