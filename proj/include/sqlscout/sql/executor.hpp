#pragma once

// Bounded, read-only execution against the embedded engine plus result
// classification and comparison.
//
// Connection locators:
//   ":memory:"      empty in-memory database
//   "<path>.sql"    fixture script: executed into a fresh in-memory database
//   "<path>"        existing database file, opened read-only
// Every connection is forced read-only (query_only) once opened/built.

#include <sqlite3.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sqlscout/errors.hpp"
#include "sqlscout/sql/lexer.hpp"

namespace sqlscout::sql {

using Blob = std::vector<std::uint8_t>;
using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

struct ExecutionResult {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
    bool truncated = false;
    int row_limit = 0;
};

enum class ResultClass { Error, Empty, Trivial, NonTrivial };

inline const char* to_string(ResultClass c) {
    switch (c) {
        case ResultClass::Error: return "Error";
        case ResultClass::Empty: return "Empty";
        case ResultClass::Trivial: return "Trivial";
        case ResultClass::NonTrivial: return "NonTrivial";
    }
    return "?";
}

class Connection {
public:
    Connection() = default;

    static Connection open(const std::string& locator) {
        Connection c;
        c.locator_ = locator;
        if (locator == ":memory:") {
            c.open_memory();
        } else if (locator.size() > 4 && locator.ends_with(".sql")) {
            std::ifstream in(locator, std::ios::binary);
            if (!in) throw SqlError("cannot open fixture script: " + locator);
            std::ostringstream buf;
            buf << in.rdbuf();
            c.open_memory();
            c.run_script(buf.str());
        } else {
            sqlite3* db = nullptr;
            int rc = sqlite3_open_v2(locator.c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
            if (rc != SQLITE_OK) {
                std::string msg = db ? sqlite3_errmsg(db) : "open failed";
                sqlite3_close(db);
                throw SqlError("cannot open database \"" + locator + "\": " + msg);
            }
            c.db_.reset(db);
        }
        c.lock_read_only();
        return c;
    }

    // Builds an in-memory database and leaves it writable; used by fixture
    // builders and tests. lock_read_only() seals it.
    static Connection open_writable_memory() {
        Connection c;
        c.locator_ = ":memory:";
        c.open_memory();
        return c;
    }

    void run_script(const std::string& script) {
        char* err = nullptr;
        int rc = sqlite3_exec(handle(), script.c_str(), nullptr, nullptr, &err);
        if (rc != SQLITE_OK) {
            std::string msg = err ? err : "script failed";
            sqlite3_free(err);
            throw SqlError("fixture script error: " + msg);
        }
    }

    void lock_read_only() {
        char* err = nullptr;
        if (sqlite3_exec(handle(), "PRAGMA query_only = ON;", nullptr, nullptr, &err) !=
            SQLITE_OK) {
            std::string msg = err ? err : "";
            sqlite3_free(err);
            throw SqlError("cannot enforce read-only mode: " + msg);
        }
    }

    sqlite3* handle() const {
        if (!db_) throw SqlError("connection not open");
        return db_.get();
    }

    const std::string& locator() const { return locator_; }

private:
    void open_memory() {
        sqlite3* db = nullptr;
        if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
            sqlite3_close(db);
            throw SqlError("cannot open in-memory database");
        }
        db_.reset(db);
    }

    struct Closer {
        void operator()(sqlite3* db) const {
            if (db) sqlite3_close(db);
        }
    };
    std::unique_ptr<sqlite3, Closer> db_;
    std::string locator_;
};

namespace detail {

struct StmtCloser {
    void operator()(sqlite3_stmt* s) const {
        if (s) sqlite3_finalize(s);
    }
};
using StmtPtr = std::unique_ptr<sqlite3_stmt, StmtCloser>;

inline Value column_value(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return std::monostate{};
        case SQLITE_INTEGER:
            return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return sqlite3_column_double(stmt, col);
        case SQLITE_TEXT: {
            const auto* p = sqlite3_column_text(stmt, col);
            int len = sqlite3_column_bytes(stmt, col);
            return std::string(reinterpret_cast<const char*>(p), static_cast<size_t>(len));
        }
        case SQLITE_BLOB: {
            const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt, col));
            int len = sqlite3_column_bytes(stmt, col);
            return Blob(p, p + len);
        }
    }
    return std::monostate{};
}

}  // namespace detail

// One executor per database locator; each call counts toward db_call_count
// whether or not it succeeds. Calls are serialized on an internal mutex so
// concurrent sessions can share an executor.
class Executor {
public:
    explicit Executor(const std::string& locator)
        : conn_(Connection::open(locator)), locator_(locator) {}

    // Wraps an already-built connection (fixture databases assembled in tests).
    explicit Executor(Connection conn)
        : conn_(std::move(conn)), locator_(conn_.locator()) {}

    ExecutionResult execute(const std::string& sql, int row_limit,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(0)) {
        std::lock_guard<std::mutex> lock(mutex_);
        ++db_calls_;
        sqlite3* db = conn_.handle();

        struct Deadline {
            std::chrono::steady_clock::time_point at;
            bool armed = false;
        } deadline;
        if (timeout.count() > 0) {
            deadline.at = std::chrono::steady_clock::now() + timeout;
            deadline.armed = true;
            sqlite3_progress_handler(
                db, 64,
                [](void* ctx) -> int {
                    auto* d = static_cast<Deadline*>(ctx);
                    return std::chrono::steady_clock::now() >= d->at ? 1 : 0;
                },
                &deadline);
        }
        struct HandlerReset {
            sqlite3* db;
            ~HandlerReset() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
        } reset{db};

        sqlite3_stmt* raw = nullptr;
        const char* tail = nullptr;
        int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &raw, &tail);
        detail::StmtPtr stmt(raw);
        if (rc != SQLITE_OK)
            throw SqlError(std::string("execution error: ") + sqlite3_errmsg(db));
        if (!stmt) throw SqlError("execution error: empty statement");
        if (tail) {
            for (const char* p = tail; *p; ++p) {
                if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';')
                    throw SqlError("execution error: multiple statements");
            }
        }

        ExecutionResult out;
        out.row_limit = row_limit;
        int ncol = sqlite3_column_count(stmt.get());
        for (int i = 0; i < ncol; ++i) {
            const char* name = sqlite3_column_name(stmt.get(), i);
            out.columns.push_back(name ? name : "");
        }
        while (true) {
            rc = sqlite3_step(stmt.get());
            if (rc == SQLITE_ROW) {
                if (row_limit > 0 && static_cast<int>(out.rows.size()) >= row_limit) {
                    out.truncated = true;
                    break;
                }
                std::vector<Value> row;
                row.reserve(ncol);
                for (int i = 0; i < ncol; ++i)
                    row.push_back(detail::column_value(stmt.get(), i));
                out.rows.push_back(std::move(row));
            } else if (rc == SQLITE_DONE) {
                break;
            } else {
                if (deadline.armed && std::chrono::steady_clock::now() >= deadline.at)
                    throw SqlError("timeout");
                throw SqlError(std::string("execution error: ") + sqlite3_errmsg(db));
            }
        }
        return out;
    }

    int db_call_count() const { return db_calls_.load(); }
    const std::string& locator() const { return locator_; }
    Connection& connection() { return conn_; }

private:
    Connection conn_;
    std::string locator_;
    std::mutex mutex_;
    std::atomic<int> db_calls_{0};
};

// --- classification -------------------------------------------------------

namespace detail {

// Matches "SELECT COUNT(<*|column>) [alias] FROM <table> [alias] [;]" with
// nothing else: the unfiltered bare-count shape whose 0 result says nothing.
inline bool is_bare_unfiltered_count(std::string_view sqltext) {
    std::vector<Token> t;
    try {
        t = tokenize(sqltext);
    } catch (const LexIssue&) {
        return false;
    }
    std::size_t i = 0;
    auto ident = [&](std::size_t k) { return t[k].kind == TokenKind::Identifier; };
    if (!t[i].is_kw("SELECT")) return false;
    ++i;
    if (!t[i].is_kw("COUNT")) return false;
    ++i;
    if (!t[i].is_punct("(")) return false;
    ++i;
    if (t[i].is_punct("*")) {
        ++i;
    } else if (ident(i)) {
        ++i;
        while (t[i].is_punct(".") && ident(i + 1)) i += 2;
    } else {
        return false;
    }
    if (!t[i].is_punct(")")) return false;
    ++i;
    if (t[i].is_kw("AS") && ident(i + 1)) i += 2;
    else if (ident(i) && !t[i].is_kw("FROM")) ++i;
    if (!t[i].is_kw("FROM")) return false;
    ++i;
    if (!ident(i)) return false;
    ++i;
    while (t[i].is_punct(".") && ident(i + 1)) i += 2;
    if (t[i].is_kw("AS") && ident(i + 1)) i += 2;
    else if (ident(i)) ++i;
    if (t[i].is_punct(";")) ++i;
    return t[i].kind == TokenKind::End;
}

}  // namespace detail

// Empty: zero rows. Trivial: rows exist but carry no information — every
// cell NULL, or a bare unfiltered COUNT that returned 0. Anything else is
// NonTrivial. Total and pure.
inline ResultClass classify(const ExecutionResult& result, std::string_view sqltext = {}) {
    if (result.rows.empty()) return ResultClass::Empty;
    bool all_null = true;
    for (const auto& row : result.rows) {
        for (const auto& v : row) {
            if (!std::holds_alternative<std::monostate>(v)) {
                all_null = false;
                break;
            }
        }
        if (!all_null) break;
    }
    if (all_null) return ResultClass::Trivial;
    if (result.rows.size() == 1 && result.rows[0].size() == 1 && !sqltext.empty()) {
        const Value& v = result.rows[0][0];
        bool zero = (std::holds_alternative<std::int64_t>(v) && std::get<std::int64_t>(v) == 0) ||
                    (std::holds_alternative<double>(v) && std::get<double>(v) == 0.0);
        if (zero && detail::is_bare_unfiltered_count(sqltext)) return ResultClass::Trivial;
    }
    return ResultClass::NonTrivial;
}

// --- comparison ------------------------------------------------------------

inline constexpr double kFloatRelTolerance = 1e-6;

namespace detail {

inline bool numeric(const Value& v) {
    return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

inline double as_double(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v))
        return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
}

inline bool values_equal(const Value& a, const Value& b) {
    if (std::holds_alternative<std::monostate>(a) || std::holds_alternative<std::monostate>(b))
        return std::holds_alternative<std::monostate>(a) &&
               std::holds_alternative<std::monostate>(b);  // NULL == NULL
    if (numeric(a) && numeric(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
            return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
        double x = as_double(a), y = as_double(b);
        double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
        return std::fabs(x - y) <= kFloatRelTolerance * scale;
    }
    if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b))
        return std::get<std::string>(a) == std::get<std::string>(b);
    if (std::holds_alternative<Blob>(a) && std::holds_alternative<Blob>(b))
        return std::get<Blob>(a) == std::get<Blob>(b);
    return false;
}

inline int type_rank(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return 0;
    if (numeric(v)) return 1;
    if (std::holds_alternative<std::string>(v)) return 2;
    return 3;
}

// total order used to canonicalize row multisets before comparison
inline bool value_less(const Value& a, const Value& b) {
    int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return ra < rb;
    switch (ra) {
        case 0:
            return false;
        case 1: {
            double x = as_double(a), y = as_double(b);
            if (x != y) return x < y;
            return std::holds_alternative<std::int64_t>(a) &&
                   std::holds_alternative<double>(b);
        }
        case 2:
            return std::get<std::string>(a) < std::get<std::string>(b);
        default:
            return std::get<Blob>(a) < std::get<Blob>(b);
    }
}

inline bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (value_less(a[i], b[i])) return true;
        if (value_less(b[i], a[i])) return false;
    }
    return a.size() < b.size();
}

}  // namespace detail

// Column names are ignored; only shape and values matter. With
// order_sensitive=false rows are compared as multisets.
inline bool results_equal(const ExecutionResult& a, const ExecutionResult& b,
                          bool order_sensitive) {
    if (a.columns.size() != b.columns.size()) return false;
    if (a.rows.size() != b.rows.size()) return false;
    auto rows_match = [&](const std::vector<std::vector<Value>>& xs,
                          const std::vector<std::vector<Value>>& ys) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i].size() != ys[i].size()) return false;
            for (std::size_t j = 0; j < xs[i].size(); ++j)
                if (!detail::values_equal(xs[i][j], ys[i][j])) return false;
        }
        return true;
    };
    if (order_sensitive) return rows_match(a.rows, b.rows);
    auto sa = a.rows;
    auto sb = b.rows;
    std::sort(sa.begin(), sa.end(), detail::row_less);
    std::sort(sb.begin(), sb.end(), detail::row_less);
    return rows_match(sa, sb);
}

inline std::string value_to_display(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return "NULL";
    if (std::holds_alternative<std::int64_t>(v))
        return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) {
        std::ostringstream os;
        os << std::get<double>(v);
        return os.str();
    }
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return "<blob:" + std::to_string(std::get<Blob>(v).size()) + "B>";
}

// Plain-text preview bounded by rows and characters, for fidelity prompts.
inline std::string render_result_preview(const ExecutionResult& r, int max_rows,
                                         std::size_t max_chars) {
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (i) out += " | ";
        out += r.columns[i];
    }
    out += "\n";
    int shown = 0;
    for (const auto& row : r.rows) {
        if (shown >= max_rows) break;
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += " | ";
            line += value_to_display(row[i]);
        }
        out += line + "\n";
        ++shown;
        if (out.size() >= max_chars) break;
    }
    if (out.size() > max_chars) {
        out.resize(max_chars);
        out += "\n...";
    }
    if (static_cast<std::size_t>(shown) < r.rows.size() || r.truncated)
        out += "(" + std::to_string(r.rows.size()) + " rows fetched" +
               (r.truncated ? ", truncated" : "") + ")\n";
    return out;
}

}  // namespace sqlscout::sql
