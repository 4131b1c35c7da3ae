#pragma once

// Evaluation harness: execution accuracy over (question, gold SQL) tasks,
// token-count difficulty buckets, pass@K across repeated runs, and mean
// LLM/DB call counts.
//
// Task file: JSON array of {id, question, gold_sql, db}. Difficulty uses a
// fixed tokenizer: runs of [A-Za-z0-9_] are one token each, every other
// non-space character is one token. Buckets: Easy < 80, Medium 80-159,
// Hard >= 160.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/errors.hpp"
#include "sqlscout/sql/executor.hpp"
#include "sqlscout/sql/lexer.hpp"
#include "sqlscout/synthesis.hpp"

namespace sqlscout {

struct EvalTask {
    std::string id;
    std::string question;
    std::string gold_sql;
    std::string db;  // connection locator
};

enum class Difficulty { Easy, Medium, Hard };

inline const char* to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "Easy";
        case Difficulty::Medium: return "Medium";
        case Difficulty::Hard: return "Hard";
    }
    return "?";
}

inline int difficulty_token_count(std::string_view sqltext) {
    int count = 0;
    bool in_word = false;
    for (char c : sqltext) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || c == '_') {
            if (!in_word) {
                ++count;
                in_word = true;
            }
        } else {
            in_word = false;
            if (!std::isspace(uc)) ++count;  // each punctuation mark is one token
        }
    }
    return count;
}

inline Difficulty bucket_difficulty(const std::string& gold_sql) {
    if (gold_sql.empty()) throw Error("bucket_difficulty: empty gold sql");
    int n = difficulty_token_count(gold_sql);
    if (n < 80) return Difficulty::Easy;
    if (n < 160) return Difficulty::Medium;
    return Difficulty::Hard;
}

enum class TaskOutcome { Correct, Incorrect, Failed };

inline const char* to_string(TaskOutcome o) {
    switch (o) {
        case TaskOutcome::Correct: return "Correct";
        case TaskOutcome::Incorrect: return "Incorrect";
        case TaskOutcome::Failed: return "Failed";
    }
    return "?";
}

// Gold execution failures invalidate the task (thrown; run_eval excludes
// the task with a warning).
struct GoldExecutionError : Error {
    using Error::Error;
};

// Correct iff the predicted result matches gold under the order rule:
// order-sensitive exactly when the gold SQL has a top-level ORDER BY.
inline TaskOutcome score_task(const EvalTask& task, const SynthesisResult& synthesis,
                              sql::Executor& executor, int row_limit = 0) {
    sql::ExecutionResult gold;
    try {
        gold = executor.execute(task.gold_sql, row_limit);
    } catch (const SqlError& e) {
        throw GoldExecutionError("task " + task.id + ": gold SQL failed: " + e.what());
    }
    if (!synthesis.success() || !synthesis.final_sql) return TaskOutcome::Failed;
    sql::ExecutionResult predicted;
    try {
        predicted = executor.execute(*synthesis.final_sql, row_limit);
    } catch (const SqlError&) {
        return TaskOutcome::Incorrect;
    }
    bool order_sensitive = sql::has_top_level_order_by(task.gold_sql);
    return sql::results_equal(predicted, gold, order_sensitive) ? TaskOutcome::Correct
                                                                : TaskOutcome::Incorrect;
}

// One synthesis attempt; run_index starts at 1.
using SynthesisRunner = std::function<SynthesisResult(int run_index)>;

// True iff any of the first k runs scores Correct. Runs stop at the first
// success; later runs cannot change the verdict.
inline bool pass_at_k(const EvalTask& task, int k, const SynthesisRunner& runner,
                      sql::Executor& executor) {
    if (k < 1) throw Error("pass_at_k: k must be >= 1");
    for (int run = 1; run <= k; ++run) {
        SynthesisResult r = runner(run);
        if (score_task(task, r, executor) == TaskOutcome::Correct) return true;
    }
    return false;
}

struct TaskReport {
    std::string id;
    Difficulty difficulty = Difficulty::Easy;
    TaskOutcome outcome = TaskOutcome::Failed;
    int llm_calls = 0;
    int db_calls = 0;
    int first_success_run = 0;  // 0 = no run was Correct
    bool excluded = false;
    std::string note;
};

struct EvalReport {
    std::vector<TaskReport> tasks;
    int attempted = 0;
    int excluded = 0;
    double ex_overall = 0.0;
    std::map<std::string, double> ex_by_bucket;   // bucket -> EX
    std::map<std::string, int> bucket_totals;     // bucket -> attempted tasks
    std::map<int, double> pass_at;                // k -> fraction passing
    double mean_llm_calls = 0.0;
    double mean_db_calls = 0.0;
};

struct EvalConfig {
    int passes = 1;  // evaluate pass@1..passes
};

// Runs every task: first run decides EX and the call-count means; further
// runs (up to config.passes) only serve pass@K. first_success_run makes
// pass@K monotone in K by construction.
inline EvalReport run_eval(const std::vector<EvalTask>& tasks, const EvalConfig& config,
                           const std::function<SynthesisRunner(const EvalTask&)>& make_runner,
                           const std::function<sql::Executor&(const EvalTask&)>& executor_for) {
    if (tasks.empty()) throw Error("run_eval: empty task list");
    if (config.passes < 1) throw Error("run_eval: passes must be >= 1");
    EvalReport report;

    for (const auto& task : tasks) {
        TaskReport tr;
        tr.id = task.id;
        try {
            tr.difficulty = bucket_difficulty(task.gold_sql);
            sql::Executor& executor = executor_for(task);
            SynthesisRunner runner = make_runner(task);
            for (int run = 1; run <= config.passes; ++run) {
                SynthesisResult r;
                try {
                    r = runner(run);
                } catch (const Error& e) {
                    // a crashed run behaves like a Failure for scoring
                    r = SynthesisResult{};
                    tr.note = e.what();
                }
                TaskOutcome outcome = score_task(task, r, executor);
                if (run == 1) {
                    tr.outcome = outcome;
                    tr.llm_calls = r.llm_call_count;
                    tr.db_calls = r.db_call_count;
                }
                if (outcome == TaskOutcome::Correct) {
                    tr.first_success_run = run;
                    break;
                }
            }
        } catch (const GoldExecutionError& e) {
            tr.excluded = true;
            tr.note = e.what();
        }
        report.tasks.push_back(std::move(tr));
    }

    int correct = 0;
    std::map<std::string, int> bucket_correct;
    for (const auto& tr : report.tasks) {
        if (tr.excluded) {
            ++report.excluded;
            continue;
        }
        ++report.attempted;
        report.bucket_totals[to_string(tr.difficulty)] += 1;
        if (tr.outcome == TaskOutcome::Correct) {
            ++correct;
            bucket_correct[to_string(tr.difficulty)] += 1;
        }
        report.mean_llm_calls += tr.llm_calls;
        report.mean_db_calls += tr.db_calls;
    }
    if (report.attempted > 0) {
        report.ex_overall = static_cast<double>(correct) / report.attempted;
        report.mean_llm_calls /= report.attempted;
        report.mean_db_calls /= report.attempted;
    }
    for (const auto& [bucket, total] : report.bucket_totals)
        report.ex_by_bucket[bucket] =
            total > 0 ? static_cast<double>(bucket_correct[bucket]) / total : 0.0;
    for (int k = 1; k <= config.passes; ++k) {
        int passing = 0;
        for (const auto& tr : report.tasks)
            if (!tr.excluded && tr.first_success_run > 0 && tr.first_success_run <= k)
                ++passing;
        report.pass_at[k] =
            report.attempted > 0 ? static_cast<double>(passing) / report.attempted : 0.0;
    }
    return report;
}

// --- task & report serialization ---------------------------------------------

inline std::vector<EvalTask> parse_tasks_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("malformed task file: ") + e.what());
    }
    if (!j.is_array()) throw Error("task file must be a JSON array");
    std::vector<EvalTask> out;
    for (const auto& jt : j) {
        EvalTask t;
        t.id = jt.at("id").get<std::string>();
        t.question = jt.at("question").get<std::string>();
        t.gold_sql = jt.at("gold_sql").get<std::string>();
        t.db = jt.at("db").get<std::string>();
        out.push_back(std::move(t));
    }
    return out;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& tr : r.tasks) {
        tasks.push_back(nlohmann::json{{"id", tr.id},
                                       {"difficulty", to_string(tr.difficulty)},
                                       {"outcome", to_string(tr.outcome)},
                                       {"llm_calls", tr.llm_calls},
                                       {"db_calls", tr.db_calls},
                                       {"first_success_run", tr.first_success_run},
                                       {"excluded", tr.excluded},
                                       {"note", tr.note}});
    }
    nlohmann::json pass = nlohmann::json::object();
    for (const auto& [k, v] : r.pass_at) pass[std::to_string(k)] = v;
    return nlohmann::json{{"tasks", std::move(tasks)},
                          {"attempted", r.attempted},
                          {"excluded", r.excluded},
                          {"ex_overall", r.ex_overall},
                          {"ex_by_bucket", r.ex_by_bucket},
                          {"bucket_totals", r.bucket_totals},
                          {"pass_at", std::move(pass)},
                          {"mean_llm_calls", r.mean_llm_calls},
                          {"mean_db_calls", r.mean_db_calls}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    for (const auto& jt : j.at("tasks")) {
        TaskReport tr;
        tr.id = jt.at("id").get<std::string>();
        std::string d = jt.at("difficulty").get<std::string>();
        tr.difficulty = d == "Easy" ? Difficulty::Easy
                        : d == "Medium" ? Difficulty::Medium
                                        : Difficulty::Hard;
        std::string o = jt.at("outcome").get<std::string>();
        tr.outcome = o == "Correct" ? TaskOutcome::Correct
                     : o == "Incorrect" ? TaskOutcome::Incorrect
                                        : TaskOutcome::Failed;
        tr.llm_calls = jt.at("llm_calls").get<int>();
        tr.db_calls = jt.at("db_calls").get<int>();
        tr.first_success_run = jt.at("first_success_run").get<int>();
        tr.excluded = jt.at("excluded").get<bool>();
        tr.note = jt.at("note").get<std::string>();
        r.tasks.push_back(std::move(tr));
    }
    r.attempted = j.at("attempted").get<int>();
    r.excluded = j.at("excluded").get<int>();
    r.ex_overall = j.at("ex_overall").get<double>();
    for (const auto& [k, v] : j.at("ex_by_bucket").items())
        r.ex_by_bucket[k] = v.get<double>();
    for (const auto& [k, v] : j.at("bucket_totals").items())
        r.bucket_totals[k] = v.get<int>();
    for (const auto& [k, v] : j.at("pass_at").items())
        r.pass_at[std::stoi(k)] = v.get<double>();
    r.mean_llm_calls = j.at("mean_llm_calls").get<double>();
    r.mean_db_calls = j.at("mean_db_calls").get<double>();
    return r;
}

inline std::string render_report_table(const EvalReport& r) {
    std::ostringstream os;
    os << "task            bucket   outcome    llm  db\n";
    for (const auto& tr : r.tasks) {
        os << tr.id;
        for (std::size_t i = tr.id.size(); i < 16; ++i) os << ' ';
        std::string b = to_string(tr.difficulty);
        os << b;
        for (std::size_t i = b.size(); i < 9; ++i) os << ' ';
        std::string o = tr.excluded ? "Excluded" : to_string(tr.outcome);
        os << o;
        for (std::size_t i = o.size(); i < 11; ++i) os << ' ';
        os << tr.llm_calls << "    " << tr.db_calls << "\n";
    }
    os << "\nEX overall: " << r.ex_overall * 100.0 << "%  (" << r.attempted
       << " attempted, " << r.excluded << " excluded)\n";
    for (const auto& [bucket, ex] : r.ex_by_bucket)
        os << "EX " << bucket << ": " << ex * 100.0 << "%\n";
    for (const auto& [k, v] : r.pass_at) os << "pass@" << k << ": " << v * 100.0 << "%\n";
    os << "mean LLM calls: " << r.mean_llm_calls << "\n";
    os << "mean DB calls: " << r.mean_db_calls << "\n";
    return os.str();
}

}  // namespace sqlscout
