#pragma once

// Deployment stage: the InfoAgent/GenAgent refinement loop.
//
// Per iteration: extract keywords, ground the schema context by retrieval,
// expand it with policy-proposed dependencies (join keys), prune components
// a previous failed attempt never referenced, retrieve the most similar
// knowledge triplets, generate candidate SQL, execute, and either finish
// on an aligned result or package feedback for the next cycle. The loop
// stops on success or after max_iterations.
//
// Transcript steps carry MD5 digests of prompts/responses and running call
// counters. Wall-clock timings are recorded only when record_wall_time is
// set, so default transcripts are byte-identical across reruns.

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlscout/detail/md5.hpp"
#include "sqlscout/embedding.hpp"
#include "sqlscout/errors.hpp"
#include "sqlscout/explore.hpp"
#include "sqlscout/gateway.hpp"
#include "sqlscout/knowledge.hpp"
#include "sqlscout/schema_graph.hpp"
#include "sqlscout/sql/executor.hpp"
#include "sqlscout/sql/lexer.hpp"
#include "sqlscout/sql/parser.hpp"

namespace sqlscout {

struct SynthesisConfig {
    int max_iterations = 5;  // Appendix-style N_max
    int top_k = 3;
    bool fidelity_check_enabled = true;
    int result_preview_rows = 20;
    std::size_t preview_char_cap = 2000;
    int row_limit = 100;
    std::chrono::milliseconds exec_timeout{5000};
    double temperature = 0.7;
    bool record_wall_time = false;

    void validate() const {
        if (max_iterations < 1) throw Error("synthesis config: max_iterations must be >= 1");
        if (top_k < 1) throw Error("synthesis config: top_k must be >= 1");
    }
};

enum class ComponentOrigin { Retrieved, Expanded };

struct ContextComponent {
    std::string node_id;  // graph node id (field or table node)
    std::string display;  // table fullname, or table fullname + "." + column
    ComponentOrigin origin = ComponentOrigin::Retrieved;

    bool operator==(const ContextComponent&) const = default;
};

struct SchemaContext {
    std::vector<ContextComponent> components;  // insertion order, deduped by node id
    std::vector<std::pair<std::string, std::string>> join_hints;  // display names

    bool contains(const std::string& node_id) const {
        for (const auto& c : components)
            if (c.node_id == node_id) return true;
        return false;
    }

    void add(ContextComponent c) {
        if (!contains(c.node_id)) components.push_back(std::move(c));
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(components.size());
        for (const auto& c : components) out.push_back(c.node_id);
        return out;
    }

    bool empty() const { return components.empty(); }
};

enum class FeedbackReason { ExecutionFailed, SemanticMismatch };

inline const char* to_string(FeedbackReason r) {
    return r == FeedbackReason::ExecutionFailed ? "ExecutionFailed" : "SemanticMismatch";
}

struct FeedbackInfo {
    std::string failed_sql;
    std::vector<ContextComponent> context_snapshot;
    FeedbackReason reason = FeedbackReason::ExecutionFailed;
    std::vector<std::string> unused_components;  // node ids, filled by pruning
};

enum class SynthesisStatus { Success, Failure };

struct TranscriptStep {
    int seq = 0;
    int iteration = 0;
    std::string role;  // info | gen | db | system
    std::string step;
    std::string prompt_digest;    // md5, empty for non-policy steps
    std::string response_digest;  // md5 of response / result rendering
    std::string detail;
    int llm_calls = 0;  // running totals after this step
    int db_calls = 0;
    std::int64_t elapsed_ms = -1;  // -1 when not recorded
};

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::Failure;
    std::optional<std::string> final_sql;
    int iterations_used = 0;
    int llm_call_count = 0;
    int db_call_count = 0;
    std::vector<TranscriptStep> transcript;
    std::vector<FeedbackInfo> feedback_history;

    bool success() const { return status == SynthesisStatus::Success; }
};

inline nlohmann::json transcript_to_json(const SynthesisResult& r) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.transcript) {
        nlohmann::json js{{"seq", s.seq},
                          {"iteration", s.iteration},
                          {"role", s.role},
                          {"step", s.step},
                          {"prompt_digest", s.prompt_digest},
                          {"response_digest", s.response_digest},
                          {"detail", s.detail},
                          {"llm_calls", s.llm_calls},
                          {"db_calls", s.db_calls}};
        if (s.elapsed_ms >= 0) js["elapsed_ms"] = s.elapsed_ms;
        steps.push_back(std::move(js));
    }
    return nlohmann::json{
        {"status", r.status == SynthesisStatus::Success ? "Success" : "Failure"},
        {"final_sql", r.final_sql ? nlohmann::json(*r.final_sql) : nlohmann::json()},
        {"iterations_used", r.iterations_used},
        {"llm_call_count", r.llm_call_count},
        {"db_call_count", r.db_call_count},
        {"steps", std::move(steps)}};
}

// --- keyword extraction -----------------------------------------------------

inline const std::set<std::string>& keyword_stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "any",  "all",  "are",  "at",    "by",    "did",
        "do",   "does", "each", "find", "for",  "from", "get",   "give",  "how",
        "in",   "is",   "it",   "list", "many", "me",   "much",  "of",    "on",
        "or",   "per",  "show", "than", "that", "the",  "their", "then",  "there",
        "these", "this", "those", "to",  "was",  "were", "what",  "which", "who",
        "whom", "with", "return"};
    return words;
}

// Whitespace tokenization minus stopwords; never empty for a non-empty
// question (falls back to the raw tokens when everything is a stopword).
inline std::vector<std::string> fallback_keywords(const std::string& question) {
    std::vector<std::string> raw;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) raw.push_back(token);
        token.clear();
    };
    for (char c : question) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            flush();
    }
    flush();
    std::vector<std::string> kept;
    for (const auto& w : raw)
        if (!keyword_stopwords().contains(w)) kept.push_back(w);
    return kept.empty() ? raw : kept;
}

inline std::vector<std::string> parse_keyword_response(const std::string& text) {
    std::vector<std::string> out;
    std::string token;
    auto flush = [&] {
        auto b = token.find_first_not_of(" \t\r\n");
        if (b != std::string::npos) {
            auto e = token.find_last_not_of(" \t\r\n");
            out.push_back(token.substr(b, e - b + 1));
        }
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == '\n' || c == ';')
            flush();
        else
            token += c;
    }
    flush();
    return out;
}

// Policy-backed keyword extraction with the documented tokenizer fallback.
// Guaranteed non-empty output; an empty question violates the precondition.
inline std::vector<std::string> extract_keywords(const std::string& question,
                                                 Gateway& gateway,
                                                 const std::string& failure_note = "",
                                                 double temperature = 0.7) {
    if (question.empty()) throw Error("extract_keywords: empty question");
    std::string user = "Extract the semantic keywords from this database question. "
                       "Answer with a comma-separated list only.\n\nQuestion: " +
                       question + "\n";
    if (!failure_note.empty())
        user += "\nA previous attempt failed (" + failure_note +
                "); re-analyze the question for overlooked keywords.\n";
    try {
        auto kws = parse_keyword_response(gateway.complete(
            PolicyRequest{RequestKind::KeywordExtraction,
                          "You extract search keywords from questions about data.", user,
                          temperature}));
        if (!kws.empty()) return kws;
    } catch (const Error&) {
        // fall through to the tokenizer
    }
    return fallback_keywords(question);
}

// --- schema grounding -------------------------------------------------------

namespace detail {

inline std::string field_display(const GraphNode& field, const SchemaGraph& graph) {
    if (!field.grouped)
        return field.database + "." + field.schema + "." + field.table + "." + field.name;
    // group fields display through the group name
    for (const GraphEdge* e : graph.in_edges(field.id))
        if (e->kind == EdgeKind::HasField) return graph.at(e->from).name + "." + field.name;
    return field.name;
}

// tables that own a field node: one for unique fields, every member table
// for grouped ones
inline std::vector<std::string> parent_table_ids(const GraphNode& field,
                                                 const SchemaGraph& graph) {
    std::vector<std::string> out;
    for (const GraphEdge* e : graph.in_edges(field.id)) {
        if (e->kind == EdgeKind::HasUniqueField) {
            out.push_back(e->from);
        } else if (e->kind == EdgeKind::HasField) {
            for (const GraphEdge* u : graph.in_edges(e->from))
                if (u->kind == EdgeKind::UsesFieldGroup) out.push_back(u->from);
        }
    }
    return out;
}

}  // namespace detail

// Union of top-k column retrievals over the question and each keyword,
// tagged retrieved, with parent tables pulled in.
inline SchemaContext ground_schema(const std::vector<std::string>& keywords,
                                   const std::string& question, const KnowledgeBase& kb,
                                   const SchemaGraph& graph, Embedder& embedder, int k) {
    SchemaContext ctx;
    std::vector<std::string> queries;
    queries.push_back(question);
    for (const auto& kw : keywords) queries.push_back(kw);
    for (const auto& q : queries) {
        for (const auto& hit : kb.retrieve_columns(q, embedder, k)) {
            const GraphNode* field = graph.find(hit.id);
            if (!field) continue;
            ctx.add(ContextComponent{hit.id, detail::field_display(*field, graph),
                                     ComponentOrigin::Retrieved});
            for (const auto& tid : detail::parent_table_ids(*field, graph))
                ctx.add(ContextComponent{tid, graph.at(tid).fullname,
                                         ComponentOrigin::Retrieved});
        }
    }
    return ctx;
}

// --- context expansion ------------------------------------------------------

namespace detail {

inline std::string render_context(const SchemaContext& ctx) {
    std::string out;
    for (const auto& c : ctx.components) {
        out += "  - " + c.display +
               (c.origin == ComponentOrigin::Expanded ? " (expanded)" : "") + "\n";
    }
    if (ctx.components.empty()) out += "  (empty)\n";
    for (const auto& [l, r] : ctx.join_hints) out += "  join hint: " + l + " = " + r + "\n";
    return out;
}

// Resolves "table", "table.column", or fully-qualified spellings to a graph
// node id. Returns empty when unknown or ambiguous.
inline std::string resolve_component(const std::string& name, const GraphView& view) {
    if (const TableEntry* t = view.find_table(name)) return t->table_node;
    auto pos = name.rfind('.');
    if (pos == std::string::npos) return "";
    std::string table_part = name.substr(0, pos);
    std::string column_part = name.substr(pos + 1);
    if (const TableEntry* t = view.find_table(table_part)) {
        if (const ColumnEntry* c = view.find_column(*t, column_part)) return c->field_node;
    }
    return "";
}

}  // namespace detail

struct ExpansionOutcome {
    SchemaContext context;
    std::vector<std::string> dropped;  // unresolvable proposals
};

// The policy proposes extra components ("ADD x", one per line) and join
// hints ("JOIN a = b"); only proposals that exist in the graph are
// admitted, tagged expanded.
inline ExpansionOutcome expand_context(const std::string& question, SchemaContext context,
                                       const GraphView& view, Gateway& gateway,
                                       double temperature = 0.7) {
    ExpansionOutcome out;
    std::string user =
        "Given the user query and the retrieved schema fragments, analyze the "
        "relationships. If two tables are required but no join condition is present, "
        "identify and add the primary/foreign keys necessary to form a valid SQL "
        "join.\n\nQuestion: " +
        question + "\n\nCurrent schema context:\n" + detail::render_context(context) +
        "\nAnswer with one directive per line:\n"
        "  ADD <table or table.column>\n"
        "  JOIN <table.column> = <table.column>\n"
        "  NONE\n";
    std::string response;
    try {
        response = gateway.complete(PolicyRequest{
            RequestKind::ContextExpansion,
            "You are a database expert completing schema contexts for SQL generation.",
            user, temperature});
    } catch (const Error& e) {
        out.dropped.push_back(std::string("expansion unavailable: ") + e.what());
        out.context = std::move(context);
        return out;
    }
    std::istringstream lines(response);
    std::string line;
    while (std::getline(lines, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line == "NONE") continue;
        if (line.starts_with("ADD ")) {
            std::string name = line.substr(4);
            std::string id = detail::resolve_component(name, view);
            if (id.empty()) {
                out.dropped.push_back(name);
                continue;
            }
            const GraphNode& node = view.graph().at(id);
            std::string display = node.kind == NodeKind::Table
                                      ? node.fullname
                                      : detail::field_display(node, view.graph());
            context.add(ContextComponent{id, display, ComponentOrigin::Expanded});
            if (node.kind == NodeKind::Field)
                for (const auto& tid : detail::parent_table_ids(node, view.graph()))
                    context.add(ContextComponent{tid, view.graph().at(tid).fullname,
                                                 ComponentOrigin::Expanded});
        } else if (line.starts_with("JOIN ")) {
            std::string rest = line.substr(5);
            auto eq = rest.find('=');
            if (eq == std::string::npos) {
                out.dropped.push_back(line);
                continue;
            }
            auto trim = [](std::string s) {
                auto sb = s.find_first_not_of(" \t");
                auto se = s.find_last_not_of(" \t");
                return sb == std::string::npos ? std::string()
                                               : s.substr(sb, se - sb + 1);
            };
            std::string left = trim(rest.substr(0, eq));
            std::string right = trim(rest.substr(eq + 1));
            std::string lid = detail::resolve_component(left, view);
            std::string rid = detail::resolve_component(right, view);
            if (lid.empty() || rid.empty()) {
                out.dropped.push_back(line);
                continue;
            }
            auto admit = [&](const std::string& id) {
                const GraphNode& node = view.graph().at(id);
                std::string display = node.kind == NodeKind::Table
                                          ? node.fullname
                                          : detail::field_display(node, view.graph());
                context.add(ContextComponent{id, display, ComponentOrigin::Expanded});
                if (node.kind == NodeKind::Field)
                    for (const auto& tid : detail::parent_table_ids(node, view.graph()))
                        context.add(ContextComponent{tid, view.graph().at(tid).fullname,
                                                     ComponentOrigin::Expanded});
                return display;
            };
            std::string ld = admit(lid);
            std::string rd = admit(rid);
            context.join_hints.emplace_back(ld, rd);
        } else {
            out.dropped.push_back(line);
        }
    }
    out.context = std::move(context);
    return out;
}

// --- pruning -----------------------------------------------------------------

namespace detail {

// a component is referenced when its unqualified name or any suffix of its
// qualified spelling appears among the SQL's identifiers
inline bool component_referenced(const ContextComponent& c,
                                 const std::set<std::string>& idents) {
    std::string display = sql::to_lower_ascii(c.display);
    if (idents.contains(display)) return true;
    // progressively shorter dotted suffixes: a.b.c.d -> b.c.d -> c.d -> d
    std::string rest = display;
    while (true) {
        auto pos = rest.find('.');
        if (pos == std::string::npos) break;
        rest = rest.substr(pos + 1);
        if (idents.contains(rest)) return true;
    }
    return idents.contains(rest);
}

}  // namespace detail

// With no feedback this is the identity. Otherwise components the failed
// SQL never referenced are removed from the fresh context; referenced ones
// always survive. The removed ids are recorded on the feedback entry.
inline SchemaContext prune_context(SchemaContext context, FeedbackInfo* feedback) {
    if (!feedback) return context;
    std::set<std::string> idents = sql::identifier_index(feedback->failed_sql);
    std::set<std::string> unused;
    for (const auto& c : feedback->context_snapshot)
        if (!detail::component_referenced(c, idents)) unused.insert(c.node_id);
    feedback->unused_components.assign(unused.begin(), unused.end());
    SchemaContext pruned;
    pruned.join_hints = context.join_hints;
    for (auto& c : context.components)
        if (!unused.contains(c.node_id)) pruned.components.push_back(std::move(c));
    return pruned;
}

// --- generation --------------------------------------------------------------

struct RetrievedTriplet {
    const Triplet* triplet;
    double score;
};

inline std::string assemble_generation_prompt(const std::string& question,
                                              const SchemaContext& context,
                                              const std::vector<RetrievedTriplet>& examples) {
    std::string user = "Schema context:\n" + detail::render_context(context) + "\n";
    if (!examples.empty()) {
        user += "Validated examples from this database:\n";
        int i = 1;
        for (const auto& ex : examples) {
            user += std::to_string(i++) + ". ";
            user += ex.triplet->description + "\n   SQL: " + ex.triplet->sql + "\n";
        }
        user += "\n";
    }
    user += "User query: " + question + "\n";
    user += "\nWrite a single SQL SELECT statement that answers the user query against "
            "this schema. Respond with SQL only.\n";
    return user;
}

inline std::string generate_sql(const std::string& question, const SchemaContext& context,
                                const std::vector<RetrievedTriplet>& examples,
                                Gateway& gateway, double temperature = 0.7,
                                std::string* prompt_out = nullptr) {
    if (context.empty()) throw Error("generate_sql: empty schema context");
    std::string user = assemble_generation_prompt(question, context, examples);
    if (prompt_out) *prompt_out = user;
    std::string response = gateway.complete(PolicyRequest{
        RequestKind::SqlCompletion, "You are an expert SQL data analyst.", user, temperature});
    return detail::strip_code_fences(response);
}

// --- fidelity ----------------------------------------------------------------

// Policy judgment on whether the preview answers the question. Disabled
// checks short-circuit to aligned; a policy failure counts as not aligned.
inline bool check_fidelity(const std::string& question, const sql::ExecutionResult& result,
                           Gateway& gateway, const SynthesisConfig& config,
                           std::string* note = nullptr) {
    if (!config.fidelity_check_enabled) return true;
    std::string preview = sql::render_result_preview(result, config.result_preview_rows,
                                                     config.preview_char_cap);
    std::string user = "Question: " + question + "\n\nQuery result preview:\n" + preview +
                       "\nDoes this result answer the question? Respond with exactly "
                       "ALIGNED or MISMATCH on one line, optionally followed by a reason.";
    try {
        std::string response = gateway.complete(PolicyRequest{
            RequestKind::FidelityJudgment,
            "You judge whether SQL results answer the user's question.", user,
            config.temperature});
        std::istringstream is(response);
        std::string word;
        is >> word;
        if (word == "ALIGNED") return true;
        if (word == "MISMATCH") return false;
        if (note) *note = "unparseable fidelity verdict: " + response;
        return false;
    } catch (const Error& e) {
        if (note) *note = std::string("fidelity check failed: ") + e.what();
        return false;
    }
}

// --- the loop ----------------------------------------------------------------

inline SynthesisResult synthesize(const std::string& question, const SchemaGraph& graph,
                                  const KnowledgeBase& kb, sql::Executor& executor,
                                  Gateway& gateway, Embedder& embedder,
                                  const SynthesisConfig& config) {
    config.validate();
    GraphView view(graph);
    SynthesisResult result;
    int llm_before = gateway.llm_call_count();
    int db_before = executor.db_call_count();
    auto t0 = std::chrono::steady_clock::now();

    int seq = 0;
    auto record = [&](int iteration, const std::string& role, const std::string& step,
                      const std::string& prompt, const std::string& response,
                      const std::string& detail) {
        TranscriptStep s;
        s.seq = ++seq;
        s.iteration = iteration;
        s.role = role;
        s.step = step;
        s.prompt_digest = prompt.empty() ? "" : detail::md5_hex(prompt);
        s.response_digest = response.empty() ? "" : detail::md5_hex(response);
        s.detail = detail;
        s.llm_calls = gateway.llm_call_count() - llm_before;
        s.db_calls = executor.db_call_count() - db_before;
        if (config.record_wall_time)
            s.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        result.transcript.push_back(std::move(s));
    };

    std::optional<FeedbackInfo> feedback;
    bool success = false;
    int iteration = 0;

    while (iteration < config.max_iterations && !success) {
        int it = iteration + 1;

        std::string failure_note =
            feedback ? std::string(to_string(feedback->reason)) : std::string();
        auto keywords = extract_keywords(question, gateway, failure_note, config.temperature);
        {
            std::string joined;
            for (const auto& k : keywords) joined += (joined.empty() ? "" : ",") + k;
            record(it, "info", "extract_keywords", question, joined, joined);
        }

        SchemaContext initial =
            ground_schema(keywords, question, kb, graph, embedder, config.top_k);
        {
            std::string ids;
            for (const auto& c : initial.components)
                ids += (ids.empty() ? "" : ",") + c.node_id;
            record(it, "info", "ground_schema", "", ids, ids);
        }

        ExpansionOutcome expansion =
            expand_context(question, std::move(initial), view, gateway, config.temperature);
        {
            std::string detail;
            for (const auto& c : expansion.context.components)
                if (c.origin == ComponentOrigin::Expanded)
                    detail += (detail.empty() ? "" : ",") + c.node_id;
            for (const auto& d : expansion.dropped) detail += "|dropped:" + d;
            record(it, "info", "expand_context", question, detail, detail);
        }

        SchemaContext ctx =
            prune_context(std::move(expansion.context), feedback ? &*feedback : nullptr);
        {
            std::string detail;
            if (feedback) {
                for (const auto& u : feedback->unused_components)
                    detail += (detail.empty() ? "" : ",") + u;
                detail = "removed:" + detail;
                result.feedback_history.push_back(*feedback);
            } else {
                detail = "no feedback";
            }
            record(it, "info", "prune_context", "", detail, detail);
        }

        std::vector<RetrievedTriplet> examples;
        for (const auto& hit : kb.retrieve_triplets(question, embedder, config.top_k)) {
            if (const Triplet* t = kb.find_triplet(hit.id))
                examples.push_back(RetrievedTriplet{t, hit.score});
        }
        {
            std::string ids;
            for (const auto& ex : examples)
                ids += (ids.empty() ? "" : ",") + ex.triplet->id;
            record(it, "gen", "retrieve_triplets", question, ids, ids);
        }

        std::string candidate;
        std::string gen_prompt;
        if (ctx.empty()) {
            // nothing retrievable: fail this iteration gracefully
            feedback = FeedbackInfo{"", ctx.components, FeedbackReason::ExecutionFailed, {}};
            record(it, "gen", "generate_sql", "", "", "skipped: empty schema context");
            iteration = it;
            continue;
        }
        candidate = generate_sql(question, ctx, examples, gateway, config.temperature,
                                 &gen_prompt);
        record(it, "gen", "generate_sql", gen_prompt, candidate, "");

        auto parse = sql::parse_check(candidate);
        if (!parse.ok) {
            feedback = FeedbackInfo{candidate, ctx.components,
                                    FeedbackReason::ExecutionFailed, {}};
            record(it, "db", "execute", candidate, "",
                   "syntax: " + parse.issue->render());
            iteration = it;
            continue;
        }

        sql::ExecutionResult exec_result;
        bool exec_ok = true;
        std::string exec_detail;
        try {
            exec_result = executor.execute(candidate, config.row_limit, config.exec_timeout);
        } catch (const SqlError& e) {
            exec_ok = false;
            exec_detail = e.what();
        }
        if (!exec_ok || exec_result.rows.empty()) {
            feedback = FeedbackInfo{candidate, ctx.components,
                                    FeedbackReason::ExecutionFailed, {}};
            record(it, "db", "execute", candidate, "",
                   exec_ok ? "empty result" : exec_detail);
            iteration = it;
            continue;
        }
        record(it, "db", "execute", candidate,
               sql::render_result_preview(exec_result, config.result_preview_rows,
                                          config.preview_char_cap),
               std::to_string(exec_result.rows.size()) + " rows");

        std::string fidelity_note;
        bool aligned = check_fidelity(question, exec_result, gateway, config, &fidelity_note);
        record(it, "gen", "check_fidelity", question, aligned ? "ALIGNED" : "MISMATCH",
               fidelity_note);
        if (aligned) {
            result.final_sql = candidate;
            success = true;
        } else {
            feedback = FeedbackInfo{candidate, ctx.components,
                                    FeedbackReason::SemanticMismatch, {}};
        }
        iteration = it;
    }

    if (feedback && !success) result.feedback_history.push_back(*feedback);
    result.status = success ? SynthesisStatus::Success : SynthesisStatus::Failure;
    result.iterations_used = iteration;
    result.llm_call_count = gateway.llm_call_count() - llm_before;
    result.db_call_count = executor.db_call_count() - db_before;
    record(iteration, "system", "outcome", "",
           result.status == SynthesisStatus::Success ? "Success" : "Failure",
           result.final_sql.value_or(""));
    return result;
}

}  // namespace sqlscout
