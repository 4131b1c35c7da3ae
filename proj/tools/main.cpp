// sqlscout command line: ingest a catalog into a schema graph, explore a
// database into a triplet knowledge base, answer questions against it, and
// evaluate over a task file.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "sqlscout/embedding.hpp"
#include "sqlscout/evalkit.hpp"
#include "sqlscout/explore.hpp"
#include "sqlscout/gateway.hpp"
#include "sqlscout/http_backend.hpp"
#include "sqlscout/introspect.hpp"
#include "sqlscout/knowledge.hpp"
#include "sqlscout/schema_graph.hpp"
#include "sqlscout/signature.hpp"
#include "sqlscout/synthesis.hpp"

namespace {

using namespace sqlscout;

std::shared_ptr<PolicyBackend> make_backend(const std::string& policy) {
    if (policy == "live") {
        BackendConfig config = BackendConfig::from_env();
        return std::make_shared<HttpBackend>(config);
    }
    if (policy.starts_with("scripted:"))
        return ScriptedBackend::from_file(policy.substr(std::string("scripted:").size()));
    throw Error("unknown policy \"" + policy + "\" (use live or scripted:<path>)");
}

std::unique_ptr<Embedder> make_embedder() {
    const char* endpoint = std::getenv("EMBED_ENDPOINT");
    if (endpoint && *endpoint) {
        const char* model = std::getenv("EMBED_MODEL");
        return std::make_unique<HttpEmbedder>(endpoint, model ? model : "",
                                              kFallbackEmbeddingDim);
    }
    return std::make_unique<HashingEmbedder>();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

int cmd_ingest(const std::string& source, const std::string& out_path) {
    CatalogDef catalog = introspect_catalog(source);
    auto groups = select_groups(find_candidate_groups(catalog));
    SchemaGraph graph = build_graph(catalog, groups);
    save_graph_file(graph, out_path);
    GraphStats st = graph_stats(graph);
    std::cout << "ingested " << catalog.database_name << ": " << st.total_nodes
              << " nodes, " << st.total_edges << " edges, " << st.group_count
              << " shared field groups\n";
    return 0;
}

int cmd_stats(const std::string& graph_path, const std::string& format) {
    SchemaGraph graph = load_graph_file(graph_path);
    GraphStats st = graph_stats(graph);
    if (format == "json") {
        std::cout << stats_to_json(st).dump(2) << "\n";
        return 0;
    }
    std::cout << "component            count\n";
    for (const auto& [kind, n] : st.node_counts) std::cout << "node " << kind << ": " << n << "\n";
    for (const auto& [kind, n] : st.edge_counts) std::cout << "edge " << kind << ": " << n << "\n";
    std::cout << "total nodes: " << st.total_nodes << "\n";
    std::cout << "total edges: " << st.total_edges << "\n";
    std::cout << "groups: " << st.group_count << "\n";
    std::cout << "avg fan-out: " << st.avg_fanout << "\n";
    std::cout << "max fan-out: " << st.max_fanout << "\n";
    return 0;
}

int cmd_explore(const std::string& graph_path, const std::string& db,
                const std::string& policy, int target, int max_iter,
                const std::string& out_path, long seed, bool wall_clock) {
    SchemaGraph graph = load_graph_file(graph_path);
    Gateway gateway(make_backend(policy), policy == "live" ? 2 : 0);
    sql::Executor executor(db);
    auto embedder = make_embedder();

    ExplorationConfig config;
    config.target_triplets = target;
    config.max_iterations = max_iter;
    if (wall_clock)
        config.provenance_epoch = std::chrono::duration_cast<std::chrono::seconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count();
    (void)seed;  // reserved for stochastic policies; recorded in the run line below

    ExplorationRun run = run_exploration(graph, config, gateway, executor, *embedder);

    KnowledgeBase kb(embedder->dimension());
    for (auto& t : run.triplets) kb.add_triplet(std::move(t));
    kb.persist(out_path);
    save_graph_file(graph, graph_path);  // success feedback accumulates on the graph

    std::cout << "explored " << db << " (seed " << seed << "): " << kb.triplets().size()
              << " triplets in " << run.iterations << " iterations, " << run.llm_calls
              << " LLM calls, " << run.db_calls << " DB calls"
              << (run.aborted ? " (aborted: " + run.abort_reason + ")" : "") << "\n";
    return run.aborted ? 1 : 0;
}

int cmd_query(const std::string& graph_path, const std::string& kb_path,
              const std::string& db, const std::string& question,
              const std::string& policy, int max_iters, int top_k,
              const std::string& transcript_path, bool wall_clock) {
    SchemaGraph graph = load_graph_file(graph_path);
    KnowledgeBase kb = KnowledgeBase::load(kb_path);
    Gateway gateway(make_backend(policy), policy == "live" ? 2 : 0);
    sql::Executor executor(db);
    auto embedder = make_embedder();
    kb.index_columns(graph, *embedder);

    SynthesisConfig config;
    config.max_iterations = max_iters;
    config.top_k = top_k;
    config.record_wall_time = wall_clock;

    SynthesisResult result =
        synthesize(question, graph, kb, executor, gateway, *embedder, config);

    if (!transcript_path.empty())
        write_file(transcript_path, transcript_to_json(result).dump(2) + "\n");

    if (result.success()) {
        std::cout << *result.final_sql << "\n";
        std::cerr << "success in " << result.iterations_used << " iteration(s), "
                  << result.llm_call_count << " LLM calls, " << result.db_call_count
                  << " DB calls\n";
        return 0;
    }
    std::cerr << "failed after " << result.iterations_used << " iteration(s)\n";
    return 1;
}

int cmd_eval(const std::string& tasks_path, const std::string& graph_path,
             const std::string& kb_path, const std::string& policy, int passes,
             const std::string& out_path) {
    std::ifstream in(tasks_path, std::ios::binary);
    if (!in) throw Error("cannot open task file: " + tasks_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto tasks = parse_tasks_json(buf.str());

    SchemaGraph graph = load_graph_file(graph_path);
    KnowledgeBase kb = KnowledgeBase::load(kb_path);
    auto embedder = make_embedder();
    kb.index_columns(graph, *embedder);

    // One scripted backend serves the whole run, consumed task by task in
    // file order; a live backend is shared too.
    Gateway gateway(make_backend(policy), policy == "live" ? 2 : 0);

    std::map<std::string, std::unique_ptr<sql::Executor>> executors;
    auto executor_for = [&](const EvalTask& task) -> sql::Executor& {
        auto it = executors.find(task.db);
        if (it == executors.end())
            it = executors.emplace(task.db, std::make_unique<sql::Executor>(task.db)).first;
        return *it->second;
    };

    EvalConfig config;
    config.passes = passes;
    SynthesisConfig syn_config;
    auto make_runner = [&](const EvalTask& task) -> SynthesisRunner {
        return [&](int) {
            return synthesize(task.question, graph, kb, executor_for(task), gateway,
                              *embedder, syn_config);
        };
    };

    EvalReport report = run_eval(tasks, config, make_runner, executor_for);
    write_file(out_path, report_to_json(report).dump(2) + "\n");
    std::cout << render_report_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schema exploration and SQL synthesis toolkit"};
    app.require_subcommand(1);

    std::string source, out, graph_path, format = "table", db, policy, kb_path, question,
                transcript_path, tasks_path;
    int target = 50, max_iter = 200, max_iters = 5, top_k = 3, passes = 1;
    long seed = 0;
    bool wall_clock = false;

    auto* ingest = app.add_subcommand("ingest", "build a schema graph from a catalog source");
    ingest->add_option("--source", source, "catalog file (.json) or database locator")
        ->required();
    ingest->add_option("--out", out, "output graph file")->required();

    auto* stats = app.add_subcommand("stats", "summarize a schema graph");
    stats->add_option("--graph", graph_path, "graph file")->required();
    stats->add_option("--format", format, "table|json");

    auto* explore = app.add_subcommand("explore", "build a knowledge base by exploration");
    explore->add_option("--graph", graph_path, "graph file")->required();
    explore->add_option("--db", db, "database locator")->required();
    explore->add_option("--policy", policy, "live or scripted:<path>")->required();
    explore->add_option("--target-triplets", target, "stop after this many triplets");
    explore->add_option("--max-iterations", max_iter, "iteration budget");
    explore->add_option("--out", out, "output kb file (jsonl)")->required();
    explore->add_option("--seed", seed, "run seed (recorded)");
    explore->add_flag("--wall-clock", wall_clock, "stamp provenance with wall-clock time");

    auto* query = app.add_subcommand("query", "answer one question with validated SQL");
    query->add_option("--graph", graph_path, "graph file")->required();
    query->add_option("--kb", kb_path, "knowledge base file")->required();
    query->add_option("--db", db, "database locator")->required();
    query->add_option("--question", question, "natural language question")->required();
    query->add_option("--policy", policy, "live or scripted:<path>")->required();
    query->add_option("--max-iters", max_iters, "refinement budget");
    query->add_option("--top-k", top_k, "retrieval depth");
    query->add_option("--transcript", transcript_path, "write step transcript here");
    query->add_flag("--wall-clock", wall_clock, "record wall-clock timings in transcript");

    auto* eval = app.add_subcommand("eval", "run the evaluation harness over a task file");
    eval->add_option("--tasks", tasks_path, "task file (json)")->required();
    eval->add_option("--graph", graph_path, "graph file")->required();
    eval->add_option("--kb", kb_path, "knowledge base file")->required();
    eval->add_option("--policy", policy, "live or scripted:<path>")->required();
    eval->add_option("--passes", passes, "evaluate pass@1..K");
    eval->add_option("--out", out, "report output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(source, out);
        if (stats->parsed()) return cmd_stats(graph_path, format);
        if (explore->parsed())
            return cmd_explore(graph_path, db, policy, target, max_iter, out, seed,
                               wall_clock);
        if (query->parsed())
            return cmd_query(graph_path, kb_path, db, question, policy, max_iters, top_k,
                             transcript_path, wall_clock);
        if (eval->parsed())
            return cmd_eval(tasks_path, graph_path, kb_path, policy, passes, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
