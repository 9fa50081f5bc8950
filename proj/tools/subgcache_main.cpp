// subgcache command line: `run` executes a batch in baseline or subgcache
// mode and writes a JSON report; `compare` prints speedup ratios between two
// reports over the same dataset and LM seed.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subgcache/pipeline.hpp"

using namespace subgcache;

int main(int argc, char** argv) {
    CLI::App app{"subgraph-level KV cache reuse for graph RAG"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string mode = "subgcache";
    std::string linkage = "ward";
    std::string retrieval = "g-retriever";
    std::string soft_prefix = "auto";

    CLI::App* run_cmd = app.add_subcommand("run", "execute one batch and write a report");
    run_cmd->add_option("--mode", mode, "baseline | subgcache")->default_val("subgcache");
    run_cmd->add_option("--graph-nodes", cfg.graph_nodes_path, "node CSV file")->required();
    run_cmd->add_option("--graph-edges", cfg.graph_edges_path, "edge CSV file")->required();
    run_cmd->add_option("--queries", cfg.queries_path, "queries JSONL file")->required();
    run_cmd->add_flag("--undirected", cfg.undirected, "symmetrize edges at ingest");
    run_cmd->add_option("--batch-size", cfg.batch_size, "use only the first m queries (0 = all)");
    run_cmd->add_option("--clusters", cfg.cluster.cluster_count, "cluster count c");
    run_cmd->add_option("--linkage", linkage, "ward|single|average|complete|centroid");
    run_cmd->add_option("--retrieval", retrieval, "g-retriever | grag");
    run_cmd->add_option("--k", cfg.retrieval.k, "top-k for retrieval");
    run_cmd->add_option("--edge-cost", cfg.retrieval.edge_cost, "edge cost gate");
    run_cmd->add_option("--ego-hops", cfg.retrieval.ego_hops, "ego network radius (grag)");
    run_cmd->add_option("--ego-cap", cfg.retrieval.ego_entity_cap, "candidate ego centers (grag)");
    run_cmd->add_option("--max-seq", cfg.lm.max_seq_len, "max sequence length");
    run_cmd->add_option("--max-new", cfg.lm.max_new_tokens, "generation cap");
    run_cmd->add_option("--layers", cfg.lm.layers, "transformer layers");
    run_cmd->add_option("--heads", cfg.lm.heads, "attention heads");
    run_cmd->add_option("--model-dim", cfg.lm.model_dim, "model width");
    run_cmd->add_option("--question-budget", cfg.question_budget, "tokens reserved per question");
    run_cmd->add_option("--seed", cfg.seed, "master seed");
    run_cmd->add_option("--soft-prefix", soft_prefix, "auto | on | off");
    bool no_answer_lookup = false;
    run_cmd->add_flag("--no-answer-lookup", no_answer_lookup,
                      "disable the copy-pointer answering mode");
    run_cmd->add_flag("--parallel-queries", cfg.parallel_queries,
                      "decode cluster members concurrently");
    run_cmd->add_option("--report", cfg.report_path, "write the JSON report here");
    run_cmd->add_option("--ledger", cfg.ledger_path, "write the cache ledger JSON here");
    run_cmd->add_option("--dump-retrieval", cfg.dump_retrieval_dir,
                        "dump retrieved subgraphs as CSV into this directory");
    run_cmd->add_option("--dump-merge-trace", cfg.merge_trace_path,
                        "write the clustering merge trace JSON here");
    run_cmd->add_option("--kernels", cfg.kernel_backend, "auto | scalar | avx2");

    std::string base_path, treat_path, out_path;
    CLI::App* cmp_cmd = app.add_subcommand("compare", "speedup ratios between two reports");
    cmp_cmd->add_option("--base", base_path, "baseline report JSON")->required();
    cmp_cmd->add_option("--treat", treat_path, "treatment report JSON")->required();
    cmp_cmd->add_option("--out", out_path, "also write the table as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            cfg.answer_lookup = !no_answer_lookup;
            cfg.mode = run_mode_from_string(mode);
            cfg.cluster.linkage = linkage_from_string(linkage);
            cfg.retrieval.strategy = retrieval_strategy_from_string(retrieval);
            cfg.soft_prefix = soft_prefix == "auto"
                                  ? SoftPrefixMode::Auto
                                  : (soft_prefix == "on" ? SoftPrefixMode::On
                                                         : SoftPrefixMode::Off);
            BatchReport report = run(cfg);
            const Aggregate& a = report.aggregate;
            std::printf("mode=%s m=%u clusters=%u fallbacks=%u\n", report.mode.c_str(), a.m,
                        a.n_clusters, a.n_fallbacks);
            std::printf("ACC %.2f%%  RT %.3fms  TTFT %.3fms  PFTT %.3fms\n", a.acc_percent,
                        a.mean_rt_ms, a.mean_ttft_ms, a.mean_pftt_ms);
            std::printf("proxy: RT %.0f  TTFT %.0f  PFTT %.0f  prefill-tokens %llu\n",
                        a.mean_rt_proxy, a.mean_ttft_proxy, a.mean_pftt_proxy,
                        static_cast<unsigned long long>(a.total_prefill_tokens));
            std::printf("cluster processing: %.3fms (encode %.3f, cluster %.3f, merge %.3f)\n",
                        report.cluster_processing.total_ms(), report.cluster_processing.encode_ms,
                        report.cluster_processing.cluster_ms, report.cluster_processing.merge_ms);
            if (!cfg.report_path.empty()) {
                std::printf("report written to %s\n", cfg.report_path.c_str());
            }
        } else if (cmp_cmd->parsed()) {
            BatchReport base = BatchReport::load(base_path);
            BatchReport treat = BatchReport::load(treat_path);
            SpeedupTable table = compare_reports(base, treat);
            std::fputs(table.to_text().c_str(), stdout);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                f << table.to_json();
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
