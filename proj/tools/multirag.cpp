// Command-line front end: ingest, build, match, query, eval, perturb and
// sweep-alpha subcommands over the multirag core library. Exit codes:
// 0 success, 1 domain error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multirag/eval.hpp"
#include "multirag/io.hpp"
#include "multirag/pipeline.hpp"

namespace {

using namespace multirag;

// Options shared by every subcommand; CLI values override the config file,
// which overrides built-in defaults.
struct Shared {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string mock_fixtures;
};

void add_shared(CLI::App* cmd, Shared& shared) {
  cmd->add_option("--config", shared.config_path,
                  "flat key=value configuration file");
  cmd->add_option("--seed", shared.seed, "seed for all randomized steps");
  cmd->add_option("--workers", shared.workers,
                  "worker pool size (0 = logical cores)");
}

void add_fixtures(CLI::App* cmd, Shared& shared) {
  cmd->add_option("--mock-fixtures", shared.mock_fixtures,
                  "mock reply fixture file or directory");
}

EngineConfig resolve_config(const Shared& shared) {
  EngineConfig cfg;
  if (!shared.config_path.empty()) cfg = load_config(shared.config_path);
  if (shared.seed) cfg.seed = *shared.seed;
  if (shared.workers) cfg.workers = *shared.workers;
  if (!shared.mock_fixtures.empty()) cfg.mock_fixtures = shared.mock_fixtures;
  return cfg;
}

std::string resolve_manifest(const std::string& path) {
  if (std::filesystem::is_directory(path))
    return (std::filesystem::path(path) / "manifest.json").string();
  return path;
}

AliasMap load_alias_file(const std::string& path) {
  if (path.empty()) return {};
  return AliasMap::from_file(path);
}

// Engine assembled from previously dumped artifacts instead of a rebuild.
Engine engine_from_artifacts(const EngineConfig& cfg, const std::string& store,
                             const std::string& graph,
                             const std::string& partition) {
  Engine engine;
  engine.config = cfg;
  engine.store = load_store(store);
  engine.kg = load_graph(graph);
  engine.partition = load_partition(partition);
  engine.entity_aliases = load_alias_file(cfg.entity_alias_path);
  engine.predicate_aliases = load_alias_file(cfg.predicate_alias_path);
  engine.prompts = cfg.prompts_dir.empty() ? builtin_prompts()
                                           : load_prompt_dir(cfg.prompts_dir);
  engine.history =
      cfg.history_path.empty()
          ? SourceHistory(cfg.history_init_h, cfg.history_default_prior)
          : load_history(cfg.history_path);
  return engine;
}

int run_ingest(const Shared& shared, const std::string& manifest,
               const std::string& out, const std::string& on_error) {
  const EngineConfig cfg = resolve_config(shared);
  const auto docs = load_manifest(resolve_manifest(manifest));

  IngestOptions opts;
  opts.chunk_size = cfg.chunk_size;
  opts.chunk_overlap = cfg.chunk_overlap;
  opts.workers = cfg.workers;
  opts.fail_fast = on_error == "fail";

  RecordStore store;
  const IngestReport report = fuse_sources(docs, store, opts);
  save_store(store, out);

  std::cout << "ingested " << report.parsed << " of " << docs.size()
            << " documents -> " << out << "\n";
  for (const auto& f : report.failures)
    std::cerr << "skipped " << f.source_id << "/" << f.name << ": "
              << f.message << "\n";
  return 0;
}

int run_build(const Shared& shared, const std::string& manifest,
              const std::string& out, const std::string& store_out,
              const std::string& line_graph_out,
              const std::string& partition_out) {
  EngineConfig cfg = resolve_config(shared);
  cfg.validate();
  const auto docs = load_manifest(resolve_manifest(manifest));
  auto client = make_client(cfg);
  const Engine engine = build_engine(docs, *client, cfg);

  save_graph(engine.kg, out);
  if (!store_out.empty()) save_store(engine.store, store_out);
  if (!partition_out.empty()) save_partition(engine.partition, partition_out);
  if (!line_graph_out.empty())
    save_line_graph(to_line_graph(engine.kg, cfg.degree_cap), line_graph_out);

  std::cout << "built graph: " << engine.kg.entities().size() << " entities, "
            << engine.kg.triple_count() << " triples, "
            << engine.partition.subgraphs.size() << " homologous subgraphs -> "
            << out << "\n";
  return 0;
}

int run_match(const Shared& shared, const std::string& graph,
              const std::string& out,
              const std::optional<std::size_t>& min_sources) {
  const EngineConfig cfg = resolve_config(shared);
  const KnowledgeGraph g = load_graph(graph);

  HomologyOptions opts;
  opts.min_members = cfg.min_members;
  opts.min_sources = min_sources.value_or(cfg.min_sources);
  opts.predicate_aliases = load_alias_file(cfg.predicate_alias_path);

  const HomologyPartition partition = match_homologous(g, opts);
  save_partition(partition, out);
  std::cout << "matched " << partition.subgraphs.size() << " subgraphs, "
            << partition.isolated.size() << " isolated triples -> " << out
            << "\n";
  return 0;
}

int run_query(const Shared& shared, const std::string& store,
              const std::string& graph, const std::string& partition,
              const std::string& query, const std::string& mode_name,
              const std::string& out) {
  EngineConfig cfg = resolve_config(shared);
  cfg.validate();
  const PipelineMode mode = pipeline_mode_from_string(mode_name);
  const Engine engine = engine_from_artifacts(cfg, store, graph, partition);
  auto client = make_client(cfg);

  const Answer answer = answer_query(query, engine, *client, mode);
  const std::string body = answer_to_json(answer).dump(2) + "\n";
  if (!out.empty()) write_file_atomic(out, body);
  std::cout << body;
  return 0;
}

int run_eval(const Shared& shared, const std::string& manifest,
             const std::string& queries_path, const std::string& out,
             const std::string& mode_name, const std::string& perturb_kind,
             double rate, const std::vector<std::size_t>& ks) {
  EngineConfig cfg = resolve_config(shared);
  cfg.validate();
  const auto docs = load_manifest(resolve_manifest(manifest));
  const auto queries = load_queries(queries_path);

  SuiteOptions opts;
  opts.mode = pipeline_mode_from_string(mode_name);
  if (!ks.empty()) opts.recall_ks = ks;
  if (!perturb_kind.empty())
    opts.perturbation = PerturbationSpec{
        perturbation_kind_from_string(perturb_kind), rate, cfg.seed};

  const EvalReport report = run_suite(docs, queries, cfg, opts);
  write_file_atomic(out, eval_report_to_json(report));

  std::cout << "mode=" << to_string(report.mode)
            << " F1=" << report.aggregate.f1
            << " P=" << report.aggregate.precision
            << " R=" << report.aggregate.recall << " queries=" << queries.size()
            << " failed=" << report.failed_queries << " -> " << out << "\n";
  return 0;
}

int run_perturb(const Shared& shared, const std::string& graph,
                const std::string& out, const std::string& kind_name,
                double rate, const std::string& queries_path) {
  const EngineConfig cfg = resolve_config(shared);
  const KnowledgeGraph g = load_graph(graph);

  PerturbationSpec spec;
  spec.kind = perturbation_kind_from_string(kind_name);
  spec.rate = rate;
  spec.seed = cfg.seed;

  KnowledgeGraph result;
  if (spec.kind == PerturbationKind::mask_relations) {
    std::vector<TripleId> protected_ids;
    if (!queries_path.empty())
      protected_ids = gold_supporting_triples(g, load_queries(queries_path));
    result = perturb_mask(g, spec, protected_ids);
  } else {
    result = perturb_duplicate_shuffle(g, spec);
  }

  save_graph(result, out);
  std::cout << to_string(spec.kind) << " rate=" << rate << ": "
            << g.triple_count() << " -> " << result.triple_count()
            << " triples -> " << out << "\n";
  return 0;
}

int run_sweep(const Shared& shared, const std::string& manifest,
              const std::string& queries_path, const std::string& out,
              const std::string& mode_name, const std::vector<double>& alphas) {
  EngineConfig cfg = resolve_config(shared);
  cfg.validate();
  const auto docs = load_manifest(resolve_manifest(manifest));
  const auto queries = load_queries(queries_path);

  SuiteOptions opts;
  opts.mode = pipeline_mode_from_string(mode_name);

  const auto rows = sweep_alpha(docs, queries, cfg, alphas, opts);
  write_file_atomic(out, sweep_to_json(rows));

  std::cout << "alpha\tf1\tquery_time_s\tauthority_calls\thistory_lookups\n";
  for (const auto& row : rows)
    std::cout << row.alpha << "\t" << row.f1 << "\t" << row.query_time_s
              << "\t" << row.authority_calls << "\t" << row.history_lookups
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-source knowledge fusion and confidence-filtered QA"};
  app.require_subcommand(1);
  int rc = 0;

  Shared sh_ingest;
  std::string ingest_manifest, ingest_out, ingest_on_error = "fail";
  auto* cmd_ingest =
      app.add_subcommand("ingest", "normalize a document manifest into a record store");
  add_shared(cmd_ingest, sh_ingest);
  cmd_ingest->add_option("--manifest", ingest_manifest, "manifest.json or its directory")
      ->required();
  cmd_ingest->add_option("--out", ingest_out, "record store output path")->required();
  cmd_ingest->add_option("--on-error", ingest_on_error, "fail | skip")
      ->check(CLI::IsMember({"fail", "skip"}));
  cmd_ingest->callback([&] {
    rc = run_ingest(sh_ingest, ingest_manifest, ingest_out, ingest_on_error);
  });

  Shared sh_build;
  std::string build_manifest, build_out, build_store, build_lg, build_part;
  auto* cmd_build =
      app.add_subcommand("build", "ingest, extract and fuse a knowledge graph");
  add_shared(cmd_build, sh_build);
  add_fixtures(cmd_build, sh_build);
  cmd_build->add_option("--manifest", build_manifest, "manifest.json or its directory")
      ->required();
  cmd_build->add_option("--out", build_out, "graph dump output path")->required();
  cmd_build->add_option("--store", build_store, "also dump the record store");
  cmd_build->add_option("--line-graph", build_lg, "also dump the line graph");
  cmd_build->add_option("--partition", build_part, "also dump the homology partition");
  cmd_build->callback([&] {
    rc = run_build(sh_build, build_manifest, build_out, build_store, build_lg,
                   build_part);
  });

  Shared sh_match;
  std::string match_graph, match_out;
  std::optional<std::size_t> match_min_sources;
  auto* cmd_match =
      app.add_subcommand("match", "partition a graph dump into homologous subgraphs");
  add_shared(cmd_match, sh_match);
  cmd_match->add_option("--graph", match_graph, "graph dump input")->required();
  cmd_match->add_option("--out", match_out, "partition output path")->required();
  cmd_match->add_option("--min-sources", match_min_sources,
                        "distinct sources required per subgraph");
  cmd_match->callback([&] {
    rc = run_match(sh_match, match_graph, match_out, match_min_sources);
  });

  Shared sh_query;
  std::string query_store, query_graph, query_partition, query_text,
      query_mode = "full", query_out;
  bool query_json = false;
  auto* cmd_query =
      app.add_subcommand("query", "answer a question over dumped artifacts");
  add_shared(cmd_query, sh_query);
  add_fixtures(cmd_query, sh_query);
  cmd_query->add_option("--store", query_store, "record store dump")->required();
  cmd_query->add_option("--graph", query_graph, "graph dump")->required();
  cmd_query->add_option("--partition", query_partition, "partition dump")->required();
  cmd_query->add_option("--q", query_text, "query text")->required();
  cmd_query->add_option("--mode", query_mode,
                        "full | no_mka | no_graph_level | no_node_level | no_mcc");
  cmd_query->add_option("--out", query_out, "also write the answer JSON here");
  cmd_query->add_flag("--json", query_json, "emit JSON (default output format)");
  cmd_query->callback([&] {
    rc = run_query(sh_query, query_store, query_graph, query_partition,
                   query_text, query_mode, query_out);
  });

  Shared sh_eval;
  std::string eval_manifest, eval_queries, eval_out, eval_mode = "full",
                                                     eval_perturb_kind;
  double eval_rate = 0.0;
  std::vector<std::size_t> eval_ks;
  auto* cmd_eval =
      app.add_subcommand("eval", "run a query suite and write an evaluation report");
  add_shared(cmd_eval, sh_eval);
  add_fixtures(cmd_eval, sh_eval);
  cmd_eval->add_option("--manifest", eval_manifest, "manifest.json or its directory")
      ->required();
  cmd_eval->add_option("--queries", eval_queries, "query cases JSON file")->required();
  cmd_eval->add_option("--out", eval_out, "report output path")->required();
  cmd_eval->add_option("--mode", eval_mode,
                       "full | no_mka | no_graph_level | no_node_level | no_mcc");
  cmd_eval->add_option("--perturb", eval_perturb_kind,
                       "mask_relations | duplicate_shuffle");
  cmd_eval->add_option("--rate", eval_rate, "perturbation rate");
  cmd_eval->add_option("--ks", eval_ks, "recall@k cutoffs")->delimiter(',');
  cmd_eval->callback([&] {
    rc = run_eval(sh_eval, eval_manifest, eval_queries, eval_out, eval_mode,
                  eval_perturb_kind, eval_rate, eval_ks);
  });

  Shared sh_perturb;
  std::string perturb_graph, perturb_out, perturb_kind, perturb_queries;
  double perturb_rate = 0.0;
  auto* cmd_perturb =
      app.add_subcommand("perturb", "mask or duplicate-shuffle a graph dump");
  add_shared(cmd_perturb, sh_perturb);
  cmd_perturb->add_option("--graph", perturb_graph, "graph dump input")->required();
  cmd_perturb->add_option("--out", perturb_out, "perturbed graph output")->required();
  cmd_perturb->add_option("--kind", perturb_kind,
                          "mask_relations | duplicate_shuffle")
      ->required();
  cmd_perturb->add_option("--rate", perturb_rate, "perturbation rate")->required();
  cmd_perturb->add_option("--queries", perturb_queries,
                          "query cases whose gold answers are protected");
  cmd_perturb->callback([&] {
    rc = run_perturb(sh_perturb, perturb_graph, perturb_out, perturb_kind,
                     perturb_rate, perturb_queries);
  });

  Shared sh_sweep;
  std::string sweep_manifest, sweep_queries, sweep_out, sweep_mode = "full";
  std::vector<double> sweep_alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto* cmd_sweep = app.add_subcommand(
      "sweep-alpha", "re-run the suite across authority mixing weights");
  add_shared(cmd_sweep, sh_sweep);
  add_fixtures(cmd_sweep, sh_sweep);
  cmd_sweep->add_option("--manifest", sweep_manifest, "manifest.json or its directory")
      ->required();
  cmd_sweep->add_option("--queries", sweep_queries, "query cases JSON file")
      ->required();
  cmd_sweep->add_option("--out", sweep_out, "sweep table output path")->required();
  cmd_sweep->add_option("--mode", sweep_mode,
                        "full | no_mka | no_graph_level | no_node_level | no_mcc");
  cmd_sweep->add_option("--alphas", sweep_alphas, "alpha values to sweep")
      ->delimiter(',');
  cmd_sweep->callback([&] {
    rc = run_sweep(sh_sweep, sweep_manifest, sweep_queries, sweep_out,
                   sweep_mode, sweep_alphas);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const multirag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
