#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multirag/graph.hpp"
#include "multirag/pipeline.hpp"

namespace multirag {

// One benchmark query with its acceptable answer strings. Matching is
// case-insensitive and whitespace-normalized, so "Erin  Morgenstern"
// satisfies gold "erin morgenstern".
struct QueryCase {
  std::string query;
  std::vector<std::string> gold;  // non-empty; any match counts as correct
  std::string domain;             // optional routing hint
};

// Loads a JSON array of {"query", "gold": [...], "domain"?} objects.
std::vector<QueryCase> load_queries(const std::string& path);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;                          // 2PR/(P+R), 0 when P+R == 0
  std::map<std::size_t, double> recall_at_k;
  double query_time_s = 0.0;
};

// Set-based precision/recall over normalized answer strings plus recall@k
// over the ranked prediction order (first occurrence wins on duplicates).
Metrics compute_metrics(std::span<const std::string> predicted,
                        std::span<const std::string> gold,
                        std::span<const std::size_t> ks,
                        double query_time_s);

enum class PerturbationKind { mask_relations, duplicate_shuffle };

std::string_view to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(std::string_view text);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::mask_relations;
  double rate = 0.0;        // fraction of eligible triples affected
  std::uint64_t seed = 42;  // drives the mt19937_64 stream
};

// Triples whose object content matches a gold alternative of any query;
// these are the answer carriers that masking must leave in place.
std::vector<TripleId> gold_supporting_triples(const KnowledgeGraph& g,
                                              std::span<const QueryCase> queries);

// Removes floor(rate * |maskable|) uniformly chosen triples, where maskable
// excludes the protected set (typically the triples carrying gold answers).
// rate >= 1.0 raises Errc::rate_too_high. Entity table is preserved.
KnowledgeGraph perturb_mask(const KnowledgeGraph& g,
                            const PerturbationSpec& spec,
                            std::span<const TripleId> protected_ids);

// Appends floor(rate * |triples|) duplicated triples whose objects are
// re-drawn from the graph's object pool, never equal to the original's
// object. Original triples are untouched.
KnowledgeGraph perturb_duplicate_shuffle(const KnowledgeGraph& g,
                                         const PerturbationSpec& spec);

struct QueryResult {
  std::string query;
  Metrics metrics;
  std::vector<std::string> predicted;  // ranked, deduplicated
  bool failed = false;                 // answer_query raised an Error
  std::string error;
};

struct EvalReport {
  PipelineMode mode = PipelineMode::full;
  std::vector<QueryResult> per_query;
  Metrics aggregate;                 // macro average; failures count as zero
  std::size_t failed_queries = 0;
  double prep_time_s = 0.0;          // engine build + perturbation
  double total_query_time_s = 0.0;   // sum of per-query algorithmic time
  std::uint64_t client_calls = 0;
  std::uint64_t authority_calls = 0;
  std::uint64_t history_lookups = 0;
  double client_time_s = 0.0;
};

struct SuiteOptions {
  PipelineMode mode = PipelineMode::full;
  std::vector<std::size_t> recall_ks = {1, 3, 5};
  std::optional<PerturbationSpec> perturbation;
  // Subtract time spent inside the client from query_time_s (meaningful for
  // mock runs where replies are instant but counted).
  bool exclude_client_time = true;
};

// Builds an engine from the documents, optionally perturbs the fused graph
// (re-matching the homology partition), then answers every query and scores
// it against gold. Source history is read-only during the run.
EvalReport run_suite(std::span<const RawDocument> docs,
                     std::span<const QueryCase> queries,
                     const EngineConfig& cfg, const SuiteOptions& opts);

struct SweepRow {
  double alpha = 0.0;
  double f1 = 0.0;
  double query_time_s = 0.0;
  std::uint64_t authority_calls = 0;  // 0 when alpha == 0 disables the judge
  std::uint64_t history_lookups = 0;  // 0 when alpha == 1 skips history
};

// Re-runs the suite once per alpha value, overriding cfg's authority mix.
std::vector<SweepRow> sweep_alpha(std::span<const RawDocument> docs,
                                  std::span<const QueryCase> queries,
                                  const EngineConfig& cfg,
                                  std::span<const double> alphas,
                                  const SuiteOptions& opts);

// JSON projections used by the CLI's --out files.
std::string eval_report_to_json(const EvalReport& report);
std::string sweep_to_json(std::span<const SweepRow> rows);

}  // namespace multirag
