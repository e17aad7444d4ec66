#include "multirag/eval.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "multirag/homology.hpp"
#include "multirag/io.hpp"

namespace multirag {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Answer matching rule: case-insensitive, interior whitespace collapsed to
// single spaces, outer whitespace trimmed.
std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// Normalized forms in rank order, first occurrence kept.
std::vector<std::string> normalized_ranked(
    std::span<const std::string> predicted) {
  std::vector<std::string> ranked;
  std::set<std::string> seen;
  for (const auto& p : predicted) {
    std::string n = normalize_answer(p);
    if (n.empty()) continue;
    if (seen.insert(n).second) ranked.push_back(std::move(n));
  }
  return ranked;
}

std::vector<Entity> entity_table(const KnowledgeGraph& g) {
  std::vector<Entity> out;
  out.reserve(g.entities().size());
  for (const auto& [id, ent] : g.entities()) out.push_back(ent);
  return out;
}

HomologyPartition rematch(const Engine& engine) {
  HomologyOptions hopts;
  hopts.min_members = engine.config.min_members;
  hopts.min_sources = engine.config.min_sources;
  hopts.predicate_aliases = engine.predicate_aliases;
  return match_homologous(engine.kg, hopts);
}

Json metrics_to_json(const Metrics& m) {
  Json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  Json rk = Json::object();
  for (const auto& [k, v] : m.recall_at_k) rk[std::to_string(k)] = v;
  j["recall_at_k"] = rk;
  j["query_time_s"] = m.query_time_s;
  return j;
}

}  // namespace

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::mask_relations:
      return "mask_relations";
    case PerturbationKind::duplicate_shuffle:
      return "duplicate_shuffle";
  }
  return "mask_relations";
}

PerturbationKind perturbation_kind_from_string(std::string_view text) {
  if (text == "mask_relations") return PerturbationKind::mask_relations;
  if (text == "duplicate_shuffle") return PerturbationKind::duplicate_shuffle;
  raise(Errc::config_error,
        "unknown perturbation kind: " + std::string(text));
}

std::vector<TripleId> gold_supporting_triples(
    const KnowledgeGraph& g, std::span<const QueryCase> queries) {
  std::set<std::string> gold_forms;
  for (const auto& qc : queries)
    for (const auto& alt : qc.gold) gold_forms.insert(normalize_answer(alt));

  std::vector<TripleId> out;
  for (TripleId id = 0; id < g.triple_count(); ++id) {
    if (gold_forms.count(normalize_answer(member_content(g, id))))
      out.push_back(id);
  }
  return out;
}

std::vector<QueryCase> load_queries(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    raise(Errc::io_error, path + ": " + e.what());
  }
  if (!doc.is_array())
    raise(Errc::io_error, path + ": expected a JSON array of query cases");

  std::vector<QueryCase> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("query") ||
        !item.contains("gold"))
      raise(Errc::io_error, path + ": query case needs 'query' and 'gold'");
    QueryCase qc;
    qc.query = item.at("query").get<std::string>();
    for (const auto& alt : item.at("gold"))
      qc.gold.push_back(alt.get<std::string>());
    if (qc.gold.empty())
      raise(Errc::io_error, path + ": gold set is empty for " + qc.query);
    if (item.contains("domain")) qc.domain = item.at("domain").get<std::string>();
    out.push_back(std::move(qc));
  }
  return out;
}

Metrics compute_metrics(std::span<const std::string> predicted,
                        std::span<const std::string> gold,
                        std::span<const std::size_t> ks,
                        double query_time_s) {
  Metrics m;
  m.query_time_s = query_time_s;

  const std::vector<std::string> ranked = normalized_ranked(predicted);
  std::set<std::string> gold_set;
  for (const auto& g : gold) gold_set.insert(normalize_answer(g));

  std::size_t tp = 0;
  for (const auto& p : ranked) tp += gold_set.count(p);

  if (!ranked.empty())
    m.precision = static_cast<double>(tp) / static_cast<double>(ranked.size());
  if (!gold_set.empty())
    m.recall = static_cast<double>(tp) / static_cast<double>(gold_set.size());
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);

  for (std::size_t k : ks) {
    std::set<std::string> hit;
    const std::size_t limit = std::min(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (gold_set.count(ranked[i])) hit.insert(ranked[i]);
    m.recall_at_k[k] =
        gold_set.empty()
            ? 0.0
            : static_cast<double>(hit.size()) /
                  static_cast<double>(gold_set.size());
  }
  return m;
}

KnowledgeGraph perturb_mask(const KnowledgeGraph& g,
                            const PerturbationSpec& spec,
                            std::span<const TripleId> protected_ids) {
  if (spec.kind != PerturbationKind::mask_relations)
    raise(Errc::precondition, "perturb_mask requires kind=mask_relations");
  if (spec.rate < 0.0)
    raise(Errc::precondition, "mask rate must be non-negative");
  if (spec.rate >= 1.0)
    raise(Errc::rate_too_high,
          "mask rate " + std::to_string(spec.rate) +
              " would remove protected triples");

  const std::set<TripleId> prot(protected_ids.begin(), protected_ids.end());
  std::vector<TripleId> maskable;
  for (TripleId id = 0; id < g.triple_count(); ++id)
    if (!prot.count(id)) maskable.push_back(id);

  const auto n_remove = static_cast<std::size_t>(
      std::floor(spec.rate * static_cast<double>(maskable.size())));
  std::mt19937_64 rng(spec.seed);
  std::shuffle(maskable.begin(), maskable.end(), rng);
  const std::set<TripleId> removed(maskable.begin(),
                                   maskable.begin() +
                                       static_cast<std::ptrdiff_t>(n_remove));

  std::vector<Triple> kept;
  kept.reserve(g.triple_count() - n_remove);
  for (TripleId id = 0; id < g.triple_count(); ++id)
    if (!removed.count(id)) kept.push_back(g.triple(id));

  return KnowledgeGraph(entity_table(g), std::move(kept));
}

KnowledgeGraph perturb_duplicate_shuffle(const KnowledgeGraph& g,
                                         const PerturbationSpec& spec) {
  if (spec.kind != PerturbationKind::duplicate_shuffle)
    raise(Errc::precondition,
          "perturb_duplicate_shuffle requires kind=duplicate_shuffle");
  if (spec.rate < 0.0)
    raise(Errc::precondition, "shuffle rate must be non-negative");

  const std::size_t n = g.triple_count();
  std::vector<Triple> out = g.triples();
  const auto n_copies = static_cast<std::size_t>(
      std::floor(spec.rate * static_cast<double>(n)));
  if (n_copies == 0) return KnowledgeGraph(entity_table(g), std::move(out));

  std::set<ObjectTerm> pool_set;
  for (const auto& t : g.triples()) pool_set.insert(t.object);
  const std::vector<ObjectTerm> pool(pool_set.begin(), pool_set.end());

  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < n_copies; ++i) {
    const auto ti = static_cast<std::size_t>(rng() % n);
    Triple copy = g.triple(static_cast<TripleId>(ti));
    if (pool.size() == 1 && pool.front() == copy.object)
      raise(Errc::precondition,
            "object pool has no alternative to shuffle onto");
    std::size_t idx = static_cast<std::size_t>(rng() % pool.size());
    while (pool[idx] == copy.object) idx = (idx + 1) % pool.size();
    copy.object = pool[idx];
    for (auto& pv : copy.provenance) pv.ref += "#shuffled";
    out.push_back(std::move(copy));
  }
  return KnowledgeGraph(entity_table(g), std::move(out));
}

EvalReport run_suite(std::span<const RawDocument> docs,
                     std::span<const QueryCase> queries,
                     const EngineConfig& cfg, const SuiteOptions& opts) {
  EvalReport rep;
  rep.mode = opts.mode;

  const auto t_prep = Clock::now();
  std::unique_ptr<GenerationClient> client = make_client(cfg);
  Engine engine = build_engine(docs, *client, cfg);

  if (opts.perturbation) {
    const PerturbationSpec& spec = *opts.perturbation;
    if (spec.kind == PerturbationKind::mask_relations) {
      engine.kg = perturb_mask(engine.kg, spec,
                               gold_supporting_triples(engine.kg, queries));
    } else {
      engine.kg = perturb_duplicate_shuffle(engine.kg, spec);
    }
    engine.partition = rematch(engine);
  }
  rep.prep_time_s = seconds_since(t_prep);

  const ClientStats& st = client->stats();
  const bool subtract_client =
      opts.exclude_client_time && cfg.client_mode == "mock";

  for (const auto& qc : queries) {
    QueryResult qr;
    qr.query = qc.query;
    const std::uint64_t ns_before = st.client_time_ns.load();
    const auto t_query = Clock::now();
    try {
      const Answer ans = answer_query(qc.query, engine, *client, opts.mode);
      double elapsed = seconds_since(t_query);
      if (subtract_client) {
        elapsed -= static_cast<double>(st.client_time_ns.load() - ns_before) *
                   1e-9;
        if (elapsed < 0.0) elapsed = 0.0;
      }
      std::vector<std::string> predicted;
      predicted.reserve(ans.supporting.size());
      for (const auto& s : ans.supporting)
        predicted.push_back(member_content(engine.kg, s.member));
      qr.metrics = compute_metrics(predicted, qc.gold, opts.recall_ks, elapsed);
      qr.predicted = normalized_ranked(predicted);
      rep.history_lookups += ans.history_lookups;
    } catch (const Error& e) {
      qr.failed = true;
      qr.error = e.what();
      qr.metrics.query_time_s = seconds_since(t_query);
      ++rep.failed_queries;
    }
    rep.total_query_time_s += qr.metrics.query_time_s;
    rep.per_query.push_back(std::move(qr));
  }

  const auto n = static_cast<double>(queries.size());
  if (!queries.empty()) {
    for (const auto& qr : rep.per_query) {
      rep.aggregate.precision += qr.metrics.precision / n;
      rep.aggregate.recall += qr.metrics.recall / n;
      rep.aggregate.f1 += qr.metrics.f1 / n;
      for (std::size_t k : opts.recall_ks) {
        const auto it = qr.metrics.recall_at_k.find(k);
        rep.aggregate.recall_at_k[k] +=
            (it != qr.metrics.recall_at_k.end() ? it->second : 0.0) / n;
      }
    }
    rep.aggregate.query_time_s = rep.total_query_time_s / n;
  }

  rep.client_calls = st.calls_total.load();
  rep.authority_calls = st.calls_authority.load();
  rep.client_time_s = static_cast<double>(st.client_time_ns.load()) * 1e-9;
  return rep;
}

std::vector<SweepRow> sweep_alpha(std::span<const RawDocument> docs,
                                  std::span<const QueryCase> queries,
                                  const EngineConfig& cfg,
                                  std::span<const double> alphas,
                                  const SuiteOptions& opts) {
  std::vector<SweepRow> rows;
  for (double alpha : alphas) {
    if (alpha < 0.0 || alpha > 1.0)
      raise(Errc::precondition,
            "alpha out of [0,1]: " + std::to_string(alpha));
    EngineConfig run_cfg = cfg;
    run_cfg.confidence.alpha = alpha;
    const EvalReport rep = run_suite(docs, queries, run_cfg, opts);
    rows.push_back({alpha, rep.aggregate.f1, rep.total_query_time_s,
                    rep.authority_calls, rep.history_lookups});
  }
  return rows;
}

std::string eval_report_to_json(const EvalReport& report) {
  Json j;
  j["mode"] = std::string(to_string(report.mode));
  j["aggregate"] = metrics_to_json(report.aggregate);
  j["failed_queries"] = report.failed_queries;
  j["prep_time_s"] = report.prep_time_s;
  j["total_query_time_s"] = report.total_query_time_s;
  j["client_calls"] = report.client_calls;
  j["authority_calls"] = report.authority_calls;
  j["history_lookups"] = report.history_lookups;
  j["client_time_s"] = report.client_time_s;
  j["per_query"] = Json::array();
  for (const auto& qr : report.per_query) {
    Json q = metrics_to_json(qr.metrics);
    q["query"] = qr.query;
    q["predicted"] = qr.predicted;
    q["failed"] = qr.failed;
    if (qr.failed) q["error"] = qr.error;
    j["per_query"].push_back(std::move(q));
  }
  return j.dump(2) + "\n";
}

std::string sweep_to_json(std::span<const SweepRow> rows) {
  Json j = Json::array();
  for (const auto& row : rows) {
    Json r;
    r["alpha"] = row.alpha;
    r["f1"] = row.f1;
    r["query_time_s"] = row.query_time_s;
    r["authority_calls"] = row.authority_calls;
    r["history_lookups"] = row.history_lookups;
    j.push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

}  // namespace multirag
