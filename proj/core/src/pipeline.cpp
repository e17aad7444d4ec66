#include "multirag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "multirag/io.hpp"

namespace multirag {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> string_array(const nlohmann::json& node,
                                      const char* field) {
  std::vector<std::string> out;
  if (!node.contains(field)) return out;
  const auto& arr = node.at(field);
  if (!arr.is_array())
    raise(Errc::reply_parse_error,
          std::string("logic form field '") + field + "' must be an array");
  for (const auto& item : arr) {
    if (!item.is_string())
      raise(Errc::reply_parse_error,
            std::string("logic form entries in '") + field +
                "' must be strings");
    if (!is_blank(item.get<std::string>()))
      out.push_back(item.get<std::string>());
  }
  return out;
}

// Rewrites entity ids through the alias table so cross-record surface
// variants land on one canonical id before fusion.
void apply_aliases_to_triples(std::vector<Triple>& triples,
                              const AliasMap& aliases) {
  if (aliases.empty()) return;
  for (Triple& tr : triples) {
    tr.subject = canonical_form(aliases.resolve(tr.subject));
    if (tr.object.is_entity())
      tr.object.value = canonical_form(aliases.resolve(tr.object.value));
  }
}

struct RetrievalScore {
  const NormalizedRecord* record = nullptr;
  std::size_t matches = 0;
};

}  // namespace

std::string_view to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::full: return "full";
    case PipelineMode::no_mka: return "no_mka";
    case PipelineMode::no_graph_level: return "no_graph_level";
    case PipelineMode::no_node_level: return "no_node_level";
    case PipelineMode::no_mcc: return "no_mcc";
  }
  return "full";
}

PipelineMode pipeline_mode_from_string(std::string_view s) {
  if (s == "full") return PipelineMode::full;
  if (s == "no_mka") return PipelineMode::no_mka;
  if (s == "no_graph_level") return PipelineMode::no_graph_level;
  if (s == "no_node_level") return PipelineMode::no_node_level;
  if (s == "no_mcc") return PipelineMode::no_mcc;
  raise(Errc::config_error, "unknown pipeline mode: " + std::string(s));
}

Engine build_engine(std::span<const RawDocument> docs,
                    GenerationClient& client, const EngineConfig& cfg) {
  Engine engine;
  engine.config = cfg;
  engine.prompts =
      cfg.prompts_dir.empty() ? builtin_prompts() : load_prompt_dir(cfg.prompts_dir);
  if (!cfg.entity_alias_path.empty())
    engine.entity_aliases = AliasMap::from_file(cfg.entity_alias_path);
  if (!cfg.predicate_alias_path.empty())
    engine.predicate_aliases = AliasMap::from_file(cfg.predicate_alias_path);

  IngestOptions ingest;
  ingest.chunk_size = cfg.chunk_size;
  ingest.chunk_overlap = cfg.chunk_overlap;
  ingest.workers = cfg.workers;
  fuse_sources(docs, engine.store, ingest);

  // Per-record extraction: deterministic for structured/tree records,
  // client-backed for text.
  std::vector<RecordExtraction> extractions;
  for (const NormalizedRecord& record : engine.store.records()) {
    const std::string type = record.jsc.value("@type", std::string{});
    if (type == "text") {
      RecordExtraction ex;
      ex.entities = extract_entities(record, client, engine.prompts.ner);
      auto triples =
          extract_triples(record, ex.entities, client, engine.prompts.triple);
      ex.triples = std::move(triples.triples);
      extractions.push_back(std::move(ex));
    } else {
      extractions.push_back(extract_rule_based(record));
    }
  }

  // Global standardization over the union of text-derived entities; the
  // alias replies fold surface variants into canonical ids everywhere.
  if (cfg.standardize) {
    std::vector<Entity> all;
    for (const auto& ex : extractions)
      all.insert(all.end(), ex.entities.begin(), ex.entities.end());
    if (!all.empty()) {
      std::vector<Entity> merged =
          standardize_entities(all, client, engine.prompts.standardize);
      // Derive the applied alias map: old label → merged label.
      AliasMap applied;
      std::set<std::string> merged_ids;
      for (const auto& ent : merged) merged_ids.insert(ent.id);
      for (const auto& ent : merged)
        for (const auto& alias : ent.aliases) applied.add(alias, ent.label);
      for (auto& ex : extractions) {
        ex.entities = apply_alias_map(ex.entities, applied);
        apply_aliases_to_triples(ex.triples, applied);
      }
    }
  }
  for (auto& ex : extractions)
    apply_aliases_to_triples(ex.triples, engine.entity_aliases);

  engine.kg = build_kb(extractions, cfg.promote_min_sources);

  HomologyOptions homology;
  homology.min_members = cfg.min_members;
  homology.min_sources = cfg.min_sources;
  homology.predicate_aliases = engine.predicate_aliases;
  engine.partition = match_homologous(engine.kg, homology);

  engine.history =
      cfg.history_path.empty()
          ? SourceHistory(cfg.history_init_h, cfg.history_default_prior)
          : load_history(cfg.history_path);
  return engine;
}

LogicForm generate_logic_form(const std::string& query,
                              GenerationClient& client,
                              const AliasMap& entity_aliases) {
  if (is_blank(query)) raise(Errc::empty_query, "query text is blank");

  GenerationRequest req;
  req.kind = RequestKind::logic_form;
  req.prompt = render_logic_form_prompt(query);
  req.key = make_request_key(RequestKind::logic_form, {query});
  const std::string reply = client.complete(req);

  auto parsed = nlohmann::json::parse(reply, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    raise(Errc::reply_parse_error,
          "logic form reply is not a JSON object: '" + reply + "'");

  LogicForm lf;
  for (auto& surface : string_array(parsed, "entities"))
    lf.entities.push_back(entity_aliases.resolve(surface));
  lf.relations = string_array(parsed, "relations");
  lf.intent = parsed.value("intent", std::string{});
  return lf;
}

std::vector<const NormalizedRecord*> retrieve_documents(
    const LogicForm& lf, const RecordStore& store) {
  std::set<std::string> entity_terms;
  for (const auto& e : lf.entities) entity_terms.insert(canonical_form(e));
  std::set<std::string> relation_terms;
  for (const auto& r : lf.relations)
    relation_terms.insert(normalize_predicate(r));

  std::vector<RetrievalScore> scored;
  for (const NormalizedRecord& record : store.records()) {
    std::set<std::string> hits;
    auto hit_entity = [&](const std::string& canonical) {
      if (entity_terms.contains(canonical)) hits.insert("e:" + canonical);
    };
    auto hit_relation = [&](const std::string& normalized) {
      if (relation_terms.contains(normalized)) hits.insert("r:" + normalized);
    };

    if (record.cols_index) {
      for (const auto& [attribute, index] : *record.cols_index)
        hit_relation(normalize_predicate(attribute));
    }
    const std::string type = record.jsc.value("@type", std::string{});
    if (type == "text") {
      const std::string canonical_text =
          canonical_form(record.jsc.at("text").get<std::string>());
      for (const auto& term : entity_terms)
        if (!term.empty() && canonical_text.find(term) != std::string::npos)
          hits.insert("e:" + term);
      for (const auto& term : relation_terms) {
        for (const auto& tok : tokenize(canonical_text))
          if (normalize_predicate(tok.text) == term) {
            hits.insert("r:" + term);
            break;
          }
      }
    } else {
      for_each_leaf(record.jsc, [&](const std::string& path,
                                    const std::string& value, ValueType) {
        hit_entity(canonical_form(value));
        std::size_t dot = path.rfind('.');
        hit_relation(normalize_predicate(
            dot == std::string::npos ? path : path.substr(dot + 1)));
      });
    }

    if (!hits.empty()) scored.push_back({&record, hits.size()});
  }

  std::sort(scored.begin(), scored.end(),
            [](const RetrievalScore& a, const RetrievalScore& b) {
              if (a.matches != b.matches) return a.matches > b.matches;
              return a.record->id < b.record->id;
            });
  std::vector<const NormalizedRecord*> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.record);
  return out;
}

std::string assemble_context(const Answer& answer) {
  std::ostringstream out;
  out << "Trusted evidence:\n";
  if (answer.supporting.empty()) {
    out << "  (no trusted evidence)\n";
  } else {
    for (const auto& s : answer.supporting) {
      out << "  - " << s.triple << " [source=" << s.source << ", confidence="
          << s.confidence << "]\n";
    }
  }
  if (!answer.conflicts.empty()) {
    out << "Untrusted conflicting claims (do not rely on these):\n";
    for (const auto& c : answer.conflicts) {
      out << "  - " << c.triple << " [source=" << c.source << ", confidence="
          << c.confidence << ", " << c.reason << "]\n";
    }
  }
  if (answer.low_evidence)
    out << "Note: low-evidence answer; no cross-source confirmation.\n";
  return out.str();
}

namespace {

Answer::Support make_support(const KnowledgeGraph& g, TripleId id,
                             double confidence) {
  return {id, confidence, triple_text(g, id), member_source(g, id)};
}

// Flat base-graph retrieval: triples about the query's entities, optionally
// narrowed by its relations. Used by the no_mka ablation and the
// NoCandidates fallback.
std::vector<TripleId> base_graph_members(const Engine& engine,
                                         const LogicForm& lf) {
  std::set<std::string> subjects;
  for (const auto& surface : lf.entities) {
    std::string id = canonical_form(engine.entity_aliases.resolve(surface));
    if (engine.kg.find_entity(id)) subjects.insert(std::move(id));
  }
  std::set<std::string> attributes;
  for (const auto& surface : lf.relations)
    attributes.insert(predicate_group_key(surface, engine.predicate_aliases));

  std::set<TripleId> ids;
  for (const auto& subject : subjects)
    for (TripleId t : engine.kg.incident_triples(subject)) ids.insert(t);

  std::vector<TripleId> out;
  for (TripleId t : ids) {
    if (!attributes.empty()) {
      const std::string key = predicate_group_key(
          engine.kg.triple(t).predicate, engine.predicate_aliases);
      if (!attributes.contains(key)) continue;
    }
    out.push_back(t);
  }
  if (out.empty()) {
    // Nothing matched the relation filter; fall back to the plain
    // entity neighborhood so the answer still has a subgraph to cite.
    out.assign(ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string generate_answer_text(const std::string& query,
                                 const std::string& context,
                                 GenerationClient& client) {
  GenerationRequest req;
  req.kind = RequestKind::answer;
  req.prompt = render_answer_prompt(query, context);
  req.key = make_request_key(RequestKind::answer, {query});
  return client.complete(req);
}

}  // namespace

Answer answer_query(const std::string& query, const Engine& engine,
                    GenerationClient& client, PipelineMode mode) {
  Answer answer;
  const auto t_total = Clock::now();

  auto t_stage = Clock::now();
  LogicForm lf = generate_logic_form(query, client, engine.entity_aliases);
  answer.timings["logic_form"] = seconds_since(t_stage);

  t_stage = Clock::now();
  retrieve_documents(lf, engine.store);  // deterministic-order doc shortlist
  answer.timings["retrieve"] = seconds_since(t_stage);

  t_stage = Clock::now();
  bool fallback = mode == PipelineMode::no_mka;
  std::vector<HomologousSubgraph> candidates;
  if (!fallback) {
    try {
      candidates = candidates_for_query(engine.partition, lf,
                                        engine.entity_aliases,
                                        engine.predicate_aliases);
    } catch (const Error& e) {
      if (e.code() != Errc::no_candidates) throw;
      fallback = true;
      answer.low_evidence = true;
    }
  }

  if (fallback) {
    for (TripleId t : base_graph_members(engine, lf))
      answer.supporting.push_back(make_support(engine.kg, t, 0.0));
  } else {
    MccOptions opts;
    opts.graph_gating = mode != PipelineMode::no_graph_level &&
                        mode != PipelineMode::no_mcc;
    opts.node_filtering = mode != PipelineMode::no_node_level &&
                          mode != PipelineMode::no_mcc;
    opts.score_nodes = mode != PipelineMode::no_mcc;

    MccResult result =
        mcc(candidates, engine.kg, engine.config.confidence, &client,
            engine.history, opts);
    answer.history_lookups = result.history_lookups;
    for (const auto& group : result.groups) {
      if (group.graph_confidence)
        answer.graph_confidences[group.key] = *group.graph_confidence;
      for (const auto& nc : group.scored) {
        if (nc.kept)
          answer.supporting.push_back(
              make_support(engine.kg, nc.member, nc.total));
        else
          answer.conflicts.push_back({nc.member, nc.total,
                                      triple_text(engine.kg, nc.member),
                                      member_source(engine.kg, nc.member),
                                      nc.reason});
      }
    }
    std::sort(answer.supporting.begin(), answer.supporting.end(),
              [](const Answer::Support& a, const Answer::Support& b) {
                if (a.confidence != b.confidence)
                  return a.confidence > b.confidence;
                return a.member < b.member;
              });
  }
  answer.timings["confidence"] = seconds_since(t_stage);

  t_stage = Clock::now();
  answer.text = generate_answer_text(query, assemble_context(answer), client);
  answer.timings["generate"] = seconds_since(t_stage);
  answer.timings["total"] = seconds_since(t_total);
  return answer;
}

std::unique_ptr<GenerationClient> make_client(const EngineConfig& cfg) {
  std::unique_ptr<GenerationClient> client;
  if (cfg.client_mode == "mock") {
    if (cfg.mock_fixtures.empty())
      raise(Errc::config_error, "mock client requires mock_fixtures");
    std::string path = cfg.mock_fixtures;
    if (std::filesystem::is_directory(path))
      path = (std::filesystem::path(path) / "mock_replies.json").string();
    client = std::make_unique<MockClient>(path);
  } else if (cfg.client_mode == "live") {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    client = std::make_unique<HttpClient>(cfg.endpoint, cfg.model,
                                          key ? key : "");
  } else {
    raise(Errc::config_error, "unknown client_mode: " + cfg.client_mode);
  }
  if (cfg.request_budget > 0) client->set_budget(cfg.request_budget);
  return client;
}

}  // namespace multirag
