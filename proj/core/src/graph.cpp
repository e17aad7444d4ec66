#include "multirag/graph.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace multirag {

KnowledgeGraph::KnowledgeGraph(std::vector<Entity> entities,
                               std::vector<Triple> triples)
    : triples_(std::move(triples)) {
  for (auto& ent : entities) {
    std::string id = ent.id;
    // try_emplace leaves `ent` intact when the key is already present.
    auto [it, inserted] = entities_.try_emplace(std::move(id), std::move(ent));
    if (!inserted) {
      const Entity& extra = ent;
      Entity& known = it->second;
      auto adopt = [&](const std::string& form) {
        if (!form.empty() && form != known.label &&
            std::find(known.aliases.begin(), known.aliases.end(), form) ==
                known.aliases.end())
          known.aliases.push_back(form);
      };
      adopt(extra.label);
      for (const auto& alias : extra.aliases) adopt(alias);
    }
  }
  // Endpoints referenced by triples but absent from the entity list get a
  // minimal placeholder so adjacency and lookups stay total.
  auto ensure = [&](const std::string& id, const std::string& label) {
    if (!entities_.contains(id)) {
      Entity ent;
      ent.id = id;
      ent.label = label;
      ent.etype = "value";
      entities_.emplace(id, std::move(ent));
    }
  };
  for (TripleId t = 0; t < triples_.size(); ++t) {
    const Triple& tr = triples_[t];
    ensure(tr.subject, tr.subject);
    if (tr.object.is_entity()) ensure(tr.object.value, tr.object.value);
    adjacency_[tr.subject].push_back(t);
    if (tr.object.is_entity() && tr.object.value != tr.subject)
      adjacency_[tr.object.value].push_back(t);
  }
}

const Entity* KnowledgeGraph::find_entity(std::string_view id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const std::vector<TripleId>& KnowledgeGraph::incident_triples(
    std::string_view entity) const {
  if (!entities_.contains(entity))
    raise(Errc::unknown_entity, "no such entity: " + std::string(entity));
  static const std::vector<TripleId> kNone;
  auto it = adjacency_.find(entity);
  return it == adjacency_.end() ? kNone : it->second;
}

std::vector<std::string_view> KnowledgeGraph::endpoints(TripleId id) const {
  const Triple& tr = triples_.at(id);
  std::vector<std::string_view> out{tr.subject};
  if (tr.object.is_entity() && tr.object.value != tr.subject)
    out.push_back(tr.object.value);
  return out;
}

namespace {

std::string object_identity(const ObjectTerm& obj) {
  if (obj.is_entity()) return "e\x1f" + obj.value;
  return "l\x1f" + canonical_form(obj.value);
}

void merge_provenance(std::vector<Provenance>& into,
                      const std::vector<Provenance>& from) {
  into.insert(into.end(), from.begin(), from.end());
  std::sort(into.begin(), into.end());
  into.erase(std::unique(into.begin(), into.end()), into.end());
}

}  // namespace

KnowledgeGraph build_kb(std::span<const RecordExtraction> extractions,
                        std::size_t promote_min_sources) {
  // Entity union by canonical id, first occurrence wins the label.
  std::vector<Entity> entities;
  std::unordered_map<std::string, std::size_t> entity_index;
  for (const auto& ex : extractions) {
    for (const Entity& ent : ex.entities) {
      auto [it, inserted] = entity_index.emplace(ent.id, entities.size());
      if (inserted) {
        entities.push_back(ent);
        continue;
      }
      Entity& known = entities[it->second];
      auto adopt = [&](const std::string& form) {
        if (form != known.label &&
            std::find(known.aliases.begin(), known.aliases.end(), form) ==
                known.aliases.end())
          known.aliases.push_back(form);
      };
      adopt(ent.label);
      for (const auto& alias : ent.aliases) adopt(alias);
    }
  }

  std::vector<Triple> triples;
  for (const auto& ex : extractions)
    triples.insert(triples.end(), ex.triples.begin(), ex.triples.end());

  // Ground string literals that already name an entity, then promote string
  // literals recurring as objects across enough distinct sources.
  auto known_entity = [&](const std::string& canonical) {
    return entity_index.contains(canonical);
  };
  struct LiteralUse {
    std::set<std::string> sources;
    std::string first_surface;
  };
  std::unordered_map<std::string, LiteralUse> literal_uses;
  for (Triple& tr : triples) {
    if (tr.object.is_entity() || tr.object.vtype != ValueType::string)
      continue;
    std::string canonical = canonical_form(tr.object.value);
    if (canonical.empty()) continue;
    if (known_entity(canonical)) {
      tr.object = ObjectTerm::entity_ref(canonical);
      continue;
    }
    auto& use = literal_uses[canonical];
    if (use.first_surface.empty()) use.first_surface = tr.object.value;
    for (const auto& prov : tr.provenance) use.sources.insert(prov.source_id);
  }
  for (Triple& tr : triples) {
    if (tr.object.is_entity() || tr.object.vtype != ValueType::string)
      continue;
    std::string canonical = canonical_form(tr.object.value);
    auto it = literal_uses.find(canonical);
    if (it == literal_uses.end() ||
        it->second.sources.size() < promote_min_sources)
      continue;
    if (!known_entity(canonical)) {
      Entity ent;
      ent.id = canonical;
      ent.label = it->second.first_surface;
      ent.etype = "value";
      ent.provenance = tr.provenance.front();
      entity_index.emplace(canonical, entities.size());
      entities.push_back(std::move(ent));
    }
    tr.object = ObjectTerm::entity_ref(canonical);
  }

  // Duplicate (S, P, O) triples collapse with merged provenance.
  std::vector<Triple> deduped;
  std::unordered_map<std::string, std::size_t> triple_index;
  for (Triple& tr : triples) {
    std::string key = tr.subject + "\x1f" + normalize_predicate(tr.predicate) +
                      "\x1f" + object_identity(tr.object);
    auto [it, inserted] = triple_index.emplace(std::move(key), deduped.size());
    if (inserted) {
      std::sort(tr.provenance.begin(), tr.provenance.end());
      tr.provenance.erase(
          std::unique(tr.provenance.begin(), tr.provenance.end()),
          tr.provenance.end());
      deduped.push_back(std::move(tr));
      continue;
    }
    Triple& known = deduped[it->second];
    merge_provenance(known.provenance, tr.provenance);
    if (!known.extraction_score) known.extraction_score = tr.extraction_score;
  }

  return KnowledgeGraph(std::move(entities), std::move(deduped));
}

KnowledgeGraph extract_subgraph(const KnowledgeGraph& g,
                                std::span<const std::string> seeds,
                                std::size_t hops) {
  std::set<std::string, std::less<>> reached;
  for (const auto& seed : seeds)
    if (g.find_entity(seed)) reached.insert(seed);

  std::set<TripleId> kept;
  for (std::size_t step = 0;; ++step) {
    kept.clear();
    for (const auto& entity : reached)
      for (TripleId t : g.incident_triples(entity)) kept.insert(t);
    if (step == hops) break;
    for (TripleId t : kept)
      for (std::string_view endpoint : g.endpoints(t))
        reached.insert(std::string(endpoint));
  }

  std::vector<Triple> triples;
  std::set<std::string, std::less<>> entity_ids = reached;
  for (TripleId t : kept) {
    triples.push_back(g.triple(t));
    for (std::string_view endpoint : g.endpoints(t))
      entity_ids.insert(std::string(endpoint));
  }
  std::vector<Entity> entities;
  for (const auto& id : entity_ids)
    if (const Entity* ent = g.find_entity(id)) entities.push_back(*ent);

  return KnowledgeGraph(std::move(entities), std::move(triples));
}

bool LineGraph::has_edge(TripleId a, TripleId b) const {
  if (a == b || a >= node_endpoints_.size() || b >= node_endpoints_.size())
    return false;
  for (std::uint32_t ea : node_endpoints_[a])
    for (std::uint32_t eb : node_endpoints_[b])
      if (ea == eb) return true;
  return false;
}

std::vector<TripleId> LineGraph::neighbors(TripleId id) const {
  std::vector<TripleId> out;
  if (id >= node_endpoints_.size()) return out;
  for (std::uint32_t e : node_endpoints_[id])
    out.insert(out.end(), incidence_[e].begin(), incidence_[e].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), id), out.end());
  return out;
}

LineGraph to_line_graph(const KnowledgeGraph& g, std::size_t degree_cap) {
  LineGraph lg;
  lg.node_endpoints_.resize(g.triple_count());

  std::unordered_map<std::string_view, std::uint32_t> entity_slot;
  for (TripleId t = 0; t < g.triple_count(); ++t) {
    for (std::string_view endpoint : g.endpoints(t)) {
      auto [it, inserted] =
          entity_slot.emplace(endpoint, lg.incidence_.size());
      if (inserted) lg.incidence_.emplace_back();
      lg.incidence_[it->second].push_back(t);
      lg.node_endpoints_[t].push_back(it->second);
    }
  }

  // Exact edge count without materializing cliques: sum the per-entity pair
  // counts, then subtract the double-counted pairs that share two endpoints.
  // A pair of triples can share at most two entities, so inclusion-exclusion
  // over endpoint-pair groups is exact.
  std::uint64_t total = 0;
  for (const auto& list : lg.incidence_) {
    std::uint64_t k = list.size();
    total += k * (k - 1) / 2;
  }
  std::unordered_map<std::uint64_t, std::uint64_t> pair_groups;
  for (TripleId t = 0; t < g.triple_count(); ++t) {
    const auto& eps = lg.node_endpoints_[t];
    if (eps.size() != 2) continue;
    std::uint64_t lo = std::min(eps[0], eps[1]);
    std::uint64_t hi = std::max(eps[0], eps[1]);
    ++pair_groups[(lo << 32) | hi];
  }
  for (const auto& [key, count] : pair_groups) {
    (void)key;
    total -= count * (count - 1) / 2;
  }
  lg.edge_count_ = total;

  for (const auto& [id, slot] : entity_slot) {
    if (lg.incidence_[slot].size() > degree_cap)
      lg.virtual_entities_.push_back(std::string(id));
  }
  std::sort(lg.virtual_entities_.begin(), lg.virtual_entities_.end());
  return lg;
}

}  // namespace multirag
