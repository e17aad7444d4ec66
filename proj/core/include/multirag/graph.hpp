#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multirag/extract.hpp"

namespace multirag {

using TripleId = std::uint32_t;

// Immutable triple store with an entity-incidence index. Triple ids are
// positions in the triple vector; every entity referenced by a triple is
// present in the entity table and the adjacency index mirrors the triples
// exactly.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(std::vector<Entity> entities, std::vector<Triple> triples);

  const std::vector<Triple>& triples() const { return triples_; }
  const Triple& triple(TripleId id) const { return triples_.at(id); }
  std::size_t triple_count() const { return triples_.size(); }

  const std::map<std::string, Entity, std::less<>>& entities() const {
    return entities_;
  }
  const Entity* find_entity(std::string_view id) const;

  // Triples whose subject or object endpoint is the entity, ascending.
  const std::vector<TripleId>& incident_triples(std::string_view entity) const;

  // Entity endpoints of a triple: subject, plus the object when it is an
  // entity reference distinct from the subject (1 or 2 ids).
  std::vector<std::string_view> endpoints(TripleId id) const;

  bool operator==(const KnowledgeGraph& other) const {
    return entities_ == other.entities_ && triples_ == other.triples_;
  }

 private:
  std::map<std::string, Entity, std::less<>> entities_;
  std::vector<Triple> triples_;
  std::map<std::string, std::vector<TripleId>, std::less<>> adjacency_;
};

// Unions entity and triple sets across per-record extractions. Duplicate
// triples (same subject, normalized predicate, object identity) collapse
// into one carrying the merged, sorted provenance list. String literals are
// grounded to the entity table when their canonical form already names an
// entity, and promoted to fresh entities when they recur as objects across
// at least `promote_min_sources` distinct sources.
KnowledgeGraph build_kb(std::span<const RecordExtraction> extractions,
                        std::size_t promote_min_sources = 2);

// Induced subgraph reachable within `hops` entity expansions of the seeds:
// hops=0 keeps the triples incident to the seeds themselves, each further
// hop widens the entity set by the endpoints found so far. Unknown seeds
// contribute nothing.
KnowledgeGraph extract_subgraph(const KnowledgeGraph& g,
                                std::span<const std::string> seeds,
                                std::size_t hops);

// Line graph of the knowledge graph: one node per triple, an edge between
// two distinct triples iff they share an entity endpoint. Built from
// entity-incidence lists; cliques around high-degree entities are kept
// implicit (never materialized), so construction is linear in incidence
// size while edge queries stay exact.
class LineGraph {
 public:
  std::size_t node_count() const { return node_endpoints_.size(); }
  std::uint64_t edge_count() const { return edge_count_; }

  bool has_edge(TripleId a, TripleId b) const;
  // Sorted, deduplicated, excludes the node itself.
  std::vector<TripleId> neighbors(TripleId id) const;

  // Entities whose incidence degree exceeded the construction cap; their
  // cliques are represented only by the incidence lists.
  const std::vector<std::string>& virtual_entities() const {
    return virtual_entities_;
  }

 private:
  friend LineGraph to_line_graph(const KnowledgeGraph&, std::size_t);

  // Per node: indices into incidence_ for its 1 or 2 endpoints.
  std::vector<std::vector<std::uint32_t>> node_endpoints_;
  std::vector<std::vector<TripleId>> incidence_;  // per entity, ascending
  std::vector<std::string> virtual_entities_;
  std::uint64_t edge_count_ = 0;
};

LineGraph to_line_graph(const KnowledgeGraph& g,
                        std::size_t degree_cap = 10000);

}  // namespace multirag
