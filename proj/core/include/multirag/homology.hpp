#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "multirag/graph.hpp"

namespace multirag {

// Center node summarizing one homologous group: shared attribute name, a
// metadata digest (subject + contributing sources), the member count, and
// the graph-level confidence once scoring has run.
struct SNode {
  std::string name;  // normalized attribute (predicate) key
  std::string meta;  // "subject=<id> sources=<a,b,...>"
  std::size_t num = 0;
  std::optional<double> confidence;

  bool operator==(const SNode&) const = default;
};

struct HomologousEdge {
  TripleId member = 0;
  double weight = 1.0;  // reserved; not consumed by the confidence formulas

  bool operator==(const HomologousEdge&) const = default;
};

// One cross-source group: all triples asserting the same (subject,
// attribute), connected to the center by weighted edges; the members form a
// complete line graph among themselves (every pair shares the center).
struct HomologousSubgraph {
  std::string subject;    // canonical subject entity id
  std::string predicate;  // normalized predicate key
  SNode snode;
  std::vector<TripleId> members;                         // ascending
  std::vector<HomologousEdge> edges;                     // one per member
  std::vector<std::pair<TripleId, TripleId>> line_edges;  // a < b, complete
  std::vector<std::string> sources;                      // sorted, distinct

  std::string key() const { return subject + "|" + predicate; }

  bool operator==(const HomologousSubgraph&) const = default;
};

// Every triple of the graph lands in exactly one subgraph or in isolated.
struct HomologyPartition {
  std::vector<HomologousSubgraph> subgraphs;  // sorted by key
  std::vector<TripleId> isolated;             // ascending

  bool operator==(const HomologyPartition&) const = default;
};

struct HomologyOptions {
  std::size_t min_members = 2;
  std::size_t min_sources = 2;
  AliasMap predicate_aliases;
};

// Attribute key a triple is grouped under: alias resolution on the surface
// predicate (and on its normalized form), then punctuation-stripping
// normalization, so "directed_by", "Directed By" and an aliased "director"
// coincide.
std::string predicate_group_key(std::string_view predicate,
                                const AliasMap& aliases);

// Groups triples by (subject entity, attribute key); groups with enough
// members from enough distinct sources become subgraphs, everything else is
// isolated. Hash grouping plus per-group sorting; output is independent of
// triple input order.
HomologyPartition match_homologous(const KnowledgeGraph& g,
                                   const HomologyOptions& opts = {});

// Disjoint union of each subgraph's complete line graph with the isolated
// triples as degree-0 nodes.
struct HomologousLineGraph {
  std::vector<TripleId> nodes;                           // ascending
  std::vector<std::pair<TripleId, TripleId>> edges;      // a < b, sorted
  std::uint64_t edge_count = 0;
};

HomologousLineGraph build_homologous_line_graph(const HomologyPartition& p);

struct LogicForm {
  std::vector<std::string> entities;   // query entity surfaces
  std::vector<std::string> relations;  // query relation surfaces
  std::string intent;
};

// Subgraphs matching the query constraints: subject must be one of the
// query entities (when any are given) and the attribute key one of the
// query relations (when any are given). Empty result raises NoCandidates,
// signalling fallback to base-graph retrieval.
std::vector<HomologousSubgraph> candidates_for_query(
    const HomologyPartition& p, const LogicForm& lf,
    const AliasMap& entity_aliases = {}, const AliasMap& predicate_aliases = {});

}  // namespace multirag
