#include "multirag/homology.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace multirag {

std::string predicate_group_key(std::string_view predicate,
                                const AliasMap& aliases) {
  std::string surface(predicate);
  std::string resolved = aliases.resolve(surface);
  if (resolved == surface) {
    // No surface-form entry; give the alias table a shot at the
    // punctuation-stripped key too ("directed_by" vs "directedby").
    resolved = aliases.resolve(normalize_predicate(surface));
  }
  return normalize_predicate(resolved);
}

HomologyPartition match_homologous(const KnowledgeGraph& g,
                                   const HomologyOptions& opts) {
  struct Group {
    std::vector<TripleId> members;
    std::set<std::string> sources;
  };
  std::unordered_map<std::string, Group> groups;

  for (TripleId t = 0; t < g.triple_count(); ++t) {
    const Triple& tr = g.triple(t);
    std::string key =
        tr.subject + "\x1f" + predicate_group_key(tr.predicate,
                                                  opts.predicate_aliases);
    Group& group = groups[key];
    group.members.push_back(t);
    for (const auto& prov : tr.provenance) group.sources.insert(prov.source_id);
  }

  HomologyPartition out;
  for (auto& [key, group] : groups) {
    if (group.members.size() < opts.min_members ||
        group.sources.size() < opts.min_sources) {
      out.isolated.insert(out.isolated.end(), group.members.begin(),
                          group.members.end());
      continue;
    }
    std::sort(group.members.begin(), group.members.end());

    HomologousSubgraph sg;
    std::size_t sep = key.find('\x1f');
    sg.subject = key.substr(0, sep);
    sg.predicate = key.substr(sep + 1);
    sg.members = std::move(group.members);
    sg.sources.assign(group.sources.begin(), group.sources.end());
    for (TripleId m : sg.members) sg.edges.push_back({m, 1.0});
    for (std::size_t i = 0; i < sg.members.size(); ++i)
      for (std::size_t j = i + 1; j < sg.members.size(); ++j)
        sg.line_edges.emplace_back(sg.members[i], sg.members[j]);

    sg.snode.name = sg.predicate;
    sg.snode.meta = "subject=" + sg.subject + " sources=";
    for (std::size_t i = 0; i < sg.sources.size(); ++i)
      sg.snode.meta += (i ? "," : "") + sg.sources[i];
    sg.snode.num = sg.members.size();
    out.subgraphs.push_back(std::move(sg));
  }

  std::sort(out.subgraphs.begin(), out.subgraphs.end(),
            [](const HomologousSubgraph& a, const HomologousSubgraph& b) {
              return a.key() < b.key();
            });
  std::sort(out.isolated.begin(), out.isolated.end());
  return out;
}

HomologousLineGraph build_homologous_line_graph(const HomologyPartition& p) {
  HomologousLineGraph out;
  for (const auto& sg : p.subgraphs) {
    out.nodes.insert(out.nodes.end(), sg.members.begin(), sg.members.end());
    out.edges.insert(out.edges.end(), sg.line_edges.begin(),
                     sg.line_edges.end());
  }
  out.nodes.insert(out.nodes.end(), p.isolated.begin(), p.isolated.end());
  std::sort(out.nodes.begin(), out.nodes.end());
  std::sort(out.edges.begin(), out.edges.end());
  out.edge_count = out.edges.size();
  return out;
}

std::vector<HomologousSubgraph> candidates_for_query(
    const HomologyPartition& p, const LogicForm& lf,
    const AliasMap& entity_aliases, const AliasMap& predicate_aliases) {
  if (lf.entities.empty() && lf.relations.empty())
    raise(Errc::precondition,
          "query names no entities and no relations; nothing to retrieve");

  std::set<std::string> subjects;
  for (const auto& surface : lf.entities)
    subjects.insert(canonical_form(entity_aliases.resolve(surface)));
  std::set<std::string> attributes;
  for (const auto& surface : lf.relations)
    attributes.insert(predicate_group_key(surface, predicate_aliases));

  std::vector<HomologousSubgraph> out;
  for (const auto& sg : p.subgraphs) {
    if (!subjects.empty() && !subjects.contains(sg.subject)) continue;
    if (!attributes.empty() && !attributes.contains(sg.predicate)) continue;
    out.push_back(sg);
  }
  if (out.empty())
    raise(Errc::no_candidates, "no homologous subgraph matches the query");
  return out;
}

}  // namespace multirag
