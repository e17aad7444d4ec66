#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "multirag/config.hpp"
#include "multirag/confidence.hpp"
#include "multirag/ingest.hpp"
#include "multirag/prompt.hpp"

namespace multirag {

// Ablation switch for the query flow.
//   full            — homology retrieval + both confidence levels
//   no_mka          — flat base-graph retrieval, no homologous grouping
//   no_graph_level  — homology + node filtering, no coarse gating
//   no_node_level   — homology + gating, every consulted member kept
//   no_mcc          — homology retrieval only, no scoring at all
enum class PipelineMode { full, no_mka, no_graph_level, no_node_level, no_mcc };

std::string_view to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(std::string_view s);

struct Answer {
  struct Support {
    TripleId member = 0;
    double confidence = 0.0;  // C(v)
    std::string triple;       // display rendering
    std::string source;
  };
  struct Conflict {
    TripleId member = 0;
    double confidence = 0.0;
    std::string triple;
    std::string source;
    std::string reason;
  };

  std::string text;
  std::vector<Support> supporting;  // confidence desc, then member id
  std::vector<Conflict> conflicts;
  std::map<std::string, double> graph_confidences;  // subgraph key → C(G)
  std::map<std::string, double> timings;            // stage → seconds
  bool low_evidence = false;  // fallback answer without homologous backing
  // Bookkeeping for evaluation runs; not part of the serialized answer.
  std::uint64_t history_lookups = 0;
};

// Immutable state shared by every query: the record store, the fused
// knowledge graph, its homology partition, alias tables, source history and
// the confidence configuration.
struct Engine {
  RecordStore store;
  KnowledgeGraph kg;
  HomologyPartition partition;
  AliasMap entity_aliases;
  AliasMap predicate_aliases;
  SourceHistory history{};
  EngineConfig config;
  PromptSet prompts;
};

// Ingests the documents, extracts entities/triples (rule-based for tables
// and trees, client-backed for text), applies the standardization pass,
// fuses the knowledge graph and matches the homology partition.
Engine build_engine(std::span<const RawDocument> docs,
                    GenerationClient& client, const EngineConfig& cfg);

// Parses the query into entity/relation constraints via the client and
// resolves surface forms through the alias table.
LogicForm generate_logic_form(const std::string& query,
                              GenerationClient& client,
                              const AliasMap& entity_aliases);

// Records matching any query term in their column index, tree leaves or
// text (exact after normalization), ordered by match count descending with
// record-id ties.
std::vector<const NormalizedRecord*> retrieve_documents(
    const LogicForm& lf, const RecordStore& store);

// Trusted evidence block (confidence-descending) plus a clearly separated
// untrusted-conflicts block; emits a "no trusted evidence" sentinel when
// nothing survived filtering.
std::string assemble_context(const Answer& answer);

// Full query flow: logic form → document/candidate retrieval → confidence
// filtering → context assembly → answer generation. NoCandidates falls back
// to a base-graph neighborhood answer flagged low_evidence.
Answer answer_query(const std::string& query, const Engine& engine,
                    GenerationClient& client,
                    PipelineMode mode = PipelineMode::full);

// Instantiates the client selected by cfg.client_mode ("mock" or "live"),
// loading fixtures or endpoint credentials and applying the request budget.
std::unique_ptr<GenerationClient> make_client(const EngineConfig& cfg);

}  // namespace multirag
