#pragma once

#include <string>
#include <vector>

#include "multirag/pipeline.hpp"

namespace multirag {

// All writers are atomic: content goes to a temp file in the target
// directory and is renamed into place, so interrupted runs never leave a
// truncated artifact.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Record-store dump: one JSON object per line with exactly the keys
// id, domain, name, meta, jsc, cols_index (null when absent).
void save_store(const RecordStore& store, const std::string& path);
RecordStore load_store(const std::string& path);

// Knowledge-graph dump: one {"entity": ...} object per line for the entity
// table, then one {"s", "p", "o", "provenance"} object per triple; "o" is a
// plain string for literals and {"id": ...} for entity objects.
void save_graph(const KnowledgeGraph& g, const std::string& path);
KnowledgeGraph load_graph(const std::string& path);

// Line-graph dump: one {"triple_id", "neighbors"} object per line.
void save_line_graph(const LineGraph& lg, const std::string& path);

// Partition dump: {"subgraphs": [{key, members, sources, num}...],
// "isolated": [...]}. Loading rebuilds the complete line edges and center
// nodes from the key and member lists.
void save_partition(const HomologyPartition& p, const std::string& path);
HomologyPartition load_partition(const std::string& path);

void save_history(const SourceHistory& hist, const std::string& path);
SourceHistory load_history(const std::string& path);

// Manifest: JSON array of {path, domain, format, source_id}; relative paths
// resolve against the manifest's directory.
std::vector<RawDocument> load_manifest(const std::string& manifest_path);

Json answer_to_json(const Answer& answer);

}  // namespace multirag
