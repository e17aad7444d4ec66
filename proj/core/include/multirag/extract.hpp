#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multirag/client.hpp"
#include "multirag/ingest.hpp"
#include "multirag/prompt.hpp"
#include "multirag/text.hpp"

namespace multirag {

struct Provenance {
  std::string record_id;
  std::string source_id;
  std::string ref;  // "row:<n>", "tree:<n>", "chunk:<n>"

  auto operator<=>(const Provenance&) const = default;
};

struct Entity {
  std::string id;  // canonical form; stable across repeated extraction
  std::string label;
  std::string etype;
  std::vector<std::string> aliases;  // merged surface forms
  Provenance provenance;

  bool operator==(const Entity&) const = default;
};

struct ObjectTerm {
  enum class Kind { entity, literal };
  Kind kind = Kind::literal;
  std::string value;  // entity id, or literal surface text
  ValueType vtype = ValueType::string;

  static ObjectTerm entity_ref(std::string id) {
    return {Kind::entity, std::move(id), ValueType::string};
  }
  static ObjectTerm literal(std::string text) {
    ValueType t = infer_value_type(text);
    return {Kind::literal, std::move(text), t};
  }

  bool is_entity() const { return kind == Kind::entity; }
  auto operator<=>(const ObjectTerm&) const = default;
};

struct Triple {
  std::string subject;    // entity id
  std::string predicate;  // surface relation name
  ObjectTerm object;
  std::vector<Provenance> provenance;
  // Extraction-time score when the backend reports one ("@0.87"); carried
  // but not consumed by the confidence formulas.
  std::optional<double> extraction_score;

  bool operator==(const Triple&) const = default;
};

// Alias table resolving surface forms to canonical ones, chains followed to
// a fixpoint. Used for entity standardization and predicate normalization.
class AliasMap {
 public:
  AliasMap() = default;

  void add(std::string_view alias, std::string_view canonical);
  // Follows alias chains (a -> b -> c yields c); cycles resolve to the
  // starting point. Input and output are canonical surface forms.
  std::string resolve(std::string_view form) const;
  bool empty() const { return aliases_.empty(); }

  static AliasMap from_file(const std::string& path);

 private:
  std::map<std::string, std::string> aliases_;
};

struct RecordExtraction {
  std::vector<Entity> entities;
  std::vector<Triple> triples;
};

// Deterministic extractor for columnar and tree records: one subject entity
// per row / tree root (keyed by the first attribute value), one triple per
// attribute cell.
RecordExtraction extract_rule_based(const NormalizedRecord& record);

// Generation-backed extraction for text records; one request per chunk.
std::vector<Entity> extract_entities(const NormalizedRecord& record,
                                     GenerationClient& client,
                                     const ExtractionPrompt& prompt);

struct TripleExtraction {
  std::vector<Triple> triples;
  std::size_t dropped = 0;  // replies referencing unknown entities
};

TripleExtraction extract_triples(const NormalizedRecord& record,
                                 const std::vector<Entity>& entities,
                                 GenerationClient& client,
                                 const ExtractionPrompt& prompt);

// Merges aliases into canonical entities per the client's alias map; the
// map is applied transitively and the pass is idempotent.
std::vector<Entity> standardize_entities(const std::vector<Entity>& entities,
                                         GenerationClient& client,
                                         const ExtractionPrompt& prompt);

std::vector<Entity> apply_alias_map(const std::vector<Entity>& entities,
                                    const AliasMap& aliases);

}  // namespace multirag
