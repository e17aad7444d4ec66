#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "multirag/error.hpp"
#include "multirag/text.hpp"

namespace multirag {

// jsc trees preserve the source document's field order.
using Json = nlohmann::ordered_json;

enum class DocFormat { structured, semi_structured, unstructured };

std::string_view to_string(DocFormat f);
DocFormat doc_format_from_string(std::string_view s);

struct RawDocument {
  std::string source_id;
  std::string domain;
  std::string name;
  std::string content;
  std::map<std::string, std::string> meta;
  DocFormat format = DocFormat::unstructured;
};

struct ColumnIndex {
  std::string attribute;
  std::size_t column_id = 0;
  std::vector<std::size_t> row_refs;

  bool operator==(const ColumnIndex&) const = default;
};

using ColumnIndexMap = std::map<std::string, ColumnIndex>;

// A source file reduced to the normalized linked-data tuple. `jsc` is the
// content tree with reserved root keys "@ctx", "@id" and "@type";
// `cols_index` is present exactly when the source was columnar-representable.
struct NormalizedRecord {
  std::string id;
  std::string domain;
  std::string name;
  std::map<std::string, std::string> meta;
  Json jsc;
  std::optional<ColumnIndexMap> cols_index;

  std::string source_id() const;

  bool operator==(const NormalizedRecord&) const = default;
};

struct IngestOptions {
  std::size_t chunk_size = 512;
  std::size_t chunk_overlap = 64;
  char csv_delimiter = ',';
  bool fail_fast = true;  // false: skip failing documents and report them
  std::size_t workers = 0;  // 0 = hardware concurrency
};

// Leaf cells are stored as {"v": <string>, "t": <type tag>} objects.
Json make_leaf(std::string_view value);
bool is_leaf(const Json& node);

// Invokes fn(path, value, type) for every leaf of a jsc subtree. Paths are
// dot-joined key sequences; array elements do not extend the path.
void for_each_leaf(
    const Json& node,
    const std::function<void(const std::string&, const std::string&,
                             ValueType)>& fn);

NormalizedRecord normalize_structured(const RawDocument& doc,
                                      const IngestOptions& opts = {});
NormalizedRecord normalize_semistructured(const RawDocument& doc,
                                          const IngestOptions& opts = {});
NormalizedRecord normalize_unstructured(const RawDocument& doc,
                                        const IngestOptions& opts = {});

// Routes on doc.format.
NormalizedRecord normalize_document(const RawDocument& doc,
                                    const IngestOptions& opts = {});

// Append-only store; ids are assigned sequentially at append time. Writers
// must finish before concurrent readers start.
class RecordStore {
 public:
  std::string append(NormalizedRecord record);  // returns the assigned id

  const NormalizedRecord* find(std::string_view id) const;
  const std::vector<NormalizedRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool operator==(const RecordStore& other) const {
    return records_ == other.records_;
  }

 private:
  std::vector<NormalizedRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

struct IngestFailure {
  std::string source_id;
  std::string name;
  std::string message;
};

struct IngestReport {
  std::size_t parsed = 0;
  std::vector<IngestFailure> failures;
};

// Parses every document through its format adapter and appends the results
// to `store` in input order. Duplicate (source_id, name) pairs within the
// batch are rejected. With fail_fast the first failing document throws with
// its identity attached; otherwise failures are collected in the report.
IngestReport fuse_sources(std::span<const RawDocument> docs,
                          RecordStore& store, const IngestOptions& opts = {});

// Column-index lookup; must equal a full scan of jsc rows.
std::vector<std::string> lookup_column(const NormalizedRecord& record,
                                       std::string_view attribute);

// Brute-force jsc row scan for the same attribute (the index-free route).
std::vector<std::string> scan_column(const NormalizedRecord& record,
                                     std::string_view attribute);

}  // namespace multirag
