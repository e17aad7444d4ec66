#include "multirag/ingest.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "multirag/parallel.hpp"

namespace multirag {

namespace {

constexpr std::string_view kContext = "multirag/v1";

std::string doc_identity(const RawDocument& doc) {
  return doc.source_id + "/" + doc.name;
}

Json jsc_root(const RawDocument& doc, std::string_view type) {
  Json root = Json::object();
  root["@ctx"] = kContext;
  root["@id"] = doc_identity(doc);
  root["@type"] = type;
  return root;
}

// ---- CSV ----

std::vector<std::vector<std::string>> parse_csv(const std::string& content,
                                                char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    any_field = true;
  };
  auto end_row = [&] {
    if (any_field || !row.empty()) {
      end_field();
      rows.push_back(std::move(row));
      row.clear();
      any_field = false;
      field.clear();
    }
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      any_field = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r') {
      // swallow; LF handles row end
    } else if (c == '\n') {
      end_row();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes)
    raise(Errc::malformed_table, "unterminated quoted field");
  end_row();
  return rows;
}

// ---- XML via property_tree ----

bool ptree_is_leaf(const boost::property_tree::ptree& node) {
  return node.empty();
}

Json ptree_to_jsc(const boost::property_tree::ptree& node) {
  if (ptree_is_leaf(node)) return make_leaf(node.data());

  Json obj = Json::object();
  // Attributes first, prefixed with '@'.
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    for (const auto& [key, child] : *attrs)
      obj["@" + key] = make_leaf(child.data());
  }
  if (!is_blank(node.data())) obj["#text"] = make_leaf(node.data());

  // Repeated sibling element names become arrays.
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>") continue;
    Json value = ptree_to_jsc(child);
    if (!obj.contains(key)) {
      obj[key] = std::move(value);
    } else if (obj[key].is_array()) {
      obj[key].push_back(std::move(value));
    } else {
      Json arr = Json::array();
      arr.push_back(std::move(obj[key]));
      arr.push_back(std::move(value));
      obj[key] = std::move(arr);
    }
  }
  return obj;
}

Json parse_xml_tree(const std::string& content) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(content);
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    raise(Errc::malformed_tree, e.message());
  }
  if (tree.empty()) raise(Errc::malformed_tree, "no root element");
  return ptree_to_jsc(tree);
}

// ---- JSON tree ----

Json json_to_jsc(const Json& node) {
  if (node.is_object()) {
    Json obj = Json::object();
    for (const auto& [key, child] : node.items())
      obj[key] = json_to_jsc(child);
    return obj;
  }
  if (node.is_array()) {
    Json arr = Json::array();
    for (const auto& child : node) arr.push_back(json_to_jsc(child));
    return arr;
  }
  if (node.is_string()) return make_leaf(node.get<std::string>());
  if (node.is_null()) return make_leaf("");
  return make_leaf(node.dump());  // numbers, booleans
}

}  // namespace

std::string_view to_string(DocFormat f) {
  switch (f) {
    case DocFormat::structured: return "structured";
    case DocFormat::semi_structured: return "semi_structured";
    case DocFormat::unstructured: return "unstructured";
  }
  return "unstructured";
}

DocFormat doc_format_from_string(std::string_view s) {
  if (s == "structured") return DocFormat::structured;
  if (s == "semi_structured" || s == "semi-structured")
    return DocFormat::semi_structured;
  if (s == "unstructured") return DocFormat::unstructured;
  raise(Errc::config_error, "unknown document format: " + std::string(s));
}

std::string NormalizedRecord::source_id() const {
  const std::string at_id = jsc.value("@id", std::string{});
  auto slash = at_id.find('/');
  return slash == std::string::npos ? at_id : at_id.substr(0, slash);
}

Json make_leaf(std::string_view value) {
  Json leaf = Json::object();
  leaf["v"] = std::string(value);
  leaf["t"] = std::string(to_string(infer_value_type(value)));
  return leaf;
}

bool is_leaf(const Json& node) {
  return node.is_object() && node.size() == 2 && node.contains("v") &&
         node.contains("t");
}

void for_each_leaf(
    const Json& node,
    const std::function<void(const std::string&, const std::string&,
                             ValueType)>& fn) {
  std::function<void(const Json&, const std::string&)> walk =
      [&](const Json& n, const std::string& path) {
        if (is_leaf(n)) {
          ValueType type = ValueType::string;
          const std::string& tag = n["t"].get_ref<const std::string&>();
          if (tag == "number") type = ValueType::number;
          else if (tag == "date") type = ValueType::date;
          fn(path, n["v"].get_ref<const std::string&>(), type);
          return;
        }
        if (n.is_object()) {
          for (const auto& [key, child] : n.items()) {
            if (key == "@ctx" || key == "@id" || key == "@type")
              continue;
            walk(child, path.empty() ? key : path + "." + key);
          }
        } else if (n.is_array()) {
          for (const auto& child : n) walk(child, path);
        }
      };
  walk(node, "");
}

NormalizedRecord normalize_structured(const RawDocument& doc,
                                      const IngestOptions& opts) {
  if (doc.format != DocFormat::structured)
    raise(Errc::precondition, "document is not structured: " + doc.name);
  if (is_blank(doc.content))
    raise(Errc::empty_input, "empty table: " + doc_identity(doc));

  auto rows = parse_csv(doc.content, opts.csv_delimiter);
  if (rows.empty())
    raise(Errc::empty_input, "empty table: " + doc_identity(doc));

  const auto& header = rows.front();
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (is_blank(h))
      raise(Errc::malformed_table, "blank header field in " + doc.name);
    if (!seen.insert(h).second)
      raise(Errc::malformed_table, "duplicate header '" + h + "' in " + doc.name);
  }

  Json root = jsc_root(doc, "table");
  Json body = Json::array();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      raise(Errc::malformed_table,
            "row " + std::to_string(r) + " has " +
                std::to_string(rows[r].size()) + " fields, expected " +
                std::to_string(header.size()) + " in " + doc.name);
    Json obj = Json::object();
    for (std::size_t c = 0; c < header.size(); ++c)
      obj[header[c]] = make_leaf(rows[r][c]);
    body.push_back(std::move(obj));
  }
  root["rows"] = std::move(body);

  ColumnIndexMap cols;
  const std::size_t nrows = rows.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    ColumnIndex ci;
    ci.attribute = header[c];
    ci.column_id = c;
    ci.row_refs.resize(nrows);
    for (std::size_t r = 0; r < nrows; ++r) ci.row_refs[r] = r;
    cols.emplace(header[c], std::move(ci));
  }

  NormalizedRecord rec;
  rec.domain = doc.domain;
  rec.name = doc.name;
  rec.meta = doc.meta;
  rec.jsc = std::move(root);
  rec.cols_index = std::move(cols);
  return rec;
}

NormalizedRecord normalize_semistructured(const RawDocument& doc,
                                          const IngestOptions&) {
  if (doc.format != DocFormat::semi_structured)
    raise(Errc::precondition, "document is not semi-structured: " + doc.name);
  if (is_blank(doc.content))
    raise(Errc::malformed_tree, "empty tree: " + doc_identity(doc));

  std::size_t first = doc.content.find_first_not_of(" \t\r\n");
  Json tree;
  if (doc.content[first] == '<') {
    tree = parse_xml_tree(doc.content);
  } else {
    Json parsed = Json::parse(doc.content, nullptr, false);
    if (parsed.is_discarded())
      raise(Errc::malformed_tree, "invalid JSON in " + doc_identity(doc));
    tree = json_to_jsc(parsed);
  }

  Json root = jsc_root(doc, "tree");
  root["root"] = std::move(tree);

  NormalizedRecord rec;
  rec.domain = doc.domain;
  rec.name = doc.name;
  rec.meta = doc.meta;
  rec.jsc = std::move(root);
  return rec;
}

NormalizedRecord normalize_unstructured(const RawDocument& doc,
                                        const IngestOptions& opts) {
  if (doc.format != DocFormat::unstructured)
    raise(Errc::precondition, "document is not unstructured: " + doc.name);
  if (is_blank(doc.content))
    raise(Errc::empty_input, "blank text: " + doc_identity(doc));

  Json root = jsc_root(doc, "text");
  root["text"] = doc.content;
  Json chunks = Json::array();
  for (const auto& span :
       chunk_spans(doc.content.size(), opts.chunk_size, opts.chunk_overlap)) {
    Json c = Json::object();
    c["begin"] = span.begin;
    c["end"] = span.end;
    chunks.push_back(std::move(c));
  }
  root["chunks"] = std::move(chunks);

  NormalizedRecord rec;
  rec.domain = doc.domain;
  rec.name = doc.name;
  rec.meta = doc.meta;
  rec.jsc = std::move(root);
  return rec;
}

NormalizedRecord normalize_document(const RawDocument& doc,
                                    const IngestOptions& opts) {
  switch (doc.format) {
    case DocFormat::structured: return normalize_structured(doc, opts);
    case DocFormat::semi_structured: return normalize_semistructured(doc, opts);
    case DocFormat::unstructured: return normalize_unstructured(doc, opts);
  }
  raise(Errc::precondition, "unreachable format");
}

std::string RecordStore::append(NormalizedRecord record) {
  if (record.id.empty()) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%06zu", records_.size());
    record.id = buf;
  }
  if (by_id_.contains(record.id))
    raise(Errc::duplicate_document, "record id already present: " + record.id);
  by_id_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
  return records_.back().id;
}

const NormalizedRecord* RecordStore::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

IngestReport fuse_sources(std::span<const RawDocument> docs,
                          RecordStore& store, const IngestOptions& opts) {
  // Batch integrity: (source_id, name) must be unique.
  std::set<std::pair<std::string_view, std::string_view>> identities;
  std::vector<bool> duplicate(docs.size(), false);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!identities.emplace(docs[i].source_id, docs[i].name).second)
      duplicate[i] = true;
  }

  struct Slot {
    std::optional<NormalizedRecord> record;
    Errc code = Errc::empty_input;
    std::string error;
  };
  std::vector<Slot> slots(docs.size());

  parallel_for(docs.size(), opts.workers, [&](std::size_t i) {
    if (duplicate[i]) {
      slots[i].code = Errc::duplicate_document;
      slots[i].error = "duplicate (source_id, name) in batch";
      return;
    }
    try {
      slots[i].record = normalize_document(docs[i], opts);
    } catch (const Error& e) {
      slots[i].code = e.code();
      slots[i].error = e.what();
    }
  });

  IngestReport report;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (slots[i].record) {
      store.append(std::move(*slots[i].record));
      ++report.parsed;
      continue;
    }
    if (opts.fail_fast)
      raise(slots[i].code, doc_identity(docs[i]) + ": " + slots[i].error);
    report.failures.push_back(
        {docs[i].source_id, docs[i].name, slots[i].error});
  }
  return report;
}

std::vector<std::string> lookup_column(const NormalizedRecord& record,
                                       std::string_view attribute) {
  if (!record.cols_index)
    raise(Errc::no_column_index, "record " + record.id + " has no column index");
  auto it = record.cols_index->find(std::string(attribute));
  if (it == record.cols_index->end())
    raise(Errc::unknown_attribute,
          "no column '" + std::string(attribute) + "' in record " + record.id);

  const auto& rows = record.jsc.at("rows");
  std::vector<std::string> values;
  values.reserve(it->second.row_refs.size());
  for (std::size_t ref : it->second.row_refs)
    values.push_back(
        rows.at(ref).at(it->second.attribute).at("v").get<std::string>());
  return values;
}

std::vector<std::string> scan_column(const NormalizedRecord& record,
                                     std::string_view attribute) {
  std::vector<std::string> values;
  if (!record.jsc.contains("rows")) return values;
  const std::string attr(attribute);
  for (const auto& row : record.jsc.at("rows")) {
    if (row.contains(attr)) values.push_back(row.at(attr).at("v").get<std::string>());
  }
  return values;
}

}  // namespace multirag
