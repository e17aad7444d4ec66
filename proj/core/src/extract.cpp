#include "multirag/extract.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace multirag {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Entity make_entity(std::string_view label, std::string_view etype,
                   Provenance prov) {
  Entity ent;
  ent.id = canonical_form(label);
  ent.label = std::string(label);
  ent.etype = std::string(etype);
  ent.provenance = std::move(prov);
  return ent;
}

// Adds an entity unless its canonical id is already present; a new surface
// form of a known entity lands in its alias list instead.
void merge_entity(std::vector<Entity>& entities,
                  std::unordered_map<std::string, std::size_t>& index,
                  Entity ent) {
  auto [it, inserted] = index.emplace(ent.id, entities.size());
  if (inserted) {
    entities.push_back(std::move(ent));
    return;
  }
  Entity& known = entities[it->second];
  if (ent.label != known.label &&
      std::find(known.aliases.begin(), known.aliases.end(), ent.label) ==
          known.aliases.end())
    known.aliases.push_back(ent.label);
}

std::string chunk_ref(std::size_t n) { return "chunk:" + std::to_string(n); }

std::string chunk_text(const NormalizedRecord& record, const Json& chunk) {
  const std::string& text = record.jsc.at("text").get_ref<const std::string&>();
  std::size_t begin = chunk.at("begin").get<std::size_t>();
  std::size_t end = chunk.at("end").get<std::size_t>();
  return text.substr(begin, end - begin);
}

// Splits "S, P, O" on commas, folding any extras back into the object so
// literal values containing commas survive.
std::vector<std::string> split_triple_body(std::string_view body) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (parts.size() < 2) {
    std::size_t comma = body.find(',', start);
    if (comma == std::string_view::npos) break;
    parts.push_back(trim(body.substr(start, comma - start)));
    start = comma + 1;
  }
  parts.push_back(trim(body.substr(start)));
  return parts;
}

}  // namespace

void AliasMap::add(std::string_view alias, std::string_view canonical) {
  std::string key = canonical_form(alias);
  std::string value = trim(canonical);
  if (key.empty() || value.empty() || key == canonical_form(value)) return;
  aliases_[std::move(key)] = std::move(value);
}

std::string AliasMap::resolve(std::string_view form) const {
  std::string current(trim(form));
  std::set<std::string> visited;
  for (;;) {
    std::string key = canonical_form(current);
    if (!visited.insert(key).second) break;  // cycle; stop where we are
    auto it = aliases_.find(key);
    if (it == aliases_.end()) break;
    current = it->second;
  }
  return current;
}

AliasMap AliasMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open alias map: " + path);
  Json parsed = Json::parse(in, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    raise(Errc::config_error, "alias map must be a JSON object: " + path);
  AliasMap map;
  for (const auto& [alias, canonical] : parsed.items()) {
    if (!canonical.is_string())
      raise(Errc::config_error, "alias values must be strings: " + path);
    map.add(alias, canonical.get<std::string>());
  }
  return map;
}

RecordExtraction extract_rule_based(const NormalizedRecord& record) {
  RecordExtraction out;
  std::unordered_map<std::string, std::size_t> entity_index;

  const std::string type = record.jsc.value("@type", std::string{});
  const std::string source = record.source_id();

  auto emit_unit = [&](const Json& unit, const std::string& ref) {
    // The first leaf names the unit; every leaf becomes one triple off it.
    std::string subject_id;
    for_each_leaf(unit, [&](const std::string& path, const std::string& value,
                            ValueType) {
      if (subject_id.empty()) {
        if (is_blank(value)) return;  // a blank name cannot anchor the row
        Entity subject = make_entity(value, "record", {record.id, source, ref});
        subject_id = subject.id;
        merge_entity(out.entities, entity_index, std::move(subject));
      }
      if (is_blank(value)) return;
      Triple t;
      t.subject = subject_id;
      t.predicate = path;
      t.object = ObjectTerm::literal(value);
      t.provenance.push_back({record.id, source, ref});
      out.triples.push_back(std::move(t));
    });
  };

  if (type == "table") {
    const auto& rows = record.jsc.at("rows");
    for (std::size_t r = 0; r < rows.size(); ++r)
      emit_unit(rows[r], "row:" + std::to_string(r));
  } else if (type == "tree") {
    const auto& root = record.jsc.at("root");
    if (root.is_array()) {
      for (std::size_t i = 0; i < root.size(); ++i)
        emit_unit(root[i], "tree:" + std::to_string(i));
    } else {
      emit_unit(root, "tree:0");
    }
  } else {
    raise(Errc::no_extractable_content,
          "rule-based extraction needs a table or tree record, got '" + type +
              "' for " + record.id);
  }

  if (out.triples.empty())
    raise(Errc::no_extractable_content,
          "record " + record.id + " produced no attribute values");
  return out;
}

std::vector<Entity> extract_entities(const NormalizedRecord& record,
                                     GenerationClient& client,
                                     const ExtractionPrompt& prompt) {
  if (record.jsc.value("@type", std::string{}) != "text")
    raise(Errc::precondition,
          "entity extraction expects a text record, got " + record.id);

  std::vector<Entity> entities;
  std::unordered_map<std::string, std::size_t> index;
  const std::string source = record.source_id();

  const auto& chunks = record.jsc.at("chunks");
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    std::string text = chunk_text(record, chunks[c]);
    GenerationRequest req;
    req.kind = RequestKind::ner;
    req.prompt = prompt.render(text);
    req.key = make_request_key(RequestKind::ner, {text});
    std::string reply = client.complete(req);

    Json parsed = Json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
      raise(Errc::reply_parse_error,
            "entity reply is not a JSON array for " + record.id + " " +
                chunk_ref(c));
    for (const auto& item : parsed) {
      std::string label, etype;
      if (item.is_string()) {
        label = item.get<std::string>();
      } else if (item.is_object() && item.contains("label") &&
                 item["label"].is_string()) {
        label = item["label"].get<std::string>();
        etype = item.value("type", std::string{});
      } else {
        raise(Errc::reply_parse_error,
              "entity entries must be strings or {label, type} objects in " +
                  record.id + " " + chunk_ref(c));
      }
      if (is_blank(label)) continue;
      merge_entity(entities, index,
                   make_entity(label, etype, {record.id, source, chunk_ref(c)}));
    }
  }
  return entities;
}

TripleExtraction extract_triples(const NormalizedRecord& record,
                                 const std::vector<Entity>& entities,
                                 GenerationClient& client,
                                 const ExtractionPrompt& prompt) {
  if (record.jsc.value("@type", std::string{}) != "text")
    raise(Errc::precondition,
          "triple extraction expects a text record, got " + record.id);

  std::unordered_set<std::string> known;
  for (const auto& ent : entities) {
    known.insert(ent.id);
    for (const auto& alias : ent.aliases) known.insert(canonical_form(alias));
  }
  // Aliases point at merged entities, so resolve through the entity list.
  std::unordered_map<std::string, std::string> to_id;
  for (const auto& ent : entities) {
    to_id[ent.id] = ent.id;
    for (const auto& alias : ent.aliases) to_id[canonical_form(alias)] = ent.id;
  }

  TripleExtraction out;
  const std::string source = record.source_id();
  const auto& chunks = record.jsc.at("chunks");
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    std::string text = chunk_text(record, chunks[c]);
    GenerationRequest req;
    req.kind = RequestKind::triple;
    req.prompt = prompt.render(text);
    req.key = make_request_key(RequestKind::triple, {text});
    std::string reply = client.complete(req);

    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
      std::string body = trim(line);
      if (body.empty()) continue;

      std::optional<double> score;
      if (std::size_t at = body.rfind('@'); at != std::string::npos) {
        std::string tail = trim(body.substr(at + 1));
        double value = 0.0;
        auto [ptr, ec] =
            std::from_chars(tail.data(), tail.data() + tail.size(), value);
        if (ec == std::errc{} && ptr == tail.data() + tail.size()) {
          score = value;
          body = trim(body.substr(0, at));
        }
      }

      if (body.size() < 2 || body.front() != '(' || body.back() != ')')
        raise(Errc::reply_parse_error,
              "triple line must look like (S, P, O): '" + line + "' in " +
                  record.id + " " + chunk_ref(c));
      auto parts = split_triple_body(
          std::string_view(body).substr(1, body.size() - 2));
      if (parts.size() != 3 || parts[0].empty() || parts[1].empty())
        raise(Errc::reply_parse_error,
              "triple line needs three fields: '" + line + "' in " +
                  record.id + " " + chunk_ref(c));

      auto subject = to_id.find(canonical_form(parts[0]));
      if (subject == to_id.end()) {
        ++out.dropped;  // subject never surfaced as an entity
        continue;
      }

      Triple t;
      t.subject = subject->second;
      t.predicate = parts[1];
      auto object = to_id.find(canonical_form(parts[2]));
      t.object = object != to_id.end() ? ObjectTerm::entity_ref(object->second)
                                       : ObjectTerm::literal(parts[2]);
      t.provenance.push_back({record.id, source, chunk_ref(c)});
      t.extraction_score = score;
      out.triples.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<Entity> apply_alias_map(const std::vector<Entity>& entities,
                                    const AliasMap& aliases) {
  std::vector<Entity> merged;
  std::unordered_map<std::string, std::size_t> index;
  for (const Entity& ent : entities) {
    std::string label = aliases.resolve(ent.label);
    Entity next = ent;
    if (canonical_form(label) != ent.id) {
      next.id = canonical_form(label);
      next.label = label;
      next.aliases.push_back(ent.label);
    }
    std::vector<std::string> extra = std::move(next.aliases);
    next.aliases.clear();
    merge_entity(merged, index, std::move(next));
    Entity& target = merged[index.at(canonical_form(label))];
    for (auto& alias : extra) {
      if (alias != target.label &&
          std::find(target.aliases.begin(), target.aliases.end(), alias) ==
              target.aliases.end())
        target.aliases.push_back(std::move(alias));
    }
  }
  return merged;
}

std::vector<Entity> standardize_entities(const std::vector<Entity>& entities,
                                         GenerationClient& client,
                                         const ExtractionPrompt& prompt) {
  if (entities.empty()) return {};

  std::vector<std::string> labels;
  labels.reserve(entities.size());
  for (const auto& ent : entities) labels.push_back(ent.label);
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());

  std::string input;
  for (const auto& label : labels) {
    if (!input.empty()) input += "\n";
    input += label;
  }
  GenerationRequest req;
  req.kind = RequestKind::std_names;
  req.prompt = prompt.render(input);
  req.key = "std";
  for (const auto& label : sorted) req.key += "\n" + label;
  std::string reply = client.complete(req);

  Json parsed = Json::parse(reply, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    raise(Errc::reply_parse_error,
          "standardization reply is not a JSON object");
  AliasMap map;
  for (const auto& [alias, canonical] : parsed.items()) {
    if (!canonical.is_string())
      raise(Errc::reply_parse_error,
            "standardization values must be strings");
    map.add(alias, canonical.get<std::string>());
  }
  return apply_alias_map(entities, map);
}

}  // namespace multirag
