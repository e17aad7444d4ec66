#include "multirag/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace multirag {

namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot open " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) raise(Errc::io_error, "short write to " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec)
    raise(Errc::io_error,
          "cannot rename " + temp.string() + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

Json parse_json(const std::string& text, const std::string& what) {
  Json parsed = Json::parse(text, nullptr, false);
  if (parsed.is_discarded())
    raise(Errc::io_error, what + " is not valid JSON");
  return parsed;
}

Json meta_to_json(const std::map<std::string, std::string>& meta) {
  Json out = Json::object();
  for (const auto& [key, value] : meta) out[key] = value;
  return out;
}

Json provenance_to_json(const std::vector<Provenance>& provenance) {
  Json arr = Json::array();
  for (const auto& p : provenance) {
    Json entry = Json::object();
    entry["record"] = p.record_id;
    entry["source"] = p.source_id;
    entry["ref"] = p.ref;
    arr.push_back(std::move(entry));
  }
  return arr;
}

std::vector<Provenance> provenance_from_json(const Json& arr) {
  std::vector<Provenance> out;
  for (const auto& entry : arr)
    out.push_back({entry.at("record").get<std::string>(),
                   entry.at("source").get<std::string>(),
                   entry.at("ref").get<std::string>()});
  return out;
}

}  // namespace

void save_store(const RecordStore& store, const std::string& path) {
  std::string out;
  for (const NormalizedRecord& record : store.records()) {
    Json line = Json::object();
    line["id"] = record.id;
    line["domain"] = record.domain;
    line["name"] = record.name;
    line["meta"] = meta_to_json(record.meta);
    line["jsc"] = record.jsc;
    if (record.cols_index) {
      Json cols = Json::object();
      for (const auto& [attribute, index] : *record.cols_index) {
        Json col = Json::object();
        col["column_id"] = index.column_id;
        col["row_refs"] = index.row_refs;
        cols[attribute] = std::move(col);
      }
      line["cols_index"] = std::move(cols);
    } else {
      line["cols_index"] = nullptr;
    }
    out += line.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

RecordStore load_store(const std::string& path) {
  std::istringstream in(read_file(path));
  RecordStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    Json parsed =
        parse_json(line, path + ":" + std::to_string(lineno));

    NormalizedRecord record;
    record.id = parsed.at("id").get<std::string>();
    record.domain = parsed.at("domain").get<std::string>();
    record.name = parsed.at("name").get<std::string>();
    for (const auto& [key, value] : parsed.at("meta").items())
      record.meta.emplace(key, value.get<std::string>());
    record.jsc = parsed.at("jsc");
    if (!parsed.at("cols_index").is_null()) {
      ColumnIndexMap cols;
      for (const auto& [attribute, col] : parsed.at("cols_index").items()) {
        ColumnIndex index;
        index.attribute = attribute;
        index.column_id = col.at("column_id").get<std::size_t>();
        index.row_refs = col.at("row_refs").get<std::vector<std::size_t>>();
        cols.emplace(attribute, std::move(index));
      }
      record.cols_index = std::move(cols);
    }
    store.append(std::move(record));
  }
  return store;
}

void save_graph(const KnowledgeGraph& g, const std::string& path) {
  std::string out;
  for (const auto& [id, ent] : g.entities()) {
    Json line = Json::object();
    Json body = Json::object();
    body["id"] = ent.id;
    body["label"] = ent.label;
    body["etype"] = ent.etype;
    body["aliases"] = ent.aliases;
    body["provenance"] = provenance_to_json({ent.provenance});
    line["entity"] = std::move(body);
    out += line.dump();
    out += '\n';
  }
  for (const Triple& tr : g.triples()) {
    Json line = Json::object();
    line["s"] = tr.subject;
    line["p"] = tr.predicate;
    if (tr.object.is_entity()) {
      Json ref = Json::object();
      ref["id"] = tr.object.value;
      line["o"] = std::move(ref);
    } else {
      line["o"] = tr.object.value;
    }
    line["provenance"] = provenance_to_json(tr.provenance);
    out += line.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

KnowledgeGraph load_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Entity> entities;
  std::vector<Triple> triples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    Json parsed = parse_json(line, path + ":" + std::to_string(lineno));

    if (parsed.contains("entity")) {
      const Json& body = parsed.at("entity");
      Entity ent;
      ent.id = body.at("id").get<std::string>();
      ent.label = body.at("label").get<std::string>();
      ent.etype = body.at("etype").get<std::string>();
      ent.aliases = body.at("aliases").get<std::vector<std::string>>();
      auto prov = provenance_from_json(body.at("provenance"));
      if (!prov.empty()) ent.provenance = std::move(prov.front());
      entities.push_back(std::move(ent));
      continue;
    }

    Triple tr;
    tr.subject = parsed.at("s").get<std::string>();
    tr.predicate = parsed.at("p").get<std::string>();
    const Json& o = parsed.at("o");
    if (o.is_object())
      tr.object = ObjectTerm::entity_ref(o.at("id").get<std::string>());
    else
      tr.object = ObjectTerm::literal(o.get<std::string>());
    tr.provenance = provenance_from_json(parsed.at("provenance"));
    triples.push_back(std::move(tr));
  }
  return KnowledgeGraph(std::move(entities), std::move(triples));
}

void save_line_graph(const LineGraph& lg, const std::string& path) {
  std::string out;
  for (TripleId t = 0; t < lg.node_count(); ++t) {
    Json line = Json::object();
    line["triple_id"] = t;
    line["neighbors"] = lg.neighbors(t);
    out += line.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

void save_partition(const HomologyPartition& p, const std::string& path) {
  Json root = Json::object();
  Json subgraphs = Json::array();
  for (const auto& sg : p.subgraphs) {
    Json entry = Json::object();
    entry["key"] = sg.key();
    entry["members"] = sg.members;
    entry["sources"] = sg.sources;
    entry["num"] = sg.snode.num;
    subgraphs.push_back(std::move(entry));
  }
  root["subgraphs"] = std::move(subgraphs);
  root["isolated"] = p.isolated;
  write_file_atomic(path, root.dump(2) + "\n");
}

HomologyPartition load_partition(const std::string& path) {
  Json root = parse_json(read_file(path), path);
  HomologyPartition p;
  for (const auto& entry : root.at("subgraphs")) {
    HomologousSubgraph sg;
    const std::string key = entry.at("key").get<std::string>();
    std::size_t sep = key.find('|');
    if (sep == std::string::npos)
      raise(Errc::io_error, "partition key without separator: " + key);
    sg.subject = key.substr(0, sep);
    sg.predicate = key.substr(sep + 1);
    sg.members = entry.at("members").get<std::vector<TripleId>>();
    sg.sources = entry.at("sources").get<std::vector<std::string>>();
    for (TripleId m : sg.members) sg.edges.push_back({m, 1.0});
    for (std::size_t i = 0; i < sg.members.size(); ++i)
      for (std::size_t k = i + 1; k < sg.members.size(); ++k)
        sg.line_edges.emplace_back(sg.members[i], sg.members[k]);
    sg.snode.name = sg.predicate;
    sg.snode.meta = "subject=" + sg.subject + " sources=";
    for (std::size_t i = 0; i < sg.sources.size(); ++i)
      sg.snode.meta += (i ? "," : "") + sg.sources[i];
    sg.snode.num = entry.at("num").get<std::size_t>();
    p.subgraphs.push_back(std::move(sg));
  }
  p.isolated = root.at("isolated").get<std::vector<TripleId>>();
  return p;
}

void save_history(const SourceHistory& hist, const std::string& path) {
  Json root = Json::object();
  root["init_weight"] = hist.init_weight();
  root["default_prior"] = hist.default_prior();
  Json sources = Json::object();
  for (const auto& [source, entry] : hist.entries()) {
    Json e = Json::object();
    e["weight"] = entry.weight;
    e["prior"] = entry.prior;
    sources[source] = std::move(e);
  }
  root["sources"] = std::move(sources);
  write_file_atomic(path, root.dump(2) + "\n");
}

SourceHistory load_history(const std::string& path) {
  Json root = parse_json(read_file(path), path);
  SourceHistory hist(root.value("init_weight", 50.0),
                     root.value("default_prior", 0.5));
  if (root.contains("sources")) {
    for (const auto& [source, entry] : root.at("sources").items())
      hist.set(source, {entry.at("weight").get<double>(),
                        entry.at("prior").get<double>()});
  }
  return hist;
}

std::vector<RawDocument> load_manifest(const std::string& manifest_path) {
  Json root = parse_json(read_file(manifest_path), manifest_path);
  if (!root.is_array())
    raise(Errc::io_error, "manifest must be a JSON array: " + manifest_path);

  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<RawDocument> docs;
  for (const auto& entry : root) {
    RawDocument doc;
    fs::path file(entry.at("path").get<std::string>());
    if (file.is_relative()) file = base / file;
    doc.source_id = entry.at("source_id").get<std::string>();
    doc.domain = entry.at("domain").get<std::string>();
    doc.format = doc_format_from_string(entry.at("format").get<std::string>());
    doc.name = file.filename().string();
    doc.content = read_file(file.string());
    if (entry.contains("meta"))
      for (const auto& [key, value] : entry.at("meta").items())
        doc.meta.emplace(key, value.get<std::string>());
    docs.push_back(std::move(doc));
  }
  return docs;
}

Json answer_to_json(const Answer& answer) {
  Json root = Json::object();
  root["text"] = answer.text;

  Json supporting = Json::array();
  for (const auto& s : answer.supporting) {
    Json entry = Json::object();
    entry["member"] = s.member;
    entry["confidence"] = s.confidence;
    entry["triple"] = s.triple;
    entry["source"] = s.source;
    supporting.push_back(std::move(entry));
  }
  root["supporting"] = std::move(supporting);

  Json conflicts = Json::array();
  for (const auto& c : answer.conflicts) {
    Json entry = Json::object();
    entry["member"] = c.member;
    entry["confidence"] = c.confidence;
    entry["triple"] = c.triple;
    entry["source"] = c.source;
    entry["reason"] = c.reason;
    conflicts.push_back(std::move(entry));
  }
  root["conflicts"] = std::move(conflicts);

  Json graph_conf = Json::object();
  for (const auto& [key, value] : answer.graph_confidences)
    graph_conf[key] = value;
  root["graph_confidences"] = std::move(graph_conf);

  Json timings = Json::object();
  for (const auto& [key, value] : answer.timings) timings[key] = value;
  root["timings"] = std::move(timings);

  if (answer.low_evidence) root["low_evidence"] = true;
  return root;
}

}  // namespace multirag
