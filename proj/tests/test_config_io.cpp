#include "multirag/config.hpp"
#include "multirag/io.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_util.hpp"

namespace mr = multirag;

namespace {

mr::Engine build_books_engine() {
  const auto cfg = testutil::fixture_config("books");
  auto client = mr::make_client(cfg);
  const auto docs = testutil::fixture_docs("books");
  return mr::build_engine(docs, *client, cfg);
}

void expect_config_error(const char* key, const char* value) {
  mr::EngineConfig cfg;
  try {
    mr::apply_config_entry(cfg, key, value);
    FAIL() << key << " = " << value << " should have been rejected";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::config_error) << key;
  }
}

}  // namespace

TEST(ApplyConfigEntry, ParsesEveryValueKind) {
  mr::EngineConfig cfg;
  mr::apply_config_entry(cfg, "alpha", "0.25");
  EXPECT_DOUBLE_EQ(cfg.confidence.alpha, 0.25);
  mr::apply_config_entry(cfg, " top_k ", " 7 ");
  EXPECT_EQ(cfg.confidence.top_k, 7u);
  mr::apply_config_entry(cfg, "standardize", "false");
  EXPECT_FALSE(cfg.standardize);
  mr::apply_config_entry(cfg, "standardize", "yes");
  EXPECT_TRUE(cfg.standardize);
  mr::apply_config_entry(cfg, "similarity_mode", "mi_ratio");
  EXPECT_EQ(cfg.confidence.similarity_mode, mr::SimilarityMode::mi_ratio);
  mr::apply_config_entry(cfg, "client_mode", "live");
  EXPECT_EQ(cfg.client_mode, "live");
  mr::apply_config_entry(cfg, "mock_fixtures", "replies.json");
  EXPECT_EQ(cfg.mock_fixtures, "replies.json");
  mr::apply_config_entry(cfg, "seed", "123");
  EXPECT_EQ(cfg.seed, 123u);
}

TEST(ApplyConfigEntry, RejectsBadKeysAndValues) {
  expect_config_error("no_such_key", "1");
  expect_config_error("alpha", "fast");
  expect_config_error("alpha", "1.5");
  expect_config_error("beta", "0");
  expect_config_error("top_k", "-3");
  expect_config_error("standardize", "maybe");
  expect_config_error("client_mode", "imaginary");
  expect_config_error("chunk_size", "0");
  expect_config_error("smoothing", "laplace2");
}

TEST(LoadConfig, ReadsBooksFixture) {
  const std::string path = testutil::fixture_dir("books") + "/config.cfg";
  mr::EngineConfig cfg = mr::load_config(path);
  EXPECT_DOUBLE_EQ(cfg.confidence.alpha, 0.5);
  EXPECT_DOUBLE_EQ(cfg.confidence.beta, 1.0);
  EXPECT_DOUBLE_EQ(cfg.confidence.node_threshold, 0.7);
  EXPECT_DOUBLE_EQ(cfg.confidence.graph_threshold, 0.15);
  EXPECT_EQ(cfg.confidence.top_k, 2u);
  EXPECT_EQ(cfg.confidence.similarity_mode,
            mr::SimilarityMode::symmetric_uncertainty);
  EXPECT_EQ(cfg.min_members, 2u);
  EXPECT_EQ(cfg.min_sources, 2u);
  EXPECT_EQ(cfg.promote_min_sources, 2u);
  EXPECT_EQ(cfg.client_mode, "mock");
  EXPECT_EQ(cfg.mock_fixtures, "mock_replies.json");
  EXPECT_EQ(cfg.prompts_dir, "prompts");
  EXPECT_EQ(cfg.history_path, "history.json");
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(LoadConfig, TypedErrors) {
  testutil::TempDir tmp;
  try {
    mr::load_config(tmp.file("missing.cfg"));
    FAIL() << "expected io_error";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }

  mr::write_file_atomic(tmp.file("noeq.cfg"), "alpha 0.5\n");
  try {
    mr::load_config(tmp.file("noeq.cfg"));
    FAIL() << "expected config_error";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::config_error);
  }

  // Comments and blank lines are fine.
  mr::write_file_atomic(tmp.file("ok.cfg"),
                        "# comment\n\n  alpha = 0.75  \n");
  EXPECT_DOUBLE_EQ(mr::load_config(tmp.file("ok.cfg")).confidence.alpha, 0.75);
}

TEST(ValidateConfig, RejectsInconsistentModes) {
  mr::EngineConfig mock_without_fixtures;
  mock_without_fixtures.client_mode = "mock";
  mock_without_fixtures.mock_fixtures.clear();
  EXPECT_THROW(mock_without_fixtures.validate(), mr::Error);

  mr::EngineConfig live_without_endpoint;
  live_without_endpoint.client_mode = "live";
  EXPECT_THROW(live_without_endpoint.validate(), mr::Error);

  mr::EngineConfig overlap;
  overlap.mock_fixtures = "replies.json";
  overlap.chunk_size = 64;
  overlap.chunk_overlap = 64;
  EXPECT_THROW(overlap.validate(), mr::Error);

  mr::EngineConfig ok;
  ok.mock_fixtures = "replies.json";
  EXPECT_NO_THROW(ok.validate());
}

TEST(FileIo, AtomicWriteAndRead) {
  testutil::TempDir tmp;
  const std::string path = tmp.file("nested/dir/out.txt");
  const std::string content = "line one\nline two\nd\xC3\xA9j\xC3\xA0 vu\n";
  mr::write_file_atomic(path, content);
  EXPECT_EQ(mr::read_file(path), content);

  // Overwrites replace the whole file.
  mr::write_file_atomic(path, "short\n");
  EXPECT_EQ(mr::read_file(path), "short\n");

  try {
    mr::read_file(tmp.file("absent.txt"));
    FAIL() << "expected io_error";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }
}

TEST(RoundTrip, StoreSurvivesSaveLoad) {
  auto engine = build_books_engine();
  testutil::TempDir tmp;
  const std::string path = tmp.file("store.jsonl");
  mr::save_store(engine.store, path);
  mr::RecordStore loaded = mr::load_store(path);
  EXPECT_EQ(loaded, engine.store);

  // A second save of the loaded store is byte-identical.
  const std::string again = tmp.file("store2.jsonl");
  mr::save_store(loaded, again);
  EXPECT_EQ(mr::read_file(again), mr::read_file(path));
}

TEST(RoundTrip, GraphSurvivesSaveLoad) {
  auto engine = build_books_engine();
  testutil::TempDir tmp;
  const std::string path = tmp.file("graph.jsonl");
  mr::save_graph(engine.kg, path);
  mr::KnowledgeGraph loaded = mr::load_graph(path);
  EXPECT_EQ(loaded, engine.kg);

  // Entity labels and types survive, so display text is unchanged.
  for (mr::TripleId id = 0; id < engine.kg.triple_count(); ++id)
    EXPECT_EQ(mr::triple_text(loaded, id), mr::triple_text(engine.kg, id));

  const std::string again = tmp.file("graph2.jsonl");
  mr::save_graph(loaded, again);
  EXPECT_EQ(mr::read_file(again), mr::read_file(path));
}

TEST(RoundTrip, PartitionSurvivesSaveLoad) {
  auto engine = build_books_engine();
  testutil::TempDir tmp;
  const std::string path = tmp.file("partition.json");
  mr::save_partition(engine.partition, path);
  mr::HomologyPartition loaded = mr::load_partition(path);
  EXPECT_EQ(loaded, engine.partition);
}

TEST(RoundTrip, HistorySurvivesSaveLoad) {
  mr::SourceHistory hist(40.0, 0.6);
  hist.update("feed", {3.0, 4.0});
  hist.update("forum", {0.0, 5.0});
  testutil::TempDir tmp;
  const std::string path = tmp.file("history.json");
  mr::save_history(hist, path);
  EXPECT_EQ(mr::load_history(path), hist);
}

TEST(Golden, BooksArtifactsAreByteStable) {
  auto engine = build_books_engine();
  testutil::TempDir tmp;

  mr::save_store(engine.store, tmp.file("store.jsonl"));
  EXPECT_EQ(mr::read_file(tmp.file("store.jsonl")),
            mr::read_file(testutil::golden_path("books/store.jsonl")));

  mr::save_graph(engine.kg, tmp.file("graph.jsonl"));
  EXPECT_EQ(mr::read_file(tmp.file("graph.jsonl")),
            mr::read_file(testutil::golden_path("books/graph.jsonl")));

  mr::save_partition(engine.partition, tmp.file("partition.json"));
  EXPECT_EQ(mr::read_file(tmp.file("partition.json")),
            mr::read_file(testutil::golden_path("books/partition.json")));
}

TEST(SaveLineGraph, WritesAdjacencyLines) {
  std::vector<mr::Triple> triples;
  for (int i = 0; i < 3; ++i) {
    mr::Triple t;
    t.subject = "hub";
    t.predicate = "p" + std::to_string(i);
    t.object = mr::ObjectTerm::literal("v" + std::to_string(i));
    triples.push_back(t);
  }
  mr::KnowledgeGraph g({}, triples);
  auto lg = mr::to_line_graph(g);

  testutil::TempDir tmp;
  const std::string path = tmp.file("line.jsonl");
  mr::save_line_graph(lg, path);
  EXPECT_EQ(mr::read_file(path),
            "{\"triple_id\":0,\"neighbors\":[1,2]}\n"
            "{\"triple_id\":1,\"neighbors\":[0,2]}\n"
            "{\"triple_id\":2,\"neighbors\":[0,1]}\n");
}

TEST(AnswerJson, SerializesAllSections) {
  mr::Answer a;
  a.text = "Dune was published by Chilton Books.";
  a.supporting.push_back(
      {7, 0.75, "(dune, publisher, Chilton Books)", "books_catalog"});
  a.conflicts.push_back({18, 0.25, "(dune, publisher, Ace Books)",
                         "book_reviews", "confidence below threshold"});
  a.graph_confidences["dune|publisher"] = 0.5;
  a.timings["total"] = 0.001;

  mr::Json j = mr::answer_to_json(a);
  EXPECT_EQ(j.at("text"), a.text);
  ASSERT_EQ(j.at("supporting").size(), 1u);
  EXPECT_EQ(j.at("supporting")[0].at("member"), 7);
  EXPECT_EQ(j.at("supporting")[0].at("source"), "books_catalog");
  ASSERT_EQ(j.at("conflicts").size(), 1u);
  EXPECT_EQ(j.at("conflicts")[0].at("reason"), "confidence below threshold");
  EXPECT_DOUBLE_EQ(j.at("graph_confidences").at("dune|publisher").get<double>(),
                   0.5);
  EXPECT_FALSE(j.contains("low_evidence"));

  a.low_evidence = true;
  EXPECT_TRUE(mr::answer_to_json(a).at("low_evidence").get<bool>());
}

TEST(LoadManifest, TypedErrors) {
  testutil::TempDir tmp;
  try {
    mr::load_manifest(tmp.file("missing.json"));
    FAIL() << "expected io_error";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }

  mr::write_file_atomic(tmp.file("object.json"), "{}\n");
  try {
    mr::load_manifest(tmp.file("object.json"));
    FAIL() << "expected io_error for non-array manifest";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }
}
