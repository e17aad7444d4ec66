#include "multirag/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "multirag/io.hpp"
#include "test_util.hpp"

namespace mr = multirag;

namespace {

mr::Engine build_books_engine() {
  const auto cfg = testutil::fixture_config("books");
  auto client = mr::make_client(cfg);
  const auto docs = testutil::fixture_docs("books");
  return mr::build_engine(docs, *client, cfg);
}

std::vector<std::size_t> default_ks() { return {1, 3, 5}; }

}  // namespace

TEST(LoadQueries, ReadsBooksFixture) {
  const auto cases = testutil::fixture_queries("books");
  ASSERT_EQ(cases.size(), 10u);
  EXPECT_EQ(cases[0].query, "Who is the author of The Night Circus?");
  EXPECT_EQ(cases[0].gold, (std::vector<std::string>{"Erin Morgenstern"}));
  EXPECT_EQ(cases[0].domain, "books");
  EXPECT_EQ(cases[1].gold,
            (std::vector<std::string>{"Chilton Books", "Chilton Books Co."}));
}

TEST(LoadQueries, TypedErrors) {
  testutil::TempDir tmp;
  try {
    mr::load_queries(tmp.file("missing.json"));
    FAIL() << "expected io_error";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }

  mr::write_file_atomic(tmp.file("scalar.json"), "42\n");
  EXPECT_THROW(mr::load_queries(tmp.file("scalar.json")), mr::Error);

  mr::write_file_atomic(tmp.file("nogold.json"),
                        R"([{"query": "q", "gold": []}])");
  try {
    mr::load_queries(tmp.file("nogold.json"));
    FAIL() << "expected io_error for empty gold";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::io_error);
  }
}

TEST(ComputeMetrics, HandComputedCases) {
  const auto ks = default_ks();

  {
    std::vector<std::string> predicted = {"Erin Morgenstern"};
    std::vector<std::string> gold = {"erin morgenstern"};
    auto m = mr::compute_metrics(predicted, gold, ks, 0.25);
    EXPECT_DOUBLE_EQ(m.precision, 1.0);
    EXPECT_DOUBLE_EQ(m.recall, 1.0);
    EXPECT_DOUBLE_EQ(m.f1, 1.0);
    EXPECT_DOUBLE_EQ(m.recall_at_k.at(1), 1.0);
    EXPECT_DOUBLE_EQ(m.query_time_s, 0.25);
  }
  {
    std::vector<std::string> predicted = {"A", "B", "C"};
    std::vector<std::string> gold = {"a", "x"};
    auto m = mr::compute_metrics(predicted, gold, ks, 0.0);
    EXPECT_DOUBLE_EQ(m.precision, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.5);
    EXPECT_NEAR(m.f1, 0.4, 1e-12);
  }
  {
    // Duplicates collapse before scoring; case and spacing are ignored.
    std::vector<std::string> predicted = {"Ace  Books", "ace books", "Dune"};
    std::vector<std::string> gold = {"ACE BOOKS"};
    auto m = mr::compute_metrics(predicted, gold, ks, 0.0);
    EXPECT_DOUBLE_EQ(m.precision, 0.5);
    EXPECT_DOUBLE_EQ(m.recall, 1.0);
  }
  {
    std::vector<std::string> predicted;
    std::vector<std::string> gold = {"a"};
    auto m = mr::compute_metrics(predicted, gold, ks, 0.0);
    EXPECT_DOUBLE_EQ(m.precision, 0.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.0);
    EXPECT_DOUBLE_EQ(m.f1, 0.0);
    EXPECT_DOUBLE_EQ(m.recall_at_k.at(5), 0.0);
  }
  {
    // Blank predictions are dropped entirely.
    std::vector<std::string> predicted = {"   ", "\t"};
    std::vector<std::string> gold = {"a"};
    auto m = mr::compute_metrics(predicted, gold, ks, 0.0);
    EXPECT_DOUBLE_EQ(m.precision, 0.0);
  }
}

TEST(ComputeMetrics, RecallAtKIsNondecreasingAndRankSensitive) {
  std::vector<std::size_t> ks = {1, 2, 3, 10};
  std::vector<std::string> predicted = {"wrong", "gold one", "gold two"};
  std::vector<std::string> gold = {"gold one", "gold two"};
  auto m = mr::compute_metrics(predicted, gold, ks, 0.0);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at(1), 0.0);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at(2), 0.5);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at(3), 1.0);
  EXPECT_DOUBLE_EQ(m.recall_at_k.at(10), 1.0);
  double prev = 0.0;
  for (const auto& [k, v] : m.recall_at_k) {
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(m.recall_at_k.at(10), m.recall);

  // F1 is bounded by precision and recall.
  EXPECT_LE(m.f1, std::max(m.precision, m.recall));
  EXPECT_GE(m.f1, std::min(m.precision, m.recall));
}

TEST(GoldSupportingTriples, FindsEveryAnswerCarrier) {
  auto engine = build_books_engine();
  const auto queries = testutil::fixture_queries("books");
  const auto ids = mr::gold_supporting_triples(engine.kg, queries);
  EXPECT_EQ(ids, (std::vector<mr::TripleId>{1, 2, 3, 4, 6, 7, 8, 11, 12, 13,
                                            15, 18}));
}

TEST(PerturbMask, RateZeroIsIdentity) {
  auto engine = build_books_engine();
  mr::PerturbationSpec spec;
  spec.kind = mr::PerturbationKind::mask_relations;
  spec.rate = 0.0;
  auto masked = mr::perturb_mask(engine.kg, spec, {});
  EXPECT_EQ(masked, engine.kg);
}

TEST(PerturbMask, RemovesFlooredFractionOfUnprotected) {
  auto engine = build_books_engine();
  const auto queries = testutil::fixture_queries("books");
  const auto protected_ids = mr::gold_supporting_triples(engine.kg, queries);
  ASSERT_EQ(protected_ids.size(), 12u);

  mr::PerturbationSpec spec;
  spec.kind = mr::PerturbationKind::mask_relations;
  spec.rate = 0.5;
  spec.seed = 42;
  auto masked = mr::perturb_mask(engine.kg, spec, protected_ids);

  // 19 triples, 12 protected -> 7 maskable -> floor(3.5) = 3 removed.
  EXPECT_EQ(masked.triple_count(), 16u);
  EXPECT_EQ(masked.entities().size(), engine.kg.entities().size());

  // Every protected triple survives verbatim.
  std::set<std::string> masked_texts;
  for (mr::TripleId id = 0; id < masked.triple_count(); ++id)
    masked_texts.insert(mr::triple_text(masked, id));
  for (mr::TripleId id : protected_ids)
    EXPECT_TRUE(masked_texts.count(mr::triple_text(engine.kg, id)))
        << mr::triple_text(engine.kg, id);

  // Same seed, same graph; different seed may differ but keeps the count.
  auto again = mr::perturb_mask(engine.kg, spec, protected_ids);
  EXPECT_EQ(again, masked);
  spec.seed = 43;
  auto other = mr::perturb_mask(engine.kg, spec, protected_ids);
  EXPECT_EQ(other.triple_count(), 16u);
}

TEST(PerturbMask, TypedErrors) {
  auto engine = build_books_engine();
  mr::PerturbationSpec spec;
  spec.kind = mr::PerturbationKind::mask_relations;
  spec.rate = 1.0;
  try {
    mr::perturb_mask(engine.kg, spec, {});
    FAIL() << "expected rate_too_high";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::rate_too_high);
  }
  spec.rate = -0.25;
  try {
    mr::perturb_mask(engine.kg, spec, {});
    FAIL() << "expected precondition";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::precondition);
  }
  spec.kind = mr::PerturbationKind::duplicate_shuffle;
  spec.rate = 0.5;
  EXPECT_THROW(mr::perturb_mask(engine.kg, spec, {}), mr::Error);
}

TEST(PerturbDuplicateShuffle, AppendsMisattributedCopies) {
  auto engine = build_books_engine();
  const std::size_t n = engine.kg.triple_count();

  mr::PerturbationSpec spec;
  spec.kind = mr::PerturbationKind::duplicate_shuffle;
  spec.rate = 0.7;
  spec.seed = 42;
  auto shuffled = mr::perturb_duplicate_shuffle(engine.kg, spec);

  // floor(0.7 * 19) = 13 copies appended; originals untouched.
  ASSERT_EQ(shuffled.triple_count(), n + 13);
  for (mr::TripleId id = 0; id < n; ++id)
    EXPECT_EQ(shuffled.triple(id), engine.kg.triple(id)) << id;

  for (mr::TripleId id = static_cast<mr::TripleId>(n);
       id < shuffled.triple_count(); ++id) {
    const mr::Triple& copy = shuffled.triple(id);
    ASSERT_FALSE(copy.provenance.empty());
    for (const auto& pv : copy.provenance) {
      ASSERT_GE(pv.ref.size(), 9u);
      EXPECT_EQ(pv.ref.substr(pv.ref.size() - 9), "#shuffled") << pv.ref;
    }

    // The copy keeps its source triple's identity except for the object,
    // which must differ from the original's.
    mr::Triple stripped = copy;
    for (auto& pv : stripped.provenance)
      pv.ref = pv.ref.substr(0, pv.ref.size() - 9);
    bool found = false;
    for (mr::TripleId orig = 0; orig < n; ++orig) {
      const mr::Triple& t = engine.kg.triple(orig);
      if (t.subject == stripped.subject && t.predicate == stripped.predicate &&
          t.provenance == stripped.provenance) {
        EXPECT_NE(t.object, copy.object);
        found = true;
        break;
      }
    }
    EXPECT_TRUE(found) << "no original matches copy " << id;
  }

  // Deterministic under the seed.
  auto again = mr::perturb_duplicate_shuffle(engine.kg, spec);
  EXPECT_EQ(again, shuffled);

  // Rate zero is the identity.
  spec.rate = 0.0;
  EXPECT_EQ(mr::perturb_duplicate_shuffle(engine.kg, spec), engine.kg);

  // Kind mismatch is rejected.
  spec.kind = mr::PerturbationKind::mask_relations;
  spec.rate = 0.5;
  EXPECT_THROW(mr::perturb_duplicate_shuffle(engine.kg, spec), mr::Error);
}

TEST(PerturbationKindTest, StringRoundTrip) {
  EXPECT_EQ(mr::to_string(mr::PerturbationKind::mask_relations),
            "mask_relations");
  EXPECT_EQ(mr::to_string(mr::PerturbationKind::duplicate_shuffle),
            "duplicate_shuffle");
  EXPECT_EQ(mr::perturbation_kind_from_string("mask_relations"),
            mr::PerturbationKind::mask_relations);
  EXPECT_EQ(mr::perturbation_kind_from_string("duplicate_shuffle"),
            mr::PerturbationKind::duplicate_shuffle);
  EXPECT_THROW(mr::perturbation_kind_from_string("typo"), mr::Error);
}

TEST(RunSuite, BooksFullModeIsPerfectAndDeterministic) {
  const auto cfg = testutil::fixture_config("books");
  const auto docs = testutil::fixture_docs("books");
  const auto queries = testutil::fixture_queries("books");

  mr::SuiteOptions opts;
  auto rep = mr::run_suite(docs, queries, cfg, opts);

  EXPECT_EQ(rep.mode, mr::PipelineMode::full);
  EXPECT_EQ(rep.per_query.size(), queries.size());
  EXPECT_EQ(rep.failed_queries, 0u);
  EXPECT_NEAR(rep.aggregate.f1, 1.0, 1e-12);
  EXPECT_NEAR(rep.aggregate.precision, 1.0, 1e-12);
  EXPECT_NEAR(rep.aggregate.recall, 1.0, 1e-12);
  EXPECT_GT(rep.client_calls, 0u);
  EXPECT_GT(rep.authority_calls, 0u);
  EXPECT_GT(rep.history_lookups, 0u);
  EXPECT_GE(rep.total_query_time_s, 0.0);
  for (const auto& qr : rep.per_query) {
    EXPECT_FALSE(qr.failed);
    EXPECT_GE(qr.metrics.query_time_s, 0.0);
  }

  // Source history is read-only during the run: repeats are identical.
  auto rep2 = mr::run_suite(docs, queries, cfg, opts);
  EXPECT_DOUBLE_EQ(rep2.aggregate.f1, rep.aggregate.f1);
  ASSERT_EQ(rep2.per_query.size(), rep.per_query.size());
  for (std::size_t i = 0; i < rep.per_query.size(); ++i)
    EXPECT_EQ(rep2.per_query[i].predicted, rep.per_query[i].predicted);
}

TEST(RunSuite, AblationsDegradeGracefully) {
  const auto cfg = testutil::fixture_config("books");
  const auto docs = testutil::fixture_docs("books");
  const auto queries = testutil::fixture_queries("books");

  mr::SuiteOptions full_opts;
  mr::SuiteOptions raw_opts;
  raw_opts.mode = mr::PipelineMode::no_mcc;

  const auto full = mr::run_suite(docs, queries, cfg, full_opts);
  const auto raw = mr::run_suite(docs, queries, cfg, raw_opts);
  EXPECT_GT(full.aggregate.f1, raw.aggregate.f1);
  EXPECT_GT(raw.aggregate.f1, 0.8);
  EXPECT_EQ(raw.authority_calls, 0u);
}

TEST(RunSuite, MaskingProtectsGoldCarriers) {
  const auto cfg = testutil::fixture_config("books");
  const auto docs = testutil::fixture_docs("books");
  const auto queries = testutil::fixture_queries("books");

  mr::SuiteOptions opts;
  mr::PerturbationSpec spec;
  spec.kind = mr::PerturbationKind::mask_relations;
  spec.rate = 0.3;
  spec.seed = 42;
  opts.perturbation = spec;

  auto rep = mr::run_suite(docs, queries, cfg, opts);
  EXPECT_EQ(rep.failed_queries, 0u);
  EXPECT_NEAR(rep.aggregate.f1, 1.0, 1e-12);
}

TEST(SweepAlpha, EndpointsDisableTheUnusedSide) {
  const auto cfg = testutil::fixture_config("books");
  const auto docs = testutil::fixture_docs("books");
  const auto queries = testutil::fixture_queries("books");

  const std::vector<double> alphas = {0.0, 1.0};
  mr::SuiteOptions opts;
  auto rows = mr::sweep_alpha(docs, queries, cfg, alphas, opts);
  ASSERT_EQ(rows.size(), 2u);

  EXPECT_DOUBLE_EQ(rows[0].alpha, 0.0);
  EXPECT_EQ(rows[0].authority_calls, 0u);
  EXPECT_GT(rows[0].history_lookups, 0u);

  EXPECT_DOUBLE_EQ(rows[1].alpha, 1.0);
  EXPECT_GT(rows[1].authority_calls, 0u);
  EXPECT_EQ(rows[1].history_lookups, 0u);

  for (const auto& row : rows) {
    EXPECT_GE(row.f1, 0.0);
    EXPECT_LE(row.f1, 1.0);
  }

  const std::vector<double> bad = {1.5};
  try {
    mr::sweep_alpha(docs, queries, cfg, bad, opts);
    FAIL() << "expected precondition";
  } catch (const mr::Error& e) {
    EXPECT_EQ(e.code(), mr::Errc::precondition);
  }
}

TEST(EvalJson, ReportsParseBack) {
  const auto cfg = testutil::fixture_config("books");
  const auto docs = testutil::fixture_docs("books");
  const auto queries = testutil::fixture_queries("books");

  mr::SuiteOptions opts;
  auto rep = mr::run_suite(docs, queries, cfg, opts);
  const std::string text = mr::eval_report_to_json(rep);
  const auto parsed = mr::Json::parse(text);
  EXPECT_EQ(parsed.at("mode"), "full");
  EXPECT_EQ(parsed.at("per_query").size(), queries.size());
  EXPECT_DOUBLE_EQ(parsed.at("aggregate").at("f1").get<double>(),
                   rep.aggregate.f1);
  EXPECT_EQ(parsed.at("failed_queries").get<std::size_t>(), 0u);

  std::vector<mr::SweepRow> rows = {{0.5, 0.9, 0.1, 7, 9}};
  const auto sweep = mr::Json::parse(mr::sweep_to_json(rows));
  ASSERT_TRUE(sweep.is_array());
  ASSERT_EQ(sweep.size(), 1u);
  EXPECT_DOUBLE_EQ(sweep[0].at("alpha").get<double>(), 0.5);
  EXPECT_EQ(sweep[0].at("authority_calls").get<std::uint64_t>(), 7u);
}
