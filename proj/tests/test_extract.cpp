#include "multirag/extract.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "multirag/client.hpp"
#include "multirag/ingest.hpp"
#include "multirag/prompt.hpp"

namespace mr = multirag;

namespace {

mr::NormalizedRecord table_record() {
  mr::RawDocument doc;
  doc.source_id = "catalog";
  doc.domain = "books";
  doc.name = "t.csv";
  doc.content = "title,author,year\nDune,Frank Herbert,1965\n"
                "Neuromancer,William Gibson,1984\n";
  doc.format = mr::DocFormat::structured;
  mr::NormalizedRecord rec = mr::normalize_document(doc);
  rec.id = "r0";
  return rec;
}

mr::NormalizedRecord text_record(const std::string& body) {
  mr::RawDocument doc;
  doc.source_id = "notes";
  doc.domain = "books";
  doc.name = "n.txt";
  doc.content = body;
  doc.format = mr::DocFormat::unstructured;
  mr::NormalizedRecord rec = mr::normalize_document(doc);
  rec.id = "r9";
  return rec;
}

}  // namespace

TEST(AliasMapTest, ResolvesChainsToFixpoint) {
  mr::AliasMap map;
  map.add("E. Morgan", "Erin M.");
  map.add("Erin M.", "Erin Morgenstern");
  EXPECT_EQ(map.resolve("E. Morgan"), "Erin Morgenstern");
  EXPECT_EQ(map.resolve("e.  morgan"), "Erin Morgenstern");
  EXPECT_EQ(map.resolve("unknown"), "unknown");
}

TEST(AliasMapTest, CyclesStopAtStartingPoint) {
  mr::AliasMap map;
  map.add("a", "b");
  map.add("b", "a");
  const std::string resolved = map.resolve("a");
  EXPECT_TRUE(resolved == "a" || resolved == "b");
  // Resolution terminates; hitting either end of the cycle is acceptable.
}

TEST(AliasMapTest, SelfMappingsIgnored) {
  mr::AliasMap map;
  map.add("Dune", "dune");  // same canonical form; no-op
  EXPECT_TRUE(map.empty());
}

TEST(RuleBasedExtraction, OneSubjectPerRowOneTriplePerCell) {
  auto ex = mr::extract_rule_based(table_record());
  ASSERT_EQ(ex.entities.size(), 2u);
  EXPECT_EQ(ex.entities[0].id, "dune");
  EXPECT_EQ(ex.entities[0].label, "Dune");
  EXPECT_EQ(ex.entities[0].etype, "record");
  EXPECT_EQ(ex.entities[0].provenance.ref, "row:0");
  EXPECT_EQ(ex.entities[1].id, "neuromancer");

  // Every cell (the naming cell included) becomes a triple off the subject.
  ASSERT_EQ(ex.triples.size(), 6u);
  EXPECT_EQ(ex.triples[0].subject, "dune");
  EXPECT_EQ(ex.triples[0].predicate, "title");
  EXPECT_EQ(ex.triples[0].object.value, "Dune");
  EXPECT_EQ(ex.triples[2].predicate, "year");
  EXPECT_EQ(ex.triples[2].object.vtype, mr::ValueType::number);
  EXPECT_EQ(ex.triples[3].subject, "neuromancer");
  EXPECT_EQ(ex.triples[3].provenance.front().ref, "row:1");
  EXPECT_EQ(ex.triples[3].provenance.front().source_id, "catalog");
}

TEST(RuleBasedExtraction, TreeRecordsUseFirstLeafAsSubject) {
  mr::RawDocument doc;
  doc.source_id = "feed";
  doc.domain = "flights";
  doc.name = "f.json";
  doc.content = R"({"flight": "CA981", "status": "Delayed"})";
  doc.format = mr::DocFormat::semi_structured;
  auto rec = mr::normalize_document(doc);
  rec.id = "r1";

  auto ex = mr::extract_rule_based(rec);
  ASSERT_EQ(ex.entities.size(), 1u);
  EXPECT_EQ(ex.entities[0].id, "ca981");
  ASSERT_EQ(ex.triples.size(), 2u);
  EXPECT_EQ(ex.triples[1].subject, "ca981");
  EXPECT_EQ(ex.triples[1].predicate, "root.status");
  EXPECT_EQ(ex.triples[1].object.value, "Delayed");
  EXPECT_EQ(ex.triples[1].provenance.front().ref, "tree:0");
}

TEST(RuleBasedExtraction, SkipsBlankLeavesAndRejectsTextRecords) {
  mr::RawDocument doc;
  doc.source_id = "feed";
  doc.domain = "flights";
  doc.name = "g.json";
  doc.content = R"({"flight": "CA100", "delay_reason": ""})";
  doc.format = mr::DocFormat::semi_structured;
  auto rec = mr::normalize_document(doc);
  rec.id = "r2";
  auto ex = mr::extract_rule_based(rec);
  ASSERT_EQ(ex.triples.size(), 1u);  // the blank leaf is dropped
  EXPECT_EQ(ex.triples[0].predicate, "root.flight");

  EXPECT_THROW(mr::extract_rule_based(text_record("hello world")), mr::Error);
}

TEST(EntityExtraction, ParsesMockNerReplies) {
  auto rec = text_record("Dune was written by Frank Herbert.");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner,
                     R"(["Dune", "Frank Herbert", "Dune"])");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  ASSERT_EQ(entities.size(), 2u);  // duplicate folds into one entity
  EXPECT_EQ(entities[0].id, "dune");
  EXPECT_EQ(entities[1].id, "frank herbert");
  EXPECT_EQ(client.stats().calls(mr::RequestKind::ner), 1u);
}

TEST(EntityExtraction, RejectsNonArrayReplies) {
  auto rec = text_record("whatever");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner, "not json");
  auto prompts = mr::builtin_prompts();
  EXPECT_THROW(mr::extract_entities(rec, client, prompts.ner), mr::Error);
}

TEST(TripleExtraction, ParsesLinesGroundsEntitiesAndScores) {
  auto rec = text_record("Dune was written by Frank Herbert in 1965.");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner, R"(["Dune", "Frank Herbert"])");
  client.add_default(mr::RequestKind::triple,
                     "(Dune, author, Frank Herbert)\n"
                     "(Dune, year, 1965) @0.87\n"
                     "(Atlantis, location, nowhere)\n");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  auto result = mr::extract_triples(rec, entities, client, prompts.triple);

  ASSERT_EQ(result.triples.size(), 2u);
  EXPECT_EQ(result.dropped, 1u);  // unknown subject "Atlantis"

  const auto& author = result.triples[0];
  EXPECT_EQ(author.subject, "dune");
  EXPECT_EQ(author.predicate, "author");
  EXPECT_TRUE(author.object.is_entity());
  EXPECT_EQ(author.object.value, "frank herbert");
  EXPECT_FALSE(author.extraction_score.has_value());

  const auto& year = result.triples[1];
  EXPECT_FALSE(year.object.is_entity());
  EXPECT_EQ(year.object.value, "1965");
  ASSERT_TRUE(year.extraction_score.has_value());
  EXPECT_DOUBLE_EQ(*year.extraction_score, 0.87);
}

TEST(TripleExtraction, ObjectCommasFoldIntoTheLiteral) {
  auto rec = text_record("anything");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner, R"(["Dune"])");
  client.add_default(mr::RequestKind::triple,
                     "(Dune, blurb, sand, spice, and politics)");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  auto result = mr::extract_triples(rec, entities, client, prompts.triple);
  ASSERT_EQ(result.triples.size(), 1u);
  EXPECT_EQ(result.triples[0].object.value, "sand, spice, and politics");
}

TEST(TripleExtraction, MalformedLinesRaise) {
  auto rec = text_record("anything");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner, R"(["Dune"])");
  client.add_default(mr::RequestKind::triple, "Dune wrote itself");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  EXPECT_THROW(mr::extract_triples(rec, entities, client, prompts.triple),
               mr::Error);
}

TEST(Standardization, MergesSurfaceVariants) {
  auto rec = text_record("E. Morgan wrote The Night Circus.");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner,
                     R"(["E. Morgan", "Erin Morgenstern"])");
  client.add_default(mr::RequestKind::std_names,
                     R"({"E. Morgan": "Erin Morgenstern"})");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  ASSERT_EQ(entities.size(), 2u);

  auto merged = mr::standardize_entities(entities, client, prompts.standardize);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].id, "erin morgenstern");
  ASSERT_EQ(merged[0].aliases.size(), 1u);
  EXPECT_EQ(merged[0].aliases[0], "E. Morgan");

  // The pass is idempotent: a second application changes nothing.
  auto again = mr::standardize_entities(merged, client, prompts.standardize);
  EXPECT_EQ(again, merged);
}

TEST(Standardization, EmptyReplyObjectKeepsEntitiesApart) {
  auto rec = text_record("Dune and Neuromancer.");
  mr::MockClient client;
  client.add_default(mr::RequestKind::ner, R"(["Dune", "Neuromancer"])");
  client.add_default(mr::RequestKind::std_names, "{}");
  auto prompts = mr::builtin_prompts();
  auto entities = mr::extract_entities(rec, client, prompts.ner);
  auto merged = mr::standardize_entities(entities, client, prompts.standardize);
  EXPECT_EQ(merged.size(), 2u);
}

TEST(ApplyAliasMap, RewritesIdsAndKeepsOldLabelAsAlias) {
  mr::Entity ent;
  ent.id = "e. morgan";
  ent.label = "E. Morgan";
  mr::AliasMap map;
  map.add("E. Morgan", "Erin Morgenstern");
  auto out = mr::apply_alias_map({ent}, map);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, "erin morgenstern");
  EXPECT_EQ(out[0].label, "Erin Morgenstern");
  ASSERT_FALSE(out[0].aliases.empty());
  EXPECT_EQ(out[0].aliases[0], "E. Morgan");
}

TEST(PromptRendering, ExamplesAndInputSlot) {
  mr::ExtractionPrompt prompt;
  prompt.kind = mr::PromptKind::ner;
  prompt.instruction = "List entities.\nInput: {{input}}\nOutput:";
  prompt.examples = {{"CA981 departed.", "[\"CA981\"]"}};
  const std::string rendered = prompt.render("Dune is great.");
  EXPECT_NE(rendered.find("List entities."), std::string::npos);
  EXPECT_NE(rendered.find("CA981 departed."), std::string::npos);
  EXPECT_NE(rendered.find("Dune is great."), std::string::npos);
  EXPECT_EQ(rendered.find("{{input}}"), std::string::npos);
}

TEST(PromptParsing, SplitsInstructionExamplesAndOutputs) {
  const std::string text =
      "Extract names.\n"
      "Input: {{input}}\n"
      "Output:\n"
      "@example\n"
      "CA981 left PEK.\n"
      "@output\n"
      "[\"CA981\", \"PEK\"]\n";
  auto prompt = mr::parse_prompt(mr::PromptKind::ner, text);
  EXPECT_NE(prompt.instruction.find("Extract names."), std::string::npos);
  ASSERT_EQ(prompt.examples.size(), 1u);
  EXPECT_EQ(prompt.examples[0].first, "CA981 left PEK.");
  EXPECT_EQ(prompt.examples[0].second, "[\"CA981\", \"PEK\"]");
}
