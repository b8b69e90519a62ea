#include <doctest.h>

#include <set>
#include <string>

#include "tcsi/corpus.hpp"
#include "test_support.hpp"

using namespace tcsi;
using nlohmann::json;

namespace {

json one_sentence(json sentence) {
  return json{{"version", "1.0"},
              {"documents", json::array({json{{"doc_id", "d1"}, {"title", "T"}, {"sentences", json::array({sentence})}}})}};
}

json plain_sentence(const std::string& id, std::size_t index, const std::string& text) {
  return json{{"id", id}, {"index", index}, {"text", text}, {"topics", json::array()},
              {"important", false}, {"risk", false}, {"sensitive", false}};
}

CorpusError::Kind parse_error_kind(const std::string& raw, const ParseOptions& opts = {}) {
  try {
    parse_corpus(raw, opts);
  } catch (const CorpusError& e) {
    return e.kind();
  }
  FAIL("expected CorpusError");
  return CorpusError::Kind::EmptyCorpus;
}

Corpus corpus_of_lengths(const std::vector<std::size_t>& words, bool risk) {
  Corpus c;
  Document d;
  d.doc_id = "d";
  for (std::size_t i = 0; i < words.size(); ++i) {
    Sentence s;
    s.id = "s" + std::to_string(i);
    s.doc_id = "d";
    s.index = i;
    for (std::size_t w = 0; w < words[i]; ++w) s.text += (w ? " w" : "w");
    s.annotations.important = risk;
    s.annotations.risk = risk;
    d.sentences.push_back(s);
  }
  c.documents.push_back(d);
  return c;
}

}  // namespace

TEST_CASE("parse: minimal corpus") {
  const Corpus c = parse_corpus(one_sentence(plain_sentence("s1", 0, "We collect data.")).dump());
  REQUIRE(c.sentence_count() == 1);
  const auto& s = c.documents[0].sentences[0];
  CHECK(s.annotations.topics.empty());
  CHECK(s.doc_id == "d1");
  CHECK_FALSE(s.annotations.rewritten.has_value());
}

TEST_CASE("parse: topics in display form and a rewrite") {
  json s = plain_sentence("s1", 0, "We encrypt and use data.");
  s["topics"] = {"Data Security", "Usage"};
  s["important"] = true;
  s["rewritten"] = "Data is encrypted and used.";
  const Corpus c = parse_corpus(one_sentence(s).dump());
  const auto& a = c.documents[0].sentences[0].annotations;
  CHECK(a.topics.size() == 2);
  CHECK(a.has_topic(DataPracticeCategory::DataSecurity));
  CHECK(a.primary_topic() == DataPracticeCategory::Usage);  // enumeration order
  CHECK(a.rewritten == "Data is encrypted and used.");
}

TEST_CASE("parse: integer sentence ids become decimal strings") {
  json s = plain_sentence("x", 0, "Text.");
  s["id"] = 42;
  CHECK(parse_corpus(one_sentence(s).dump()).documents[0].sentences[0].id == "42");
}

TEST_CASE("parse: invariant and structural errors") {
  json risky = plain_sentence("s1", 0, "We sell data.");
  risky["risk"] = true;
  CHECK(parse_error_kind(one_sentence(risky).dump()) == CorpusError::Kind::SchemaViolation);
  // Lenient mode keeps the sentence.
  ParseOptions lenient;
  lenient.lenient = true;
  CHECK(parse_corpus(one_sentence(risky).dump(), lenient).sentence_count() == 1);

  CHECK(parse_error_kind("{not json") == CorpusError::Kind::MalformedJson);
  CHECK(parse_error_kind(R"({"documents": 3})") == CorpusError::Kind::SchemaViolation);

  json bad_topic = plain_sentence("s1", 0, "x");
  bad_topic["topics"] = {"Marketing"};
  CHECK(parse_error_kind(one_sentence(bad_topic).dump()) == CorpusError::Kind::SchemaViolation);

  json dup = one_sentence(plain_sentence("s1", 0, "a"));
  dup["documents"][0]["sentences"].push_back(plain_sentence("s1", 1, "b"));
  CHECK(parse_error_kind(dup.dump()) == CorpusError::Kind::DuplicateId);
}

TEST_CASE("parse: unknown fields survive a round trip") {
  json s = plain_sentence("s1", 0, "We collect data.");
  s["annotator"] = "A3";
  json root = one_sentence(s);
  root["source"] = "crawl";
  const Corpus c = parse_corpus(root.dump());
  CHECK(c.documents[0].sentences[0].extras["annotator"] == "A3");
  const Corpus again = parse_corpus(serialize_corpus(c));
  CHECK(corpus_to_json(again) == corpus_to_json(c));
  CHECK(again.extras["source"] == "crawl");
}

TEST_CASE("validate: clean corpus has an empty report") {
  const Corpus c = testing::make_synthetic_corpus({});
  CHECK(validate(c).violations.empty());
  CHECK(validate(c).ok());
}

TEST_CASE("validate: sensitive without important names the sentence") {
  Corpus c = testing::make_synthetic_corpus({});
  auto& s = c.documents[1].sentences[3];
  s.annotations = {};
  s.annotations.sensitive = true;
  const auto r = validate(c);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].sentence_id == s.id);
  CHECK(r.violations[0].rule == "sensitive-without-important");
  CHECK_FALSE(r.ok());
}

TEST_CASE("validate: gapped indices") {
  json root = one_sentence(plain_sentence("s1", 0, "a"));
  root["documents"][0]["sentences"].push_back(plain_sentence("s2", 2, "b"));
  ParseOptions structural;
  structural.skip_validation = true;
  const auto r = validate(parse_corpus(root.dump(), structural));
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "index-gap");
}

TEST_CASE("split: sizes follow the ratios and are deterministic") {
  testing::SyntheticSpec spec;
  spec.documents = 1;
  spec.sentences_per_document = 100;
  const Corpus c = testing::make_synthetic_corpus(spec);
  const auto a = split(c, Task::Importance, {0.8, 0.1, 0.1}, 7);
  CHECK(a.size(SplitPart::Train) == 80);
  CHECK(a.size(SplitPart::Validation) == 10);
  CHECK(a.size(SplitPart::Test) == 10);
  const auto b = split(c, Task::Importance, {0.8, 0.1, 0.1}, 7);
  CHECK(a.parts == b.parts);
  const auto other = split(c, Task::Importance, {0.8, 0.1, 0.1}, 8);
  CHECK(other.parts != a.parts);
}

TEST_CASE("split: largest remainder with ties to the earlier part") {
  // 10 * (0.5, 0.25, 0.25) = (5, 2.5, 2.5). One unit left over; the tie goes to validation.
  const auto n = apportion(10, {0.5, 0.25, 0.25});
  CHECK(n[0] == 5);
  CHECK(n[1] == 3);
  CHECK(n[2] == 2);
  // 7 * (1/3 each): remainders tie, the earlier parts win.
  const auto m = apportion(7, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(m[0] == 3);
  CHECK(m[1] == 2);
  CHECK(m[2] == 2);
}

TEST_CASE("split: populations and errors") {
  const Corpus c = testing::make_synthetic_corpus({});
  const auto plan = split_all(c, {0.8, 0.1, 0.1}, 3);
  std::size_t important = 0, rewritten = 0;
  for (const auto* s : c.sentences()) {
    important += s->annotations.important;
    rewritten += s->annotations.rewritten.has_value();
  }
  CHECK(plan.at(Task::Importance).parts.size() == c.sentence_count());
  CHECK(plan.at(Task::Risk).parts.size() == important);
  CHECK(plan.at(Task::Rewrite).parts.size() == rewritten);
  CHECK(split_plan_from_json(to_json(plan)).at(Task::Topic).parts == plan.at(Task::Topic).parts);

  CHECK_THROWS_AS(split(c, Task::Importance, {0.8, 0.1, 0.2}, 1), CorpusError);
  CHECK_THROWS_AS(split(Corpus{}, Task::Importance, {0.8, 0.1, 0.1}, 1), CorpusError);
}

TEST_CASE("split: document unit keeps documents whole") {
  const Corpus c = testing::make_synthetic_corpus({});
  const auto a = split(c, Task::Importance, {0.5, 0.25, 0.25}, 11, SplitUnit::Document);
  for (const auto& d : c.documents) {
    std::set<SplitPart> parts;
    for (const auto& s : d.sentences) parts.insert(a.parts.at(s.id));
    CHECK(parts.size() == 1);
  }
}

TEST_CASE("stats: two sentences, one important") {
  Corpus c = corpus_of_lengths({4, 7}, false);
  c.documents[0].sentences[0].annotations.important = true;
  const auto st = compute_stats(c);
  const auto* imp = st.find("Important");
  REQUIRE(imp != nullptr);
  CHECK(imp->count == 1);
  CHECK(imp->pct == doctest::Approx(50.0));
  CHECK(imp->median_length == doctest::Approx(4.0));
  CHECK(imp->mean_length == doctest::Approx(4.0));
}

TEST_CASE("stats: lengths 3, 5 and 10 all marked Risk") {
  const auto st = compute_stats(corpus_of_lengths({3, 5, 10}, true));
  const auto* risk = st.find("Risk");
  REQUIRE(risk != nullptr);
  CHECK(risk->count == 3);
  CHECK(risk->median_length == doctest::Approx(5.0));
  CHECK(risk->mean_length == doctest::Approx(6.0));
  CHECK(st.labels.size() == 14);
  CHECK(median({4, 1, 3, 2}) == doctest::Approx(2.5));
  CHECK(format_stats_table(st).find("Risk") != std::string::npos);
}
