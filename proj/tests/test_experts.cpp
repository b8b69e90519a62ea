#include <doctest.h>

#include <string>
#include <vector>

#include "tcsi/evaluation.hpp"
#include "tcsi/experts.hpp"
#include "tcsi/oracle_backend.hpp"
#include "tcsi/segmenter.hpp"
#include "test_support.hpp"

using namespace tcsi;

namespace {

ExpertError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const ExpertError& e) {
    return e.kind();
  }
  FAIL("expected ExpertError");
  return ExpertError::Kind::BackendUnavailable;
}

// Encoder that fails on the word "boom"; exercises the base-class contract.
class FlakyBackend final : public ExpertBackend {
 public:
  Capabilities capabilities() const override {
    Capabilities c;
    c.importance = true;
    c.rewrite = RewriteForm::Text;
    return c;
  }
  std::string tag() const override { return "flaky"; }

 protected:
  FeatureVector do_encode(std::string_view s) override {
    if (s == "boom") throw ExpertError(ExpertError::Kind::EncodingFailure, "boom");
    return FeatureVector::dense({static_cast<float>(s.size())}, tag());
  }
  std::vector<double> do_scores(Task, const FeatureVector& fv) const override {
    return {fv.at(0) > 3 ? 0.9 : 0.1};
  }
  RewriteResult do_rewrite(const FeatureVector&, std::string_view s) override {
    return {"short: " + std::string(s), false};
  }
};

Sentence gold_sentence(const std::string& id, const std::string& text, AnnotationSet a) {
  Sentence s;
  s.id = id;
  s.doc_id = "d";
  s.text = text;
  s.annotations = std::move(a);
  return s;
}

Corpus small_corpus() {
  Corpus c;
  Document d;
  d.doc_id = "d";
  AnnotationSet a0;
  a0.important = true;
  a0.topics = {DataPracticeCategory::Usage};
  a0.rewritten = "We use your data.";
  d.sentences.push_back(gold_sentence("s0", "We may use the data you provide to us.", a0));
  AnnotationSet a1;
  a1.important = true;
  a1.risk = true;
  a1.topics = {DataPracticeCategory::Usage, DataPracticeCategory::ThirdPartySharing};
  d.sentences.push_back(gold_sentence("s1", "We share and use data with partners.", a1));
  AnnotationSet a2;
  a2.topics = {DataPracticeCategory::ContactInformation};
  d.sentences.push_back(gold_sentence("s2", "Write to us at any time.", a2));
  AnnotationSet a3;
  a3.important = true;
  a3.sensitive = true;
  a3.topics = {DataPracticeCategory::CeaseOperation};
  d.sentences.push_back(gold_sentence("s3", "If we close, your health records are deleted.", a3));
  for (std::size_t i = 0; i < d.sentences.size(); ++i) d.sentences[i].index = i;
  c.documents.push_back(d);
  return c;
}

}  // namespace

TEST_CASE("feature vectors") {
  const auto d = FeatureVector::dense({1.0f, 0.0f, 2.0f}, "t");
  CHECK(d.dim() == 3);
  CHECK(d.at(2) == 2.0f);
  const auto s = FeatureVector::sparse(5, {{1, 0.5f}, {4, 1.0f}}, "t");
  CHECK(s.is_sparse());
  CHECK(s.at(0) == 0.0f);
  CHECK(s.at(4) == 1.0f);
  CHECK(s.to_dense() == std::vector<float>{0.0f, 0.5f, 0.0f, 0.0f, 1.0f});
  CHECK(error_kind([] { FeatureVector::sparse(3, {{2, 1.0f}, {1, 1.0f}}, "t"); }) ==
        ExpertError::Kind::EncodingFailure);
  CHECK(error_kind([] { FeatureVector::sparse(3, {{3, 1.0f}}, "t"); }) == ExpertError::Kind::EncodingFailure);
  CHECK(error_kind([] { FeatureVector::dense({}, "t"); }) == ExpertError::Kind::EncodingFailure);
}

TEST_CASE("make_label: binary thresholds") {
  Thresholds th;
  CHECK(make_label(Task::Risk, {0.5}, th).positive);  // default threshold 0.5, inclusive
  CHECK_FALSE(make_label(Task::Risk, {0.49}, th).positive);
  th.risk = 0.8;
  const auto l = make_label(Task::Risk, {0.7}, th);
  CHECK_FALSE(l.positive);
  CHECK(l.confidence() == doctest::Approx(0.3));
  CHECK(error_kind([] { make_label(Task::Importance, {1.5}, {}); }) == ExpertError::Kind::ProtocolViolation);
  CHECK(error_kind([] { make_label(Task::Importance, {0.1, 0.9}, {}); }) == ExpertError::Kind::ProtocolViolation);
}

TEST_CASE("make_label: topic argmax and tie order") {
  std::vector<double> s(kClassifiableCount, 0.0);
  s[1] = 0.5;  // ThirdPartySharing
  s[2] = 0.5;  // Usage
  const auto l = make_label(Task::Topic, s, {});
  CHECK(l.topic == DataPracticeCategory::ThirdPartySharing);
  CHECK(l.topics == std::vector<DataPracticeCategory>{DataPracticeCategory::ThirdPartySharing});

  Thresholds multi;
  multi.multi_label_topics = true;
  multi.topic = 0.4;
  CHECK(make_label(Task::Topic, s, multi).topics.size() == 2);

  // float32 rounding is tolerated and renormalized.
  std::vector<double> near(kClassifiableCount, 0.0);
  near[0] = 0.99995;
  CHECK(make_label(Task::Topic, near, {}).topic_scores[0] == doctest::Approx(1.0));
  std::vector<double> off(kClassifiableCount, 0.0);
  off[0] = 0.9;
  CHECK(error_kind([&] { make_label(Task::Topic, off, {}); }) == ExpertError::Kind::ProtocolViolation);
}

TEST_CASE("encode counts every call, including failures") {
  FlakyBackend b;
  const auto a = b.encode("hello");
  const auto again = b.encode("hello");
  CHECK(a == again);
  CHECK(b.encode_count() == 2);
  CHECK(error_kind([&] { b.encode("boom"); }) == ExpertError::Kind::EncodingFailure);
  CHECK(b.encode_count() == 3);
  CHECK(error_kind([&] { b.encode("  "); }) == ExpertError::Kind::PreconditionFailed);
  CHECK(b.encode_count() == 4);
}

TEST_CASE("classify never encodes; text rewrite is charged one encode") {
  FlakyBackend b;
  const auto fv = b.encode("hello");
  CHECK(b.classify(Task::Importance, fv).positive);
  CHECK(b.encode_count() == 1);
  CHECK(error_kind([&] { b.classify(Task::Risk, fv); }) == ExpertError::Kind::UnsupportedTask);
  CHECK(error_kind([&] { b.classify(Task::Importance, FeatureVector::dense({9.0f}, "other")); }) ==
        ExpertError::Kind::DimensionMismatch);
  CHECK(b.rewrite(FeatureVector{}, "hello").text == "short: hello");
  CHECK(b.encode_count() == 2);
  CHECK(error_kind([&] { b.rewrite(fv, ""); }) == ExpertError::Kind::PreconditionFailed);
}

TEST_CASE("oracle answers from gold") {
  const Corpus c = small_corpus();
  OracleBackend o(c);
  const auto fv0 = o.encode("We may use the data you provide to us.");
  CHECK(o.classify(Task::Importance, fv0).probability == 1.0);
  CHECK(o.classify(Task::Topic, fv0).topic == DataPracticeCategory::Usage);
  CHECK(o.rewrite(fv0, "").text == "We use your data.");
  CHECK(o.encode_count() == 1);

  const auto fv1 = o.encode("We share and use data with partners.");
  CHECK(o.classify(Task::Risk, fv1).probability == 1.0);
  const auto topic = o.classify(Task::Topic, fv1);
  CHECK(topic.topic == DataPracticeCategory::ThirdPartySharing);
  CHECK(topic.topic_scores[1] == doctest::Approx(0.5));
  CHECK(topic.topic_scores[2] == doctest::Approx(0.5));
  // Important but no gold rewrite: the original text comes back.
  CHECK(o.rewrite(fv1, "").text == "We share and use data with partners.");

  // Only an unclassifiable gold topic: uniform scores, first class wins.
  const auto fv3 = o.encode("If we close, your health records are deleted.");
  CHECK(o.classify(Task::Topic, fv3).topic == DataPracticeCategory::FirstPartyCollection);
  CHECK(o.classify(Task::Sensitivity, fv3).positive);

  CHECK(error_kind([&] { o.encode("Never seen before."); }) == ExpertError::Kind::UnknownSentence);
  CHECK(error_kind([&] { o.classify(Task::Risk, FeatureVector::dense({99.0f}, "oracle-v1")); }) ==
        ExpertError::Kind::UnknownSentence);
  // Whitespace differences still hit.
  CHECK_NOTHROW(o.encode("  We share and   use data with partners. "));
}

TEST_CASE("oracle knows the truncated form of long sentences") {
  Corpus c = small_corpus();
  std::string text;
  for (int i = 0; i < 600; ++i) text += "word" + std::to_string(i) + " ";
  c.documents[0].sentences[2].text = text;
  OracleBackend o(c);
  CHECK_NOTHROW(o.encode(tcsi::truncate(text, 512).text));
}

TEST_CASE("oracle evaluation scores 1.0 on every task") {
  const Corpus c = testing::make_synthetic_corpus({});
  OracleBackend o(c);
  const auto report = evaluate_backend(o, eval_items(c));
  CHECK(report.items == c.sentence_count());
  for (auto t : kClassificationTasks) {
    CAPTURE(task_name(t));
    CHECK(report.tasks.at(t).micro_f1 == doctest::Approx(1.0));
    CHECK(report.tasks.at(t).macro_f1 == doctest::Approx(1.0));
  }
  REQUIRE(report.rewrite.has_value());
  CHECK(report.rewrite->rougeL.f1 == doctest::Approx(1.0));
  CHECK(format_evaluation(report).find("Importance") != std::string::npos);
  CHECK(to_json(report).contains("tasks"));
}
