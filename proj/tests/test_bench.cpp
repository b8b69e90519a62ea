#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "tcsi/bench.hpp"
#include "tcsi/oracle_backend.hpp"
#include "test_support.hpp"

using namespace tcsi;
using C = DataPracticeCategory;
using namespace std::chrono_literals;

namespace {

// Decides every head from keywords in the text, carried as dense flags.
// "imp" marks Importance, "use" picks Usage (else DataSecurity).
class KeywordBackend final : public ExpertBackend {
 public:
  explicit KeywordBackend(RewriteForm form = RewriteForm::Text) : form_(form) {}
  Capabilities capabilities() const override {
    Capabilities c;
    c.importance = c.topic = c.risk = c.sensitivity = true;
    c.rewrite = form_;
    c.thread_safe = true;
    return c;
  }
  std::string tag() const override { return "keyword"; }

 protected:
  FeatureVector do_encode(std::string_view s) override {
    auto has = [&](const char* w) { return s.find(w) != std::string_view::npos ? 1.0f : 0.0f; };
    return FeatureVector::dense({has("imp"), has("use"), has("sell")}, tag());
  }
  std::vector<double> do_scores(Task t, const FeatureVector& fv) const override {
    switch (t) {
      case Task::Importance: return {fv.at(0)};
      case Task::Risk: return {fv.at(2)};
      case Task::Sensitivity: return {0.0};
      default: {
        std::vector<double> s(kClassifiableCount, 0.0);
        s[*classifiable_index(fv.at(1) > 0 ? C::Usage : C::DataSecurity)] = 1.0;
        return s;
      }
    }
  }
  RewriteResult do_rewrite(const FeatureVector&, std::string_view s) override { return {"R: " + std::string(s), false}; }

 private:
  RewriteForm form_;
};

Document doc_of(const std::vector<std::string>& texts) {
  Document d;
  d.doc_id = "bench";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Sentence s;
    s.id = "b" + std::to_string(i);
    s.doc_id = d.doc_id;
    s.index = i;
    s.text = texts[i];
    d.sentences.push_back(s);
  }
  return d;
}

std::vector<std::string> repeat(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + " " + std::to_string(i));
  return out;
}

BackendFactory keyword_factory(RewriteForm form = RewriteForm::Text) {
  return [form] { return std::make_unique<KeywordBackend>(form); };
}

EvalItem item(const std::string& id, std::size_t words) {
  EvalItem it;
  it.id = id;
  for (std::size_t w = 0; w < words; ++w) it.text += (w ? " w" : "w");
  return it;
}

}  // namespace

TEST_CASE("all sentences pass every gate: five encodes against one") {
  const auto r = run_efficiency({doc_of(repeat("imp use", 10))}, keyword_factory(), TopicSelection::all());
  CHECK(r.sentences == 10);
  CHECK(r.important == 10);
  CHECK(r.filtered == 10);
  CHECK(r.encode_calls_v1 == 50);
  CHECK(r.encode_calls_v2 == 10);
  CHECK(r.rewrite_encodes_v2 == 10);
  CHECK(r.count_reduction == doctest::Approx(0.8));
}

TEST_CASE("nothing important: gating leaves nothing to save") {
  const auto r = run_efficiency({doc_of(repeat("plain", 10))}, keyword_factory(), TopicSelection::all());
  CHECK(r.important == 0);
  CHECK(r.encode_calls_v1 == 10);
  CHECK(r.encode_calls_v2 == 10);
  CHECK(r.count_reduction == doctest::Approx(0.0));
}

TEST_CASE("lazy baseline matches its call-count formula") {
  std::vector<std::string> texts = repeat("plain", 7);
  for (auto& t : repeat("imp use", 5)) texts.push_back(t);       // important, selected
  for (auto& t : repeat("imp security", 4)) texts.push_back(t);  // important, filtered out
  const auto sel = TopicSelection::of({C::Usage});
  const Document d = doc_of(texts);

  const auto r = run_efficiency({d}, keyword_factory(), sel);
  CHECK(r.important == 9);
  CHECK(r.filtered == 5);
  CHECK(r.predicted_v1 == 16 + 9 + 3 * 5);
  CHECK(r.encode_calls_v1 == r.predicted_v1);
  CHECK(r.encode_calls_v2 == 16);
  CHECK(r.rewrite_encodes_v2 == 5);

  // Without a rewrite head each selected sentence costs one encode less.
  const auto nr = run_efficiency({d}, keyword_factory(RewriteForm::None), sel);
  CHECK(nr.predicted_v1 == 16 + 9 + 2 * 5);
  CHECK(nr.encode_calls_v1 == nr.predicted_v1);
  CHECK(nr.rewrite_encodes_v2 == 0);

  BenchOptions ex;
  ex.exhaustive = true;
  const auto e = run_efficiency({d}, keyword_factory(), sel, ex);
  CHECK(e.exhaustive);
  CHECK(e.encode_calls_v1 == 16 * 5);
  CHECK(e.predicted_v1 == e.encode_calls_v1);
}

TEST_CASE("features-form rewrite is free for the pipeline") {
  testing::SyntheticSpec spec;
  spec.all_pass = true;
  spec.documents = 2;
  spec.sentences_per_document = 10;
  const Corpus c = testing::make_synthetic_corpus(spec);
  const auto r = run_efficiency(c.documents, [&] { return attach_oracle(c); }, TopicSelection::all());
  CHECK(r.encode_calls_v1 == 100);
  CHECK(r.encode_calls_v2 == 20);
  CHECK(r.rewrite_encodes_v2 == 0);
}

TEST_CASE("simulated encode delay shows up in the timings") {
  BenchOptions opts;
  opts.encode_delay = 2ms;
  const auto r = run_efficiency({doc_of(repeat("imp use", 20))}, keyword_factory(RewriteForm::None),
                                TopicSelection::all(), opts);
  CHECK(r.encode_calls_v1 == 80);
  CHECK(r.v1.encode_seconds >= 80 * 0.002);
  CHECK(r.v2.encode_seconds >= 20 * 0.002);
  CHECK(r.v2.encode_seconds < r.v1.encode_seconds);
  CHECK(r.encode_time_reduction > 0.5);
  CHECK(r.v1.per_sentence_seconds == doctest::Approx(r.v1.total_seconds / 20));

  const auto table = format_efficiency_table(r);
  for (const char* row : {"Encoding Time", "Task Inference Time", "Total Time", "Avg. Time per Sentence", "Encode Calls"}) {
    CHECK(table.find(row) != std::string::npos);
  }
  CHECK(to_json(r)["encode_calls_v1"] == 80);
}

TEST_CASE("decorators forward and account") {
  auto timed = std::make_unique<TimedBackend>(std::make_unique<DelayedBackend>(std::make_unique<KeywordBackend>(), 1ms));
  const auto fv = timed->encode("imp use");
  CHECK(timed->classify(Task::Importance, fv).positive);
  CHECK(timed->rewrite(fv, "imp use").text == "R: imp use");
  CHECK(timed->rewrite_calls() == 1);
  CHECK(timed->encode_seconds() >= 0.001);
  CHECK(timed->tag() == "keyword");
}

TEST_CASE("length slices") {
  const std::vector<EvalItem> items = {item("one", 1), item("two", 2), item("three", 3), item("four", 4)};
  CHECK(longest_k(items, 2) == std::vector<std::string>{"four", "three"});
  CHECK(shortest_k(items, 2) == std::vector<std::string>{"one", "two"});
  // Equal lengths fall back to id order.
  const std::vector<EvalItem> tied = {item("b", 2), item("a", 2), item("c", 1)};
  CHECK(longest_k(tied, 2) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("slice reports with the oracle") {
  const Corpus c = testing::make_synthetic_corpus({});
  const auto items = eval_items(c);
  OracleBackend o(c);
  const auto full = slice_by_length(items, items.size(), o);
  CHECK(to_json(full.longest.tasks.at(Task::Importance)) == to_json(full.all.tasks.at(Task::Importance)));

  const auto r = slice_by_length(items, 10, o);
  CHECK(r.longest_ids.size() == 10);
  for (const auto* rep : {&r.longest, &r.shortest, &r.all}) {
    for (const auto& [t, cr] : rep->tasks) {
      CAPTURE(task_name(t));
      CHECK(cr.micro_f1 == doctest::Approx(1.0));
      CHECK(cr.macro_f1 == doctest::Approx(1.0));
    }
  }
  CHECK(to_json(r).contains("longest"));

  CHECK_THROWS_AS(slice_by_length({}, 1, o), BenchError);
  CHECK_THROWS_AS(slice_by_length(items, items.size() + 1, o), BenchError);
}
