#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tcsi/evaluation.hpp"
#include "tcsi/lexical.hpp"
#include "tcsi/text.hpp"
#include "test_support.hpp"

using namespace tcsi;

namespace {

// Written out again here, from the published definitions of FNV-1a and
// SplitMix64, so the featurizer is checked against something it does not share.
std::uint64_t ref_fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t ref_splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::set<std::uint32_t> ref_indices(const std::vector<std::string>& grams, std::uint32_t dim) {
  std::set<std::uint32_t> out;
  for (const auto& g : grams) out.insert(static_cast<std::uint32_t>(ref_splitmix(ref_fnv1a(g) ^ 0x5443534950505632ULL) & (dim - 1)));
  return out;
}

std::set<std::uint32_t> nonzero(const FeatureVector& fv) {
  std::set<std::uint32_t> out;
  for (const auto& [i, v] : fv.sparse_entries()) {
    if (v != 0.0f) out.insert(i);
  }
  return out;
}

SplitPlan train_on_everything(const Corpus& c) { return split_all(c, {1.0, 0.0, 0.0}, 1); }

Sentence toy(std::size_t i, const std::string& text, bool important, bool risk, bool sensitive,
             DataPracticeCategory topic) {
  Sentence s;
  s.id = "t" + std::to_string(i);
  s.doc_id = "toy";
  s.index = i;
  s.text = text;
  s.annotations.important = important;
  s.annotations.risk = risk;
  s.annotations.sensitive = sensitive;
  s.annotations.topics = {topic};
  return s;
}

// Eight sentences; "biometric" marks Sensitivity, "sell" marks Risk.
Corpus eight_sentence_toy() {
  using C = DataPracticeCategory;
  Corpus c;
  Document d;
  d.doc_id = "toy";
  d.sentences = {
      toy(0, "We collect biometric scans notably.", true, false, true, C::FirstPartyCollection),
      toy(1, "We collect your name notably.", true, false, false, C::FirstPartyCollection),
      toy(2, "We sell biometric templates notably.", true, true, true, C::ThirdPartySharing),
      toy(3, "We sell purchase history notably.", true, true, false, C::ThirdPartySharing),
      toy(4, "We keep biometric records notably.", true, false, true, C::DataRetention),
      toy(5, "We keep order records notably.", true, false, false, C::DataRetention),
      toy(6, "Welcome to our website.", false, false, false, C::Usage),
      toy(7, "Thanks for reading this page.", false, false, false, C::Usage),
  };
  c.documents.push_back(d);
  return c;
}

double accuracy(ExpertBackend& b, const Corpus& c, Task t) {
  return evaluate_backend(b, eval_items(c)).tasks.at(t).micro_f1;
}

}  // namespace

TEST_CASE("featurizer: n-grams") {
  HashedFeaturizer f;
  CHECK(f.ngrams("a b c") == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
  const auto g = f.ngrams("Data data");
  CHECK(std::set<std::string>(g.begin(), g.end()) == std::set<std::string>{"data", "data data"});
  CHECK(f.ngrams("").empty());
}

TEST_CASE("featurizer: indices equal independently recomputed hashes") {
  HashedFeaturizer f;
  const std::uint32_t dim = f.config().dim;
  CHECK(dim == (1u << 18));
  CHECK(nonzero(f.featurize("a b c", "t")) == ref_indices({"a", "b", "c", "a b", "b c"}, dim));
  CHECK(nonzero(f.featurize("we collect data", "t")) ==
        ref_indices({"we", "collect", "data", "we collect", "collect data"}, dim));
  CHECK(ngram_hash("we collect") == ref_splitmix(ref_fnv1a("we collect") ^ 0x5443534950505632ULL));
}

TEST_CASE("featurizer: weights, normalization and case folding") {
  HashedFeaturizer f;
  const auto fv = f.featurize("Data data", "t");
  const auto idx_uni = f.index_of("data");
  const auto idx_bi = f.index_of("data data");
  REQUIRE(fv.sparse_entries().size() == 2);
  CHECK(fv.at(idx_uni) == doctest::Approx(2.0 / std::sqrt(5.0)));
  CHECK(fv.at(idx_bi) == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(f.featurize("We COLLECT Data.", "t") == f.featurize("we collect data", "t"));

  const auto v = f.featurize("We collect your email and share it with partners.", "t");
  double norm = 0.0;
  for (const auto& [i, x] : v.sparse_entries()) norm += double(x) * x;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("featurizer: indices stay below dim") {
  FeaturizerConfig cfg;
  cfg.dim = 1024;
  HashedFeaturizer f(cfg);
  std::mt19937_64 rng(5);
  const std::string alphabet = "abcdefghij KLM 0123456789.,";
  for (int n = 0; n < 100000; ++n) {
    std::string s;
    for (std::size_t k = 0, len = 1 + rng() % 24; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    const auto v = f.featurize(s, "t");
    for (const auto& [i, x] : v.sparse_entries()) REQUIRE(i < cfg.dim);
  }
}

TEST_CASE("rule rewrite: table examples") {
  CHECK(rule_rewrite("We collect your email.").text == "We collect your email.");
  CHECK(rule_rewrite("We may (at any time) share data.").text == "We may share data.");
  CHECK(rule_rewrite("We retain data to the extent permitted by law; you may request deletion.").text ==
        "We retain data. You may request deletion.");
  CHECK(rule_rewrite("We may, at our sole discretion (including via partners), share data; we will notify you.").text ==
        "We may share data. We will notify you.");
  CHECK(rule_rewrite("From time to time we update this policy.").text == "We update this policy.");
  // Only the first semicolon splits.
  CHECK(rule_rewrite("A b; c d; e f.").text == "A b. C d; e f.");
  // Nothing left: fall back to the input.
  CHECK(rule_rewrite("(hidden)").text == "(hidden)");
}

TEST_CASE("rule rewrite never adds words") {
  const Corpus c = testing::make_synthetic_corpus({});
  std::vector<std::string> inputs = {"We (and our partners) may, from time to time, share data; including but not "
                                     "limited to logs.",
                                     "Uh (a) (b) (c) ok; fine"};
  for (const auto* s : c.sentences()) inputs.push_back(s->text);
  for (const auto& in : inputs) {
    const auto out = rule_rewrite(in).text;
    CAPTURE(in);
    CHECK_FALSE(out.empty());
    CHECK(text::word_count(out) <= text::word_count(in));
  }
}

TEST_CASE("train: two separable sentences") {
  Corpus c;
  Document d;
  d.doc_id = "two";
  d.sentences = {toy(0, "We sell biometric data.", true, true, true, DataPracticeCategory::ThirdPartySharing),
                 toy(1, "We protect your email.", true, false, false, DataPracticeCategory::DataSecurity)};
  c.documents.push_back(d);
  TrainConfig cfg;
  cfg.epochs = 50;
  auto r = train_multitask(c, train_on_everything(c), cfg);
  auto& b = *r.backend;
  const auto a = b.encode("We sell biometric data.");
  const auto z = b.encode("We protect your email.");
  CHECK(b.classify(Task::Risk, a).positive);
  CHECK_FALSE(b.classify(Task::Risk, z).positive);
  CHECK(b.classify(Task::Sensitivity, a).positive);
  CHECK_FALSE(b.classify(Task::Sensitivity, z).positive);
  CHECK(b.classify(Task::Topic, a).topic == DataPracticeCategory::ThirdPartySharing);
  CHECK(b.classify(Task::Topic, z).topic == DataPracticeCategory::DataSecurity);
  CHECK(b.classify(Task::Importance, a).positive);
}

TEST_CASE("train: biometric toy reaches full Sensitivity accuracy") {
  const Corpus c = eight_sentence_toy();
  TrainConfig cfg;
  cfg.epochs = 50;
  auto r = train_multitask(c, train_on_everything(c), cfg);
  for (auto t : kClassificationTasks) {
    CAPTURE(task_name(t));
    CHECK(accuracy(*r.backend, c, t) == doctest::Approx(1.0));
  }
}

TEST_CASE("train: losses fall and the schedule is fair") {
  const Corpus c = testing::make_separable_corpus(200, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  auto r = train_multitask(c, train_on_everything(c), cfg);
  for (auto t : kClassificationTasks) {
    CAPTURE(task_name(t));
    const auto& log = r.log.at(t);
    REQUIRE(log.epoch_loss.size() == 5);
    CHECK(log.epoch_loss.front() < log.initial_loss);
    CHECK(log.epoch_loss.back() < log.epoch_loss.front());
  }
  // 200 Importance examples and 160 for the rest: ceil(200 / 8) = 25 batches for every task.
  std::map<Task, std::size_t> count;
  for (auto t : r.first_epoch_schedule) ++count[t];
  for (auto t : kClassificationTasks) CHECK(count[t] == 25);
  CHECK(r.log.at(Task::Importance).train_examples == 200);
  CHECK(r.log.at(Task::Risk).train_examples == 160);
  // Strict round-robin.
  for (std::size_t i = 0; i < r.first_epoch_schedule.size(); ++i) {
    CHECK(r.first_epoch_schedule[i] == kClassificationTasks[i % 4]);
  }

  cfg.alternation = Alternation::PerEpoch;
  auto seq = train_multitask(c, train_on_everything(c), cfg);
  CHECK(seq.first_epoch_schedule.front() == Task::Importance);
  CHECK(seq.first_epoch_schedule.back() == Task::Sensitivity);
  CHECK(seq.log.at(Task::Risk).epoch_batches.front() == 20);
}

TEST_CASE("train: no Risk positives with inverse-frequency weighting") {
  Corpus c = testing::make_separable_corpus(60, 4);
  for (auto& s : c.documents[0].sentences) s.annotations.risk = false;
  try {
    train_multitask(c, train_on_everything(c), TrainConfig{});
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.kind() == TrainingError::Kind::EmptyTaskData);
    CHECK(e.task() == Task::Risk);
  }
  TrainConfig unweighted;
  unweighted.class_weighting = ClassWeighting::None;
  unweighted.epochs = 1;
  CHECK_NOTHROW(train_multitask(c, train_on_everything(c), unweighted));
}

TEST_CASE("train: bad config and divergence") {
  const Corpus c = testing::make_separable_corpus(40, 1);
  TrainConfig bad;
  bad.featurizer.dim = 1000;
  CHECK_THROWS_AS(train_multitask(c, train_on_everything(c), bad), TrainingError);
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), TrainingError);

  TrainConfig wild;
  wild.learning_rate = 1e308;
  wild.epochs = 3;
  try {
    train_multitask(c, train_on_everything(c), wild);
    FAIL("expected divergence");
  } catch (const TrainingError& e) {
    CHECK(e.kind() == TrainingError::Kind::Divergence);
  }
}

TEST_CASE("model files are byte-identical for a fixed seed and load back") {
  const Corpus c = testing::make_separable_corpus(120, 9);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 42;
  const auto plan = split_all(c, {0.8, 0.1, 0.1}, 42);
  auto a = train_multitask(c, plan, cfg);
  auto b = train_multitask(c, plan, cfg);
  const auto pa = testing::write_temp("model-a.json", "");
  const auto pb = testing::write_temp("model-b.json", "");
  save_lexical_model(*a.backend, pa);
  save_lexical_model(*b.backend, pb);
  const auto bytes = testing::read_text(pa);
  CHECK_FALSE(bytes.empty());
  CHECK(bytes == testing::read_text(pb));
  CHECK_FALSE(a.validation.empty());

  cfg.seed = 43;
  auto other = train_multitask(c, plan, cfg);
  save_lexical_model(*other.backend, pb);
  CHECK(bytes != testing::read_text(pb));

  auto loaded = load_lexical_model(pa);
  CHECK(loaded->tag() == "lexical-v1");
  for (const auto* s : c.sentences()) {
    const auto x = a.backend->encode(s->text);
    const auto y = loaded->encode(s->text);
    CHECK(a.backend->classify(Task::Topic, x).topic_scores == loaded->classify(Task::Topic, y).topic_scores);
    CHECK(a.backend->classify(Task::Risk, x).probability == loaded->classify(Task::Risk, y).probability);
  }
  CHECK_THROWS_AS(load_lexical_model(testing::write_temp("junk.json", "{}")), ExpertError);
  CHECK_THROWS_AS(load_lexical_model("/nonexistent/model.json"), ExpertError);
}

TEST_CASE("lexical backend contract") {
  const Corpus c = testing::make_separable_corpus(40, 2);
  TrainConfig cfg;
  cfg.epochs = 2;
  auto r = train_multitask(c, train_on_everything(c), cfg);
  auto& b = *r.backend;
  const auto caps = b.capabilities();
  CHECK(caps.all_classifiers());
  CHECK(caps.rewrite == RewriteForm::Text);
  CHECK(caps.thread_safe);
  const auto fv = b.encode("We keep records.");
  CHECK(fv.backend_tag() == "lexical-v1");
  CHECK(b.rewrite(fv, "We may (at any time) share data.").text == "We may share data.");
  CHECK(b.encode_count() == 2);
}
