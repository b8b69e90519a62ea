// SPDX-License-Identifier: Apache-2.0
#include "tcsi/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

namespace tcsi {

using Clock = std::chrono::steady_clock;

namespace {

std::int64_t ns_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

// Raw scores back out of a label, so a wrapper can re-label them.
std::vector<double> scores_of(const TaskLabel& l) {
  if (l.task == Task::Topic) return {l.topic_scores.begin(), l.topic_scores.end()};
  return {l.probability};
}

}  // namespace

ForwardingBackend::ForwardingBackend(std::unique_ptr<ExpertBackend> inner) : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("forwarding backend needs an inner backend");
  set_thresholds(inner_->thresholds());
}

FeatureVector ForwardingBackend::do_encode(std::string_view sentence) { return inner_->encode(sentence); }

std::vector<double> ForwardingBackend::do_scores(Task task, const FeatureVector& fv) const {
  return scores_of(inner_->classify(task, fv));
}

RewriteResult ForwardingBackend::do_rewrite(const FeatureVector& fv, std::string_view sentence) {
  return inner_->rewrite(fv, sentence);
}

void ForwardingBackend::check_features(const FeatureVector&) const {
  // The inner backend validates on every call.
}

DelayedBackend::DelayedBackend(std::unique_ptr<ExpertBackend> inner, std::chrono::microseconds delay)
    : ForwardingBackend(std::move(inner)), delay_(delay) {}

FeatureVector DelayedBackend::do_encode(std::string_view sentence) {
  std::this_thread::sleep_for(delay_);
  return ForwardingBackend::do_encode(sentence);
}

RewriteResult DelayedBackend::do_rewrite(const FeatureVector& fv, std::string_view sentence) {
  if (capabilities().rewrite == RewriteForm::Text) std::this_thread::sleep_for(delay_);
  return ForwardingBackend::do_rewrite(fv, sentence);
}

TimedBackend::TimedBackend(std::unique_ptr<ExpertBackend> inner) : ForwardingBackend(std::move(inner)) {}

FeatureVector TimedBackend::do_encode(std::string_view sentence) {
  const auto t0 = Clock::now();
  auto fv = ForwardingBackend::do_encode(sentence);
  encode_ns_ += ns_since(t0);
  return fv;
}

std::vector<double> TimedBackend::do_scores(Task task, const FeatureVector& fv) const {
  const auto t0 = Clock::now();
  auto s = ForwardingBackend::do_scores(task, fv);
  task_ns_ += ns_since(t0);
  return s;
}

RewriteResult TimedBackend::do_rewrite(const FeatureVector& fv, std::string_view sentence) {
  const auto t0 = Clock::now();
  auto r = ForwardingBackend::do_rewrite(fv, sentence);
  task_ns_ += ns_since(t0);
  ++rewrite_calls_;
  return r;
}

// ---------------------------------------------------------------------------
// Efficiency

namespace {

std::unique_ptr<TimedBackend> instrumented(const BackendFactory& factory, const BenchOptions& opts) {
  auto inner = factory();
  if (!inner) throw ExpertError(ExpertError::Kind::BackendUnavailable, "backend factory returned nothing");
  if (opts.encode_delay.count() > 0) inner = std::make_unique<DelayedBackend>(std::move(inner), opts.encode_delay);
  return std::make_unique<TimedBackend>(std::move(inner));
}

VariantTiming timing(const TimedBackend& b, double total, std::size_t n) {
  VariantTiming t;
  t.encode_seconds = b.encode_seconds();
  t.task_seconds = b.task_seconds();
  t.total_seconds = total;
  t.per_sentence_seconds = n == 0 ? 0.0 : total / static_cast<double>(n);
  return t;
}

double reduction(double v1, double v2) { return v1 <= 0.0 ? 0.0 : 1.0 - v2 / v1; }

// Per-task baseline: every head it consults gets its own fresh encode.
void run_v1_sentence(ExpertBackend& b, const std::string& text, const TopicSelection& sel, bool exhaustive,
                     bool has_rewrite, bool text_rewrite) {
  const bool important = b.classify(Task::Importance, b.encode(text)).positive;
  if (!important && !exhaustive) return;
  const auto topic = b.classify(Task::Topic, b.encode(text)).topic;
  if (!sel.contains(*topic) && !exhaustive) return;
  b.classify(Task::Risk, b.encode(text));
  b.classify(Task::Sensitivity, b.encode(text));
  if (has_rewrite) {
    if (text_rewrite) {
      b.rewrite(FeatureVector{}, text);  // charged one encode by the contract
    } else {
      b.rewrite(b.encode(text), text);
    }
  }
}

}  // namespace

EfficiencyReport run_efficiency(const std::vector<Document>& docs, const BackendFactory& factory,
                                const TopicSelection& sel, const BenchOptions& opts) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.sentences.size();
  if (n == 0) throw BenchError("efficiency run needs at least one sentence");

  EfficiencyReport r;
  r.sentences = n;
  r.exhaustive = opts.exhaustive;

  // V2: the pipeline.
  {
    auto b = instrumented(factory, opts);
    SummarizeOptions so;
    so.workers = opts.workers;
    so.max_input_words = opts.max_input_words;
    const auto t0 = Clock::now();
    for (const auto& d : docs) r.filtered += summarize(d, sel, *b, so).item_count();
    const double total = ns_since(t0) * 1e-9;
    r.rewrite_encodes_v2 = b->capabilities().rewrite == RewriteForm::Text ? b->rewrite_calls() : 0;
    r.encode_calls_v2 = b->encode_count() - r.rewrite_encodes_v2;
    r.v2 = timing(*b, total, n);
  }

  // V1: re-encode per consulted head.
  bool has_rewrite = false;
  {
    auto b = instrumented(factory, opts);
    const auto caps = b->capabilities();
    has_rewrite = caps.rewrite != RewriteForm::None;
    const bool text_rewrite = caps.rewrite == RewriteForm::Text;
    const auto t0 = Clock::now();
    for (const auto& d : docs) {
      for (const auto& s : d.sentences) {
        run_v1_sentence(*b, truncate(s.text, opts.max_input_words).text, sel, opts.exhaustive, has_rewrite,
                        text_rewrite);
      }
    }
    const double total = ns_since(t0) * 1e-9;
    r.encode_calls_v1 = b->encode_count();
    r.v1 = timing(*b, total, n);
  }

  // The important set, counted on a separate backend so neither variant's
  // counters are touched.
  {
    auto b = factory();
    for (const auto& d : docs) {
      for (const auto& s : d.sentences) {
        const auto fv = b->encode(truncate(s.text, opts.max_input_words).text);
        if (b->classify(Task::Importance, fv).positive) ++r.important;
      }
    }
  }

  const std::uint64_t late_heads = has_rewrite ? 3 : 2;  // Risk, Sensitivity, Rewrite
  r.predicted_v1 = opts.exhaustive ? n * (2 + late_heads) : n + r.important + late_heads * r.filtered;
  r.count_reduction = reduction(static_cast<double>(r.encode_calls_v1), static_cast<double>(r.encode_calls_v2));
  r.encode_time_reduction = reduction(r.v1.encode_seconds, r.v2.encode_seconds);
  r.total_time_reduction = reduction(r.v1.total_seconds, r.v2.total_seconds);
  struct rusage ru {};
  if (getrusage(RUSAGE_SELF, &ru) == 0) r.max_rss_kb = ru.ru_maxrss;
  return r;
}

nlohmann::json to_json(const EfficiencyReport& r) {
  auto variant = [](const VariantTiming& t) {
    return nlohmann::json{{"encode_seconds", t.encode_seconds},
                          {"task_seconds", t.task_seconds},
                          {"total_seconds", t.total_seconds},
                          {"per_sentence_seconds", t.per_sentence_seconds}};
  };
  return {{"sentences", r.sentences},
          {"important", r.important},
          {"filtered", r.filtered},
          {"encode_calls_v1", r.encode_calls_v1},
          {"encode_calls_v2", r.encode_calls_v2},
          {"rewrite_encodes_v2", r.rewrite_encodes_v2},
          {"predicted_v1", r.predicted_v1},
          {"v1", variant(r.v1)},
          {"v2", variant(r.v2)},
          {"count_reduction", r.count_reduction},
          {"encode_time_reduction", r.encode_time_reduction},
          {"total_time_reduction", r.total_time_reduction},
          {"exhaustive", r.exhaustive},
          {"max_rss_kb", r.max_rss_kb}};
}

std::string format_efficiency_table(const EfficiencyReport& r) {
  auto row = [](const char* name, double v1, double v2, int precision) {
    char buf[160];
    const double red = v1 <= 0.0 ? 0.0 : 100.0 * (1.0 - v2 / v1);
    std::snprintf(buf, sizeof buf, "%-28s %14.*f %14.*f %9.1f%%\n", name, precision, v1, precision, v2, red);
    return std::string(buf);
  };
  std::ostringstream out;
  char head[160];
  std::snprintf(head, sizeof head, "%-28s %14s %14s %10s\n", "", "TCSI-pp", "TCSI-pp-V2", "Reduction");
  out << head;
  out << row("Encoding Time (s)", r.v1.encode_seconds, r.v2.encode_seconds, 4);
  out << row("Task Inference Time (s)", r.v1.task_seconds, r.v2.task_seconds, 4);
  out << row("Total Time (s)", r.v1.total_seconds, r.v2.total_seconds, 4);
  out << row("Avg. Time per Sentence (s)", r.v1.per_sentence_seconds, r.v2.per_sentence_seconds, 6);
  out << row("Encode Calls", static_cast<double>(r.encode_calls_v1), static_cast<double>(r.encode_calls_v2), 0);
  if (r.rewrite_encodes_v2 > 0) {
    out << "(V2 additionally charged " << r.rewrite_encodes_v2 << " encodes for text-form rewrites)\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Length slices

namespace {

std::vector<std::pair<std::size_t, std::string>> by_length(const std::vector<EvalItem>& items) {
  std::vector<std::pair<std::size_t, std::string>> v;
  v.reserve(items.size());
  for (const auto& it : items) v.emplace_back(text::word_count(it.text), it.id);
  return v;
}

std::vector<std::string> take(std::vector<std::pair<std::size_t, std::string>> v, std::size_t k, bool longest) {
  std::sort(v.begin(), v.end(), [longest](const auto& a, const auto& b) {
    if (a.first != b.first) return longest ? a.first > b.first : a.first < b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k && i < v.size(); ++i) out.push_back(v[i].second);
  return out;
}

std::vector<EvalItem> select(const std::vector<EvalItem>& items, const std::vector<std::string>& ids) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<EvalItem> out;
  for (const auto& it : items) {
    if (wanted.count(it.id)) out.push_back(it);
  }
  return out;
}

}  // namespace

std::vector<std::string> longest_k(const std::vector<EvalItem>& items, std::size_t k) {
  return take(by_length(items), k, true);
}

std::vector<std::string> shortest_k(const std::vector<EvalItem>& items, std::size_t k) {
  return take(by_length(items), k, false);
}

LengthSliceReport slice_by_length(const std::vector<EvalItem>& test_set, std::size_t k, ExpertBackend& backend,
                                  const EvaluationOptions& opts) {
  if (test_set.empty()) throw BenchError("EmptyTestSet: nothing to slice");
  if (k > test_set.size()) {
    throw BenchError("slice size " + std::to_string(k) + " exceeds test set size " +
                     std::to_string(test_set.size()));
  }
  LengthSliceReport r;
  r.k = k;
  r.longest_ids = longest_k(test_set, k);
  r.shortest_ids = shortest_k(test_set, k);
  r.longest = evaluate_backend(backend, select(test_set, r.longest_ids), opts);
  r.shortest = evaluate_backend(backend, select(test_set, r.shortest_ids), opts);
  r.all = evaluate_backend(backend, test_set, opts);
  return r;
}

nlohmann::json to_json(const LengthSliceReport& r) {
  return {{"k", r.k},
          {"longest_ids", r.longest_ids},
          {"shortest_ids", r.shortest_ids},
          {"longest", to_json(r.longest)},
          {"shortest", to_json(r.shortest)},
          {"all", to_json(r.all)}};
}

}  // namespace tcsi
