// SPDX-License-Identifier: Apache-2.0
//
// Efficiency harness: the shared-encoder pipeline (V2) against a baseline
// that re-encodes a sentence for every head it consults (V1). Also slices a
// test set by sentence length.
#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcsi/corpus.hpp"
#include "tcsi/evaluation.hpp"
#include "tcsi/experts.hpp"
#include "tcsi/pipeline.hpp"

namespace tcsi {

/// Delegates every head to an inner backend. Subclasses add behaviour
/// around the calls. Features keep the inner backend's tag.
class ForwardingBackend : public ExpertBackend {
 public:
  explicit ForwardingBackend(std::unique_ptr<ExpertBackend> inner);

  Capabilities capabilities() const override { return inner_->capabilities(); }
  std::string tag() const override { return inner_->tag(); }
  ExpertBackend& inner() { return *inner_; }

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  std::vector<double> do_scores(Task task, const FeatureVector& fv) const override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;
  void check_features(const FeatureVector& fv) const override;

 private:
  std::unique_ptr<ExpertBackend> inner_;
};

/// Sleeps a fixed time in every encode, and in text-form rewrites, which
/// re-encode internally.
class DelayedBackend final : public ForwardingBackend {
 public:
  DelayedBackend(std::unique_ptr<ExpertBackend> inner, std::chrono::microseconds delay);

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;

 private:
  std::chrono::microseconds delay_;
};

/// Accumulates wall time spent in encode versus the task heads.
class TimedBackend final : public ForwardingBackend {
 public:
  explicit TimedBackend(std::unique_ptr<ExpertBackend> inner);

  double encode_seconds() const { return encode_ns_.load() * 1e-9; }
  double task_seconds() const { return task_ns_.load() * 1e-9; }
  std::uint64_t rewrite_calls() const { return rewrite_calls_.load(); }

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  std::vector<double> do_scores(Task task, const FeatureVector& fv) const override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;

 private:
  std::atomic<std::int64_t> encode_ns_{0};
  mutable std::atomic<std::int64_t> task_ns_{0};
  std::atomic<std::uint64_t> rewrite_calls_{0};
};

using BackendFactory = std::function<std::unique_ptr<ExpertBackend>()>;

struct BenchOptions {
  std::chrono::microseconds encode_delay{0};
  /// V1 consults every head on every sentence instead of the lazy cascade.
  bool exhaustive = false;
  std::size_t max_input_words = 512;
  /// V2 pipeline workers. Timings then sum over workers.
  std::size_t workers = 1;
};

struct VariantTiming {
  double encode_seconds = 0.0;
  double task_seconds = 0.0;
  double total_seconds = 0.0;
  double per_sentence_seconds = 0.0;
};

struct EfficiencyReport {
  std::size_t sentences = 0;
  std::size_t important = 0;
  std::size_t filtered = 0;  // important and in the selection
  /// Encodes spent on classification features.
  std::uint64_t encode_calls_v1 = 0;
  std::uint64_t encode_calls_v2 = 0;
  /// Extra encodes V2 is charged for text-form rewrites.
  std::uint64_t rewrite_encodes_v2 = 0;
  /// n + important + 3 * filtered (lazy) or the exhaustive equivalent.
  std::uint64_t predicted_v1 = 0;
  VariantTiming v1, v2;
  double count_reduction = 0.0;        // 1 - v2/v1 on encode calls
  double encode_time_reduction = 0.0;  // 1 - v2/v1 on encode seconds
  double total_time_reduction = 0.0;
  bool exhaustive = false;
  long max_rss_kb = -1;  // informational, -1 when unavailable
};

/// Runs V1 and V2 on fresh backends from `factory` over every sentence of
/// `docs`. V2 is the pipeline itself, one worker by default.
EfficiencyReport run_efficiency(const std::vector<Document>& docs, const BackendFactory& factory,
                                const TopicSelection& sel, const BenchOptions& opts = {});

nlohmann::json to_json(const EfficiencyReport& r);
/// Rows: Encoding Time, Task Inference Time, Total Time, Avg. Time per
/// Sentence, Encode Calls.
std::string format_efficiency_table(const EfficiencyReport& r);

class BenchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LengthSliceReport {
  std::size_t k = 0;
  std::vector<std::string> longest_ids;   // longest first
  std::vector<std::string> shortest_ids;  // shortest first
  EvaluationReport longest, shortest, all;
};

/// The k longest and k shortest items by word count, ties broken by id.
std::vector<std::string> longest_k(const std::vector<EvalItem>& items, std::size_t k);
std::vector<std::string> shortest_k(const std::vector<EvalItem>& items, std::size_t k);

/// Throws BenchError on an empty test set or k > size.
LengthSliceReport slice_by_length(const std::vector<EvalItem>& test_set, std::size_t k, ExpertBackend& backend,
                                  const EvaluationOptions& opts = {});

nlohmann::json to_json(const LengthSliceReport& r);

}  // namespace tcsi
