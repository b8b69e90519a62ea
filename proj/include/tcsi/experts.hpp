// SPDX-License-Identifier: Apache-2.0
//
// The expert-backend contract: one shared encoder (encode) whose feature
// vectors feed the Importance/Topic/Risk/Sensitivity heads (classify) and the
// rewrite head. Every encode is counted so callers can verify that each
// sentence is encoded exactly once.
#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcsi/categories.hpp"

namespace tcsi {

class ExpertError : public std::runtime_error {
 public:
  enum class Kind {
    BackendUnavailable,
    EncodingFailure,
    DimensionMismatch,
    UnsupportedTask,
    GenerationFailure,
    UnknownSentence,
    SpawnFailure,
    ProtocolViolation,
    Timeout,
    PreconditionFailed,
  };

  ExpertError(Kind kind, const std::string& detail);

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view error_kind_name(ExpertError::Kind k);

/// Shared sentence representation. Either dense (one value per dimension) or
/// sparse (strictly increasing indices below dim).
class FeatureVector {
 public:
  using SparseEntry = std::pair<std::uint32_t, float>;

  FeatureVector() = default;
  static FeatureVector dense(std::vector<float> values, std::string backend_tag);
  static FeatureVector sparse(std::uint32_t dim, std::vector<SparseEntry> entries,
                              std::string backend_tag);

  std::uint32_t dim() const { return dim_; }
  bool is_sparse() const { return sparse_; }
  const std::vector<float>& dense_values() const { return dense_; }
  const std::vector<SparseEntry>& sparse_entries() const { return entries_; }
  const std::string& backend_tag() const { return tag_; }

  /// Value at dimension i (0 for absent sparse entries).
  float at(std::uint32_t i) const;
  std::vector<float> to_dense() const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::uint32_t dim_ = 0;
  bool sparse_ = false;
  std::vector<float> dense_;
  std::vector<SparseEntry> entries_;
  std::string tag_;
};

struct TaskLabel {
  Task task = Task::Importance;
  /// Binary tasks: probability of the positive class.
  double probability = 0.0;
  /// Topic: distribution over kClassifiableTopics.
  std::array<double, kClassifiableCount> topic_scores{};
  /// Binary: probability >= threshold. Topic: always true.
  bool positive = false;
  /// Topic: argmax, ties broken by enumeration order.
  std::optional<DataPracticeCategory> topic;
  /// Topic, multi-label mode only: every class scoring >= its threshold.
  std::vector<DataPracticeCategory> topics;

  /// Probability of the decision that was taken.
  double confidence() const;
};

struct RewriteResult {
  std::string text;
  bool truncated = false;
};

enum class RewriteForm {
  None,      // no rewrite head
  Features,  // decodes from the shared FeatureVector
  Text,      // needs the sentence text; costs one attributed encode
};

struct Capabilities {
  bool importance = false;
  bool topic = false;
  bool risk = false;
  bool sensitivity = false;
  RewriteForm rewrite = RewriteForm::None;
  bool thread_safe = false;

  bool has(Task t) const;
  bool all_classifiers() const { return importance && topic && risk && sensitivity; }
};

struct Thresholds {
  double importance = 0.5;
  double risk = 0.5;
  double sensitivity = 0.5;
  bool multi_label_topics = false;
  double topic = 0.5;  // per-class threshold in multi-label mode

  double for_task(Task t) const;
};

/// Base for all backends. The public entry points enforce the contract
/// (preconditions, encode accounting, score invariants); subclasses supply
/// the raw computation.
class ExpertBackend {
 public:
  virtual ~ExpertBackend() = default;
  ExpertBackend(const ExpertBackend&) = delete;
  ExpertBackend& operator=(const ExpertBackend&) = delete;

  /// Increments encode_count by exactly one, even if encoding fails.
  FeatureVector encode(std::string_view sentence);

  /// Never encodes.
  TaskLabel classify(Task task, const FeatureVector& fv) const;

  /// `sentence` is required when capabilities().rewrite == RewriteForm::Text,
  /// in which case one encode is attributed to encode_count.
  RewriteResult rewrite(const FeatureVector& fv, std::string_view sentence);

  virtual Capabilities capabilities() const = 0;
  /// Identifies the producing backend and version; features carry it.
  virtual std::string tag() const = 0;

  std::uint64_t encode_count() const { return encode_count_.load(); }

  const Thresholds& thresholds() const { return thresholds_; }
  void set_thresholds(const Thresholds& t) { thresholds_ = t; }

 protected:
  ExpertBackend() = default;

  virtual FeatureVector do_encode(std::string_view sentence) = 0;
  /// Binary tasks: one probability. Topic: kClassifiableCount scores.
  virtual std::vector<double> do_scores(Task task, const FeatureVector& fv) const = 0;
  virtual RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence);

  /// Throws DimensionMismatch unless fv came from this backend.
  virtual void check_features(const FeatureVector& fv) const;

 private:
  std::atomic<std::uint64_t> encode_count_{0};
  Thresholds thresholds_;
};

/// Turns raw head scores into a TaskLabel under the given thresholds.
/// Throws ProtocolViolation if the scores break the TaskLabel invariants.
TaskLabel make_label(Task task, const std::vector<double>& scores, const Thresholds& th);

}  // namespace tcsi
