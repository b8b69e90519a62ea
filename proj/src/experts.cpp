// SPDX-License-Identifier: Apache-2.0
#include "tcsi/experts.hpp"

#include <algorithm>
#include <cmath>

#include "tcsi/text.hpp"

namespace tcsi {

ExpertError::ExpertError(Kind kind, const std::string& detail)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + detail), kind_(kind) {}

std::string_view error_kind_name(ExpertError::Kind k) {
  switch (k) {
    case ExpertError::Kind::BackendUnavailable: return "BackendUnavailable";
    case ExpertError::Kind::EncodingFailure: return "EncodingFailure";
    case ExpertError::Kind::DimensionMismatch: return "DimensionMismatch";
    case ExpertError::Kind::UnsupportedTask: return "UnsupportedTask";
    case ExpertError::Kind::GenerationFailure: return "GenerationFailure";
    case ExpertError::Kind::UnknownSentence: return "UnknownSentence";
    case ExpertError::Kind::SpawnFailure: return "SpawnFailure";
    case ExpertError::Kind::ProtocolViolation: return "ProtocolViolation";
    case ExpertError::Kind::Timeout: return "Timeout";
    case ExpertError::Kind::PreconditionFailed: return "PreconditionFailed";
  }
  return "ExpertError";
}

// ---------------------------------------------------------------------------
// FeatureVector

FeatureVector FeatureVector::dense(std::vector<float> values, std::string backend_tag) {
  for (float v : values) {
    if (!std::isfinite(v)) throw ExpertError(ExpertError::Kind::EncodingFailure, "non-finite feature");
  }
  if (values.empty()) throw ExpertError(ExpertError::Kind::EncodingFailure, "empty feature vector");
  FeatureVector fv;
  fv.dim_ = static_cast<std::uint32_t>(values.size());
  fv.dense_ = std::move(values);
  fv.tag_ = std::move(backend_tag);
  return fv;
}

FeatureVector FeatureVector::sparse(std::uint32_t dim, std::vector<SparseEntry> entries,
                                    std::string backend_tag) {
  if (dim == 0) throw ExpertError(ExpertError::Kind::EncodingFailure, "dim must be positive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first >= dim || (i > 0 && entries[i].first <= entries[i - 1].first)) {
      throw ExpertError(ExpertError::Kind::EncodingFailure,
                        "sparse indices must be strictly increasing and below dim");
    }
    if (!std::isfinite(entries[i].second))
      throw ExpertError(ExpertError::Kind::EncodingFailure, "non-finite feature");
  }
  FeatureVector fv;
  fv.dim_ = dim;
  fv.sparse_ = true;
  fv.entries_ = std::move(entries);
  fv.tag_ = std::move(backend_tag);
  return fv;
}

float FeatureVector::at(std::uint32_t i) const {
  if (!sparse_) return i < dense_.size() ? dense_[i] : 0.0f;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const SparseEntry& e, std::uint32_t k) { return e.first < k; });
  return it != entries_.end() && it->first == i ? it->second : 0.0f;
}

std::vector<float> FeatureVector::to_dense() const {
  if (!sparse_) return dense_;
  std::vector<float> out(dim_, 0.0f);
  for (const auto& [i, v] : entries_) out[i] = v;
  return out;
}

// ---------------------------------------------------------------------------
// Labels and capabilities

double TaskLabel::confidence() const {
  if (task == Task::Topic) {
    return *std::max_element(topic_scores.begin(), topic_scores.end());
  }
  return positive ? probability : 1.0 - probability;
}

bool Capabilities::has(Task t) const {
  switch (t) {
    case Task::Importance: return importance;
    case Task::Topic: return topic;
    case Task::Risk: return risk;
    case Task::Sensitivity: return sensitivity;
    case Task::Rewrite: return rewrite != RewriteForm::None;
  }
  return false;
}

double Thresholds::for_task(Task t) const {
  switch (t) {
    case Task::Importance: return importance;
    case Task::Risk: return risk;
    case Task::Sensitivity: return sensitivity;
    case Task::Topic: return topic;
    case Task::Rewrite: break;
  }
  return 0.5;
}

TaskLabel make_label(Task task, const std::vector<double>& scores, const Thresholds& th) {
  TaskLabel label;
  label.task = task;
  if (task == Task::Rewrite) {
    throw ExpertError(ExpertError::Kind::UnsupportedTask, "Rewrite is not a classification task");
  }
  if (task != Task::Topic) {
    if (scores.size() != 1 || !std::isfinite(scores[0]) || scores[0] < 0.0 || scores[0] > 1.0) {
      throw ExpertError(ExpertError::Kind::ProtocolViolation,
                        "binary head must yield one probability in [0,1]");
    }
    label.probability = scores[0];
    label.positive = scores[0] >= th.for_task(task);
    return label;
  }

  if (scores.size() != kClassifiableCount) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation,
                      "topic head must yield " + std::to_string(kClassifiableCount) + " scores");
  }
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ExpertError(ExpertError::Kind::ProtocolViolation, "topic scores must be non-negative");
    }
    sum += s;
  }
  // Remote heads serialize float32 decimals; tolerate that rounding and renormalize.
  if (std::abs(sum - 1.0) > 1e-4) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "topic scores do not sum to 1");
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < kClassifiableCount; ++i) {
    label.topic_scores[i] = scores[i] / sum;
    if (label.topic_scores[i] > label.topic_scores[best]) best = i;
  }
  label.topic = kClassifiableTopics[best];
  label.positive = true;
  if (th.multi_label_topics) {
    for (std::size_t i = 0; i < kClassifiableCount; ++i) {
      if (label.topic_scores[i] >= th.topic) label.topics.push_back(kClassifiableTopics[i]);
    }
    if (label.topics.empty()) label.topics.push_back(*label.topic);
  } else {
    label.topics.push_back(*label.topic);
  }
  return label;
}

// ---------------------------------------------------------------------------
// ExpertBackend

FeatureVector ExpertBackend::encode(std::string_view sentence) {
  encode_count_.fetch_add(1);
  if (text::trim(sentence).empty()) {
    throw ExpertError(ExpertError::Kind::PreconditionFailed, "cannot encode an empty sentence");
  }
  return do_encode(sentence);
}

TaskLabel ExpertBackend::classify(Task task, const FeatureVector& fv) const {
  if (task == Task::Rewrite || !capabilities().has(task)) {
    throw ExpertError(ExpertError::Kind::UnsupportedTask,
                      std::string(task_name(task)) + " head not available in " + tag());
  }
  check_features(fv);
  return make_label(task, do_scores(task, fv), thresholds_);
}

RewriteResult ExpertBackend::rewrite(const FeatureVector& fv, std::string_view sentence) {
  const auto form = capabilities().rewrite;
  if (form == RewriteForm::None) {
    throw ExpertError(ExpertError::Kind::UnsupportedTask, "rewrite head not available in " + tag());
  }
  if (form == RewriteForm::Text) {
    if (text::trim(sentence).empty()) {
      throw ExpertError(ExpertError::Kind::PreconditionFailed, "text-form rewrite needs the sentence");
    }
    encode_count_.fetch_add(1);
  } else {
    check_features(fv);
  }
  auto out = do_rewrite(fv, sentence);
  if (out.text.empty() && !text::trim(sentence).empty()) {
    throw ExpertError(ExpertError::Kind::GenerationFailure, "empty rewrite");
  }
  return out;
}

RewriteResult ExpertBackend::do_rewrite(const FeatureVector&, std::string_view) {
  throw ExpertError(ExpertError::Kind::UnsupportedTask, "rewrite not implemented");
}

void ExpertBackend::check_features(const FeatureVector& fv) const {
  if (fv.backend_tag() != tag()) {
    throw ExpertError(ExpertError::Kind::DimensionMismatch,
                      "features from '" + fv.backend_tag() + "' given to '" + tag() + "'");
  }
}

}  // namespace tcsi
