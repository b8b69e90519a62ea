// SPDX-License-Identifier: Apache-2.0
//
// Scores a backend against gold annotations on a set of sentences.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcsi/corpus.hpp"
#include "tcsi/experts.hpp"
#include "tcsi/metrics.hpp"

namespace tcsi {

struct EvalItem {
  std::string id;
  std::string text;
  AnnotationSet gold;
};

std::vector<EvalItem> eval_items(const Corpus& c);
/// Items whose ids are listed, in corpus order.
std::vector<EvalItem> eval_items(const Corpus& c, const std::vector<std::string>& ids);

struct EvaluationOptions {
  std::size_t max_input_words = 512;
  bool score_rewrite = true;
};

struct EvaluationReport {
  /// Importance over every item; Topic/Risk/Sensitivity over gold-important
  /// items. Topic compares the predicted argmax with the primary gold topic.
  std::map<Task, ClassificationReport> tasks;
  /// Gold-important items with a rewritten form, when the backend rewrites.
  std::optional<RougeSummary> rewrite;
  std::size_t items = 0;
};

/// Encodes each item once and consults every head on the shared features.
/// Label sets are the classes observed in gold or predictions.
EvaluationReport evaluate_backend(ExpertBackend& backend, const std::vector<EvalItem>& items,
                                  const EvaluationOptions& opts = {});

nlohmann::json to_json(const EvaluationReport& r);
std::string format_evaluation(const EvaluationReport& r);

}  // namespace tcsi
