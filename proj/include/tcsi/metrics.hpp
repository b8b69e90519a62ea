// SPDX-License-Identifier: Apache-2.0
//
// Evaluation primitives: per-class precision/recall/F1 with micro and macro
// aggregation, ROUGE-N / ROUGE-L over word tokens, and Cohen's kappa.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcsi/corpus.hpp"

namespace tcsi {

class MetricsError : public std::invalid_argument {
 public:
  enum class Kind { InstanceMismatch, UnknownLabel, EmptyAfterTokenization, LengthMismatch, EmptyInput };
  MetricsError(Kind kind, const std::string& detail);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view error_kind_name(MetricsError::Kind k);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold occurrences
  std::size_t predicted = 0;  // predicted occurrences
  bool zero_support = false;  // f1 forced to 0 and still averaged into macro
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;  // label_set order
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t instances = 0;
  bool multi_label = false;

  const ClassMetrics* find(std::string_view label) const;
  std::size_t total_support() const;
};

/// Single-label report keyed by instance id. Both maps must have the same key
/// set and every label must belong to label_set.
ClassificationReport classification_report(const std::map<std::string, std::string>& gold,
                                           const std::map<std::string, std::string>& pred,
                                           const std::vector<std::string>& label_set);

/// Positional single-label convenience form.
ClassificationReport classification_report(const std::vector<std::string>& gold,
                                           const std::vector<std::string>& pred,
                                           const std::vector<std::string>& label_set);

/// Multi-label report: every (instance, label) pair is one binary decision.
ClassificationReport multilabel_report(const std::map<std::string, std::set<std::string>>& gold,
                                       const std::map<std::string, std::set<std::string>>& pred,
                                       const std::vector<std::string>& label_set);

inline constexpr std::string_view kPositiveLabel = "positive";
inline constexpr std::string_view kNegativeLabel = "negative";

/// Binary report over both classes, so micro_f1 equals accuracy.
ClassificationReport binary_report(const std::vector<bool>& gold, const std::vector<bool>& pred);

nlohmann::json to_json(const ClassificationReport& r);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Clipped n-gram overlap over text::word_tokens.
RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n);
RougeScore rouge_n_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference, std::size_t n);

/// Longest common subsequence over text::word_tokens.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge_l_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Mean P/R/F1 of ROUGE-1, ROUGE-2 and ROUGE-L over candidate/reference pairs.
struct RougeSummary {
  RougeScore rouge1, rouge2, rougeL;
  std::size_t pairs = 0;
};

RougeSummary rouge_summary(const std::vector<std::pair<std::string, std::string>>& pairs);

nlohmann::json to_json(const RougeScore& r);
nlohmann::json to_json(const RougeSummary& r);

struct KappaScore {
  double kappa = 0.0;
  double po = 0.0;
  double pe = 0.0;
  /// Set when pe == 1, where the ratio is 0/0 and kappa is defined by fiat.
  bool degenerate = false;
};

KappaScore cohens_kappa(const std::vector<std::string>& rater_a, const std::vector<std::string>& rater_b);

/// Mean of cohens_kappa over every rater pair. Needs at least two raters.
double mean_pairwise_kappa(const std::vector<std::vector<std::string>>& raters);

/// Kappa of two annotators on one task. Topic compares the primary topic.
KappaScore task_kappa(const std::vector<AnnotationSet>& a, const std::vector<AnnotationSet>& b, Task t);

/// Kappa over every (sentence, label) yes/no decision: 11 topics plus the
/// Important, Risk and Sensitivity markings.
KappaScore flattened_kappa(const std::vector<AnnotationSet>& a, const std::vector<AnnotationSet>& b);

nlohmann::json to_json(const KappaScore& k);

/// Task | Micro-F1 | Macro-F1 rows.
std::string format_task_table(const std::vector<std::pair<std::string, ClassificationReport>>& rows);
/// Per-class Precision | Recall | F1 | Support rows.
std::string format_class_table(const ClassificationReport& r);
/// ROUGE-1 | ROUGE-2 | ROUGE-L F1 row.
std::string format_rouge_table(const RougeSummary& r);

}  // namespace tcsi
