// SPDX-License-Identifier: Apache-2.0
//
// Annotated policy corpus: data model, JSON ingestion, validation, splitting
// and descriptive statistics.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcsi/categories.hpp"

namespace tcsi {

inline constexpr std::string_view kCorpusSchemaVersion = "1.0";

struct AnnotationSet {
  std::vector<DataPracticeCategory> topics;  // possibly empty, no duplicates
  bool important = false;
  bool risk = false;
  bool sensitive = false;
  std::optional<std::string> rewritten;

  bool has_topic(DataPracticeCategory c) const;
  /// First gold topic that the classifier can predict, in enumeration order.
  std::optional<DataPracticeCategory> primary_topic() const;

  bool operator==(const AnnotationSet&) const = default;
};

struct Sentence {
  std::string id;
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  AnnotationSet annotations;
  nlohmann::json extras = nlohmann::json::object();  // unknown fields, kept verbatim
};

struct Document {
  std::string doc_id;
  std::string title;
  std::vector<Sentence> sentences;
  nlohmann::json extras = nlohmann::json::object();
};

struct Corpus {
  std::string version{kCorpusSchemaVersion};
  std::vector<Document> documents;
  nlohmann::json extras = nlohmann::json::object();

  std::size_t sentence_count() const;
  /// Linear scan; use a SentenceIndex for repeated lookups.
  const Sentence* find(std::string_view sentence_id) const;
  std::vector<const Sentence*> sentences() const;
};

class CorpusError : public std::runtime_error {
 public:
  enum class Kind { MalformedJson, SchemaViolation, DuplicateId, BadRatios, EmptyCorpus };

  CorpusError(Kind kind, std::string path, const std::string& reason);

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

std::string_view error_kind_name(CorpusError::Kind k);

// ---------------------------------------------------------------------------
// Ingestion

struct ParseOptions {
  /// Downgrade risk/sensitive/rewritten => important breaches to warnings.
  bool lenient = false;
  /// Structural parsing only; callers run validate() themselves.
  bool skip_validation = false;
};

/// Parses corpus JSON and checks every invariant. Sentence ids may be JSON
/// strings or integers; integers are stored in decimal string form.
Corpus parse_corpus(std::string_view raw, const ParseOptions& opts = {});
Corpus load_corpus(const std::string& path, const ParseOptions& opts = {});

nlohmann::json corpus_to_json(const Corpus& c);
std::string serialize_corpus(const Corpus& c, int indent = 2);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Severity { Error, Warning };

  std::string doc_id;
  std::string sentence_id;  // empty for document-level findings
  std::string rule;
  std::string message;
  Severity severity = Severity::Error;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const;  // no Error-severity findings
  std::size_t error_count() const;
};

ValidationReport validate(const Corpus& c, const ParseOptions& opts = {});
nlohmann::json to_json(const ValidationReport& r);

// ---------------------------------------------------------------------------
// Splitting

enum class SplitPart { Train, Validation, Test };
enum class SplitUnit { Sentence, Document };

std::string_view part_name(SplitPart p);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Sentence ids eligible for a task: Importance over all sentences,
/// Topic/Risk/Sensitivity over important ones, Rewrite over those with a
/// rewritten form.
bool eligible_for(Task t, const Sentence& s);

struct SplitAssignment {
  Task population = Task::Importance;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  SplitUnit unit = SplitUnit::Sentence;
  std::map<std::string, SplitPart> parts;  // sentence id -> part

  std::size_t size(SplitPart p) const;
  std::vector<std::string> ids(SplitPart p) const;
};

/// Apportions `n` units by largest remainder; ties go to the earlier part
/// (train, then validation, then test).
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& r);

SplitAssignment split(const Corpus& c, Task population, const SplitRatios& ratios,
                      std::uint64_t seed, SplitUnit unit = SplitUnit::Sentence);

using SplitPlan = std::map<Task, SplitAssignment>;

/// One assignment per task population. All populations share the same seeded
/// ranking, so a sentence tends to land in the same part across tasks.
SplitPlan split_all(const Corpus& c, const SplitRatios& ratios, std::uint64_t seed,
                    SplitUnit unit = SplitUnit::Sentence);

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Statistics

struct LabelStats {
  std::string label;  // short table name: "First", ..., "Important", "Risk", "Sensitivity"
  std::size_t count = 0;
  double pct = 0.0;  // count / total sentences * 100
  double median_length = 0.0;
  double mean_length = 0.0;
};

struct CorpusStats {
  std::vector<LabelStats> labels;  // 11 categories, then Important, Risk, Sensitivity
  std::size_t total_sentences = 0;
  std::size_t annotation_count = 0;  // topic labels + special markings
  std::size_t rewritten_count = 0;
  double mean_rewritten_length = 0.0;
  double mean_original_length_of_rewritten = 0.0;

  const LabelStats* find(std::string_view label) const;
};

double median(std::vector<double> values);

CorpusStats compute_stats(const Corpus& c);
nlohmann::json to_json(const CorpusStats& s);
/// Aligned text table with columns Topic, Num, Pct, Med., Avg.
std::string format_stats_table(const CorpusStats& s);

}  // namespace tcsi
