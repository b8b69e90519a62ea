// SPDX-License-Identifier: Apache-2.0
//
// End-to-end summarization: segment, encode each sentence once, gate by
// Importance, filter by the selected topics, mark Risk/Sensitivity, rewrite,
// and group the survivors into topic sections.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcsi/corpus.hpp"
#include "tcsi/experts.hpp"
#include "tcsi/segmenter.hpp"

namespace tcsi {

/// Ordered, duplicate-free topic subset, or every category.
class TopicSelection {
 public:
  static TopicSelection all();
  /// Throws std::invalid_argument on an empty list or duplicates.
  static TopicSelection of(std::vector<DataPracticeCategory> topics);
  /// "ALL" or a comma-separated list in any accepted category spelling.
  static TopicSelection parse(std::string_view spec);

  bool is_all() const { return all_; }
  bool contains(DataPracticeCategory c) const;
  /// Section order: selection order, or enumeration order for ALL.
  std::vector<DataPracticeCategory> ordered() const;
  std::string to_string() const;

 private:
  bool all_ = true;
  std::vector<DataPracticeCategory> topics_;
};

struct ItemScores {
  double importance = 0.0;
  double topic = 0.0;  // probability of the assigned topic
  double risk = 0.0;
  double sensitivity = 0.0;
};

struct SummaryItem {
  std::string text;  // rewritten form, or the original when no rewrite head
  bool highlighted = false;
  bool risk = false;
  bool sensitive = false;
  std::string source_id;  // sentence id
  std::size_t sentence_index = 0;
  std::string original;
  bool input_truncated = false;
  ItemScores scores;
};

struct SummarySection {
  DataPracticeCategory topic{};
  std::string title;
  std::vector<SummaryItem> items;
};

struct Provenance {
  std::string backend_tag;
  std::string segmenter_version;
  Thresholds thresholds;
  std::string selection;
  std::size_t max_input_words = 0;
};

struct Summary {
  std::string source_id;
  std::vector<SummarySection> sections;
  Provenance provenance;

  std::size_t item_count() const;
};

struct SummarizeOptions {
  std::size_t workers = 1;
  bool keep_empty_sections = false;
  /// Items whose importance or topic probability falls below this are dropped.
  double min_confidence = 0.0;
  std::size_t max_input_words = 512;
  SegmenterOptions segmenter;
};

/// One input sentence with a stable id.
struct PipelineSentence {
  std::string id;
  std::string text;
};

Summary summarize(const std::string& source_id, const std::vector<PipelineSentence>& sentences,
                  const TopicSelection& sel, ExpertBackend& backend, const SummarizeOptions& opts = {});
/// Sentence ids are "<source_id>#<index>".
Summary summarize(const SegmentedDocument& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts = {});
Summary summarize(const RawDocument& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts = {});
/// Uses the corpus sentence ids.
Summary summarize(const Document& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts = {});

std::vector<PipelineSentence> pipeline_sentences(const Document& doc);
std::vector<PipelineSentence> pipeline_sentences(const SegmentedDocument& doc);

enum class RenderFormat { Json, Markdown, Html };
std::optional<RenderFormat> parse_render_format(std::string_view s);

nlohmann::json to_json(const Summary& s);
Summary summary_from_json(const nlohmann::json& j);
std::string render(const Summary& s, RenderFormat format);

}  // namespace tcsi
