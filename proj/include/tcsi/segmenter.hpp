// SPDX-License-Identifier: Apache-2.0
//
// Markup removal, rule-based sentence segmentation and input truncation.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tcsi {

/// Versions the boundary rules below. Bump whenever they change.
inline constexpr std::string_view kSegmenterVersion = "segmenter-v1";

struct RawDocument {
  std::string source_id;
  std::string body;  // may contain HTML markup
};

struct SentenceSpan {
  std::size_t index = 0;
  std::string text;
  std::size_t start = 0;  // byte offsets into the cleaned text, [start, end)
  std::size_t end = 0;
};

struct SegmentedDocument {
  std::string source_id;
  std::vector<SentenceSpan> sentences;
};

struct SegmenterOptions {
  bool split_on_semicolon = true;
};

/// Removes tags, decodes the named entities {amp, lt, gt, quot, apos, nbsp}
/// and numeric entities, collapses whitespace runs to one space and keeps
/// paragraph breaks as a single newline. A '<' that does not open a tag is
/// kept literally.
std::string strip_markup(std::string_view body);

/// True if `s` contains something strip_markup would treat as a tag.
bool contains_markup(std::string_view s);

/// Splits markup-free text into sentences. Each line is segmented on its own,
/// so newline-delimited headings become separate sentences.
SegmentedDocument segment(std::string_view text, const SegmenterOptions& opts = {},
                          std::string source_id = {});

/// strip_markup followed by segment.
SegmentedDocument segment_document(const RawDocument& doc, const SegmenterOptions& opts = {});

enum class TruncationUnit { Words, Characters };

struct Truncation {
  std::string text;
  bool truncated = false;
};

/// Keeps the leading `max_units` words (whitespace tokens) or code points.
Truncation truncate(std::string_view sentence, std::size_t max_units,
                    TruncationUnit unit = TruncationUnit::Words);

nlohmann::json to_json(const SegmentedDocument& d);
SegmentedDocument segmented_document_from_json(const nlohmann::json& j);

}  // namespace tcsi
