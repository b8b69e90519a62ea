// SPDX-License-Identifier: Apache-2.0
#include "tcsi/segmenter.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <stdexcept>

#include "tcsi/text.hpp"

namespace tcsi {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

constexpr std::array<std::string_view, 22> kBlockTags = {
    "p",  "br", "div", "li",    "ul",      "ol",      "h1",     "h2",     "h3",     "h4",    "h5",
    "h6", "tr", "table", "section", "article", "header", "footer", "title", "blockquote", "dt", "dd"};

// If a tag opens at `i`, returns one past its closing '>'. The shape accepted
// is  < \s* /? \s* [A-Za-z!?] [^<>]* >  so it agrees with contains_markup.
std::optional<std::size_t> tag_end(std::string_view s, std::size_t i) {
  if (s[i] != '<') return std::nullopt;
  std::size_t j = i + 1;
  while (j < s.size() && text::is_space(s[j])) ++j;
  if (j < s.size() && s[j] == '/') ++j;
  while (j < s.size() && text::is_space(s[j])) ++j;
  if (j >= s.size() || !(is_alpha(s[j]) || s[j] == '!' || s[j] == '?')) return std::nullopt;
  for (std::size_t k = j + 1; k < s.size(); ++k) {
    if (s[k] == '>') return k + 1;
    if (s[k] == '<') return std::nullopt;
  }
  return std::nullopt;
}

std::string tag_name(std::string_view tag) {
  std::string name;
  for (char c : tag) {
    if (c == '<' || c == '/' || text::is_space(c)) {
      if (name.empty()) continue;
      break;
    }
    if (!std::isalnum(static_cast<unsigned char>(c))) break;
    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return name;
}

bool is_closing(std::string_view tag) {
  for (char c : tag.substr(1)) {
    if (text::is_space(c)) continue;
    return c == '/';
  }
  return false;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  struct Named {
    std::string_view name;
    std::string_view value;
  };
  static constexpr std::array<Named, 6> kNamed = {{{"amp", "&"},
                                                   {"lt", "<"},
                                                   {"gt", ">"},
                                                   {"quot", "\""},
                                                   {"apos", "'"},
                                                   {"nbsp", " "}}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const auto body = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (body.size() > 1 && body[0] == '#') {
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const auto digits = body.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      bool valid = !digits.empty();
      for (char c : digits) {
        int v = -1;
        if (std::isdigit(static_cast<unsigned char>(c))) {
          v = c - '0';
        } else if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
          v = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
        }
        if (v < 0 || cp > 0x10FFFF) {
          valid = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (valid && cp > 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& n : kNamed) {
        if (body == n.name) {
          out.append(n.value);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

// One pass of tag removal. Block-level tags become line breaks; script and
// style bodies and comments are dropped.
std::string remove_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      if (s.substr(i, 4) == "<!--") {
        const auto close = s.find("-->", i + 4);
        if (close != std::string_view::npos) {
          i = close + 3;
          continue;
        }
      }
      if (auto end = tag_end(s, i)) {
        const auto tag = s.substr(i, *end - i);
        const auto name = tag_name(tag);
        i = *end;
        if ((name == "script" || name == "style") && !is_closing(tag)) {
          const std::string lower = text::to_lower_ascii(s.substr(i));
          const auto close = lower.find("</" + name);
          if (close == std::string::npos) {
            i = s.size();
          } else {
            i += close;
          }
          continue;
        }
        if (std::find(kBlockTags.begin(), kBlockTags.end(), name) != kBlockTags.end()) {
          out.push_back('\n');
        }
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (!text::is_space(s[i])) {
      out.push_back(s[i++]);
      continue;
    }
    bool newline = false;
    while (i < s.size() && text::is_space(s[i])) {
      newline = newline || s[i] == '\n';
      ++i;
    }
    if (out.empty() || i == s.size()) continue;  // trim both ends
    out.push_back(newline ? '\n' : ' ');
  }
  return out;
}

// Abbreviations whose final period never ends a sentence.
constexpr std::array<std::string_view, 12> kAbbreviations = {
    "i.e.", "e.g.", "etc.", "mr.", "ms.", "mrs.", "dr.", "no.", "u.s.", "u.k.", "vs.", "v."};

bool is_abbreviation(std::string_view line, std::size_t period) {
  std::size_t b = period;
  while (b > 0 && !text::is_space(line[b - 1])) --b;
  auto token = line.substr(b, period + 1 - b);
  while (!token.empty() && (token.front() == '(' || token.front() == '"' ||
                            token.front() == '\'' || token.front() == '[')) {
    token.remove_prefix(1);
  }
  const auto lower = text::to_lower_ascii(token);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Returns the end of the sentence if the terminator at `i` closes one.
std::optional<std::size_t> boundary_after(std::string_view line, std::size_t i,
                                          const SegmenterOptions& opts) {
  const char c = line[i];
  const bool semicolon = c == ';';
  if (!(c == '.' || c == '!' || c == '?' || (semicolon && opts.split_on_semicolon))) {
    return std::nullopt;
  }
  std::size_t end = i + 1;
  while (end < line.size() && is_closer(line[end])) ++end;
  if (end == line.size()) return end;
  if (!text::is_space(line[end])) return std::nullopt;
  std::size_t next = end;
  while (next < line.size() && text::is_space(line[next])) ++next;
  if (next == line.size()) return end;
  if (semicolon) return end;

  std::size_t head = next;
  while (head < line.size() && is_opener(line[head])) ++head;
  if (head == line.size() || !is_upper(line[head])) return std::nullopt;
  if (c == '.' && is_abbreviation(line, i)) return std::nullopt;
  return end;
}

}  // namespace

bool contains_markup(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<' && tag_end(s, i)) return true;
  }
  return false;
}

std::string strip_markup(std::string_view body) {
  std::string cur = decode_entities(body);
  // Removing one tag can splice a new one together ("<<b>p>"), so iterate.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = remove_tags(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return collapse_whitespace(cur);
}

SegmentedDocument segment(std::string_view text, const SegmenterOptions& opts,
                          std::string source_id) {
  SegmentedDocument doc;
  doc.source_id = std::move(source_id);
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && text::is_space(text[b])) ++b;
    while (e > b && text::is_space(text[e - 1])) --e;
    if (e > b) {
      doc.sentences.push_back(
          {doc.sentences.size(), std::string(text.substr(b, e - b)), b, e});
    }
  };

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const auto line = text.substr(line_start, line_end - line_start);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (auto end = boundary_after(line, i, opts)) {
        emit(line_start + pos, line_start + *end);
        pos = *end;
        i = *end - 1;
      }
    }
    emit(line_start + pos, line_end);
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return doc;
}

SegmentedDocument segment_document(const RawDocument& doc, const SegmenterOptions& opts) {
  return segment(strip_markup(doc.body), opts, doc.source_id);
}

Truncation truncate(std::string_view sentence, std::size_t max_units, TruncationUnit unit) {
  if (max_units < 1) throw std::invalid_argument("truncate: max_units must be >= 1");
  if (unit == TruncationUnit::Characters) {
    const auto cut = text::codepoint_prefix_bytes(sentence, max_units);
    return {std::string(sentence.substr(0, cut)), cut < sentence.size()};
  }
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && text::is_space(sentence[i])) ++i;
    if (i == sentence.size()) break;
    while (i < sentence.size() && !text::is_space(sentence[i])) ++i;
    if (++words == max_units) {
      std::size_t rest = i;
      while (rest < sentence.size() && text::is_space(sentence[rest])) ++rest;
      if (rest == sentence.size()) break;
      return {std::string(sentence.substr(0, i)), true};
    }
  }
  return {std::string(sentence), false};
}

nlohmann::json to_json(const SegmentedDocument& d) {
  nlohmann::json sents = nlohmann::json::array();
  for (const auto& s : d.sentences) {
    sents.push_back({{"index", s.index}, {"text", s.text}, {"start", s.start}, {"end", s.end}});
  }
  return {{"source_id", d.source_id}, {"segmenter", kSegmenterVersion}, {"sentences", sents}};
}

SegmentedDocument segmented_document_from_json(const nlohmann::json& j) {
  SegmentedDocument d;
  d.source_id = j.value("source_id", std::string());
  for (const auto& s : j.at("sentences")) {
    d.sentences.push_back({s.at("index").get<std::size_t>(), s.at("text").get<std::string>(),
                           s.value("start", std::size_t{0}), s.value("end", std::size_t{0})});
  }
  return d;
}

}  // namespace tcsi
