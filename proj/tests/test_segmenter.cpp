#include <doctest.h>

#include <string>
#include <vector>

#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

using namespace tcsi;

namespace {

std::vector<std::string> texts(std::string_view s, SegmenterOptions opts = {}) {
  std::vector<std::string> out;
  for (const auto& span : segment(s, opts).sentences) out.push_back(span.text);
  return out;
}

}  // namespace

TEST_CASE("markup removal") {
  CHECK(strip_markup("<p>Hello</p>") == "Hello");
  CHECK(strip_markup("a &amp; b") == "a & b");
  CHECK(strip_markup("x <b>y</b>\n\nz &#65;") == "x y\nz A");
  // A stray "<" stays literal. Escaped tags are decoded before removal, so
  // they cannot survive as markup in the output.
  CHECK(strip_markup("1 < 2 and &lt;tag&gt;") == "1 < 2 and");
  CHECK(strip_markup("if a < b then &lt; c") == "if a < b then < c");
  CHECK(strip_markup("a&nbsp;b &#x42;") == "a b B");
  CHECK(strip_markup("<script>var x = 1;</script>Text") == "Text");
  CHECK(contains_markup("<b>x</b>"));
  CHECK_FALSE(contains_markup("1 < 2"));
}

TEST_CASE("basic splitting") {
  CHECK(texts("We collect data. We share data.") == std::vector<std::string>{"We collect data.", "We share data."});
  CHECK(texts("").empty());
  CHECK(texts("   ").empty());
}

TEST_CASE("abbreviation guard") {
  CHECK(texts("See e.g. Section 2 for details.").size() == 1);
  CHECK(texts("Ask Dr. Smith about the U.S. office. Then leave.").size() == 2);
}

TEST_CASE("dots inside addresses and numbers do not split") {
  const auto s = texts("Contact us at x.y@z.com. Thanks! Done?");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == "Contact us at x.y@z.com.");
  CHECK(s[1] == "Thanks!");
  CHECK(s[2] == "Done?");
  CHECK(texts("Version 2.5 applies. It is new.").size() == 2);
}

TEST_CASE("semicolons split unless disabled") {
  CHECK(texts("We retain data; You may object.").size() == 2);
  SegmenterOptions opts;
  opts.split_on_semicolon = false;
  CHECK(texts("We retain data; You may object.", opts).size() == 1);
}

TEST_CASE("headings on their own line become sentences") {
  const auto s = texts("Data Security\nWe encrypt your data. We audit often.");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == "Data Security");
}

TEST_CASE("spans index into the cleaned text") {
  const std::string t = "First one. Second one! Third?";
  const auto d = segment(t, {}, "doc");
  CHECK(d.source_id == "doc");
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    const auto& s = d.sentences[i];
    CHECK(s.index == i);
    CHECK(t.substr(s.start, s.end - s.start) == s.text);
  }
}

TEST_CASE("segmentation preserves words on single-line text") {
  const std::string t = "We collect data, e.g. names. Mr. Jones (our DPO) reviews it! Is it safe? Yes; we encrypt it.";
  std::size_t words = 0;
  for (const auto& s : texts(t)) words += text::word_count(s);
  CHECK(words == text::word_count(t));
}

TEST_CASE("raw documents with markup") {
  const auto d = segment_document({"p1", "<h2>Usage</h2><p>We use data. We sell nothing.</p>"});
  REQUIRE(d.sentences.size() == 3);
  CHECK(d.sentences[0].text == "Usage");
  const auto round = segmented_document_from_json(to_json(d));
  CHECK(round.sentences.size() == 3);
  CHECK(round.sentences[2].text == "We sell nothing.");
}

TEST_CASE("truncation") {
  CHECK(tcsi::truncate("a b c", 5).text == "a b c");
  CHECK_FALSE(tcsi::truncate("a b c", 5).truncated);
  CHECK(tcsi::truncate("a b c", 2).text == "a b");
  CHECK(tcsi::truncate("a b c", 2).truncated);
  CHECK(tcsi::truncate("café au lait", 4, TruncationUnit::Characters).text == "café");

  std::string long_sentence;
  for (int i = 0; i < 600; ++i) long_sentence += "w" + std::to_string(i) + " ";
  const auto t = tcsi::truncate(long_sentence, 512);
  CHECK(t.truncated);
  CHECK(text::word_count(t.text) == 512);
  CHECK(text::split_whitespace(t.text).back() == "w511");
}
