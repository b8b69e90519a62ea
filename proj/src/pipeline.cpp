// SPDX-License-Identifier: Apache-2.0
#include "tcsi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tcsi/text.hpp"

namespace tcsi {

using nlohmann::json;

// ---------------------------------------------------------------------------
// TopicSelection

TopicSelection TopicSelection::all() { return TopicSelection{}; }

TopicSelection TopicSelection::of(std::vector<DataPracticeCategory> topics) {
  if (topics.empty()) throw std::invalid_argument("topic selection is empty");
  std::set<DataPracticeCategory> seen;
  for (auto t : topics) {
    if (!seen.insert(t).second) {
      throw std::invalid_argument("topic selected twice: " + std::string(enum_name(t)));
    }
  }
  TopicSelection s;
  s.all_ = false;
  s.topics_ = std::move(topics);
  return s;
}

TopicSelection TopicSelection::parse(std::string_view spec) {
  const auto trimmed = text::trim(spec);
  if (text::to_lower_ascii(trimmed) == "all") return all();
  std::vector<DataPracticeCategory> topics;
  std::size_t start = 0;
  while (start <= trimmed.size()) {
    const auto comma = trimmed.find(',', start);
    const auto part = text::trim(trimmed.substr(start, comma == std::string_view::npos ? comma : comma - start));
    auto c = parse_category(part);
    if (!c) throw std::invalid_argument("unknown topic '" + std::string(part) + "'");
    topics.push_back(*c);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return of(std::move(topics));
}

bool TopicSelection::contains(DataPracticeCategory c) const {
  return all_ || std::find(topics_.begin(), topics_.end(), c) != topics_.end();
}

std::vector<DataPracticeCategory> TopicSelection::ordered() const {
  if (all_) return {kAllCategories.begin(), kAllCategories.end()};
  return topics_;
}

std::string TopicSelection::to_string() const {
  if (all_) return "ALL";
  std::string out;
  for (auto t : topics_) {
    if (!out.empty()) out += ",";
    out += enum_name(t);
  }
  return out;
}

std::size_t Summary::item_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.items.size();
  return n;
}

// ---------------------------------------------------------------------------
// summarize

std::vector<PipelineSentence> pipeline_sentences(const Document& doc) {
  std::vector<PipelineSentence> out;
  for (const auto& s : doc.sentences) out.push_back({s.id, s.text});
  return out;
}

std::vector<PipelineSentence> pipeline_sentences(const SegmentedDocument& doc) {
  std::vector<PipelineSentence> out;
  for (const auto& s : doc.sentences) out.push_back({doc.source_id + "#" + std::to_string(s.index), s.text});
  return out;
}

namespace {

struct Outcome {
  std::optional<DataPracticeCategory> topic;
  SummaryItem item;
};

// Heads run lazily in the order of the gating cascade: nothing past
// Importance for gated-out sentences, nothing past Topic for unselected ones.
std::optional<Outcome> process(const PipelineSentence& s, std::size_t index, const TopicSelection& sel,
                               ExpertBackend& backend, const Capabilities& caps, const SummarizeOptions& opts) {
  const auto cut = truncate(s.text, opts.max_input_words);
  const auto fv = backend.encode(cut.text);
  const auto imp = backend.classify(Task::Importance, fv);
  if (!imp.positive) return std::nullopt;
  const auto top = backend.classify(Task::Topic, fv);
  const auto topic = *top.topic;
  if (!sel.contains(topic)) return std::nullopt;
  const double topic_p = top.confidence();
  if (imp.probability < opts.min_confidence || topic_p < opts.min_confidence) return std::nullopt;

  Outcome o;
  o.topic = topic;
  auto& it = o.item;
  const auto risk = backend.classify(Task::Risk, fv);
  const auto sens = backend.classify(Task::Sensitivity, fv);
  it.risk = risk.positive;
  it.sensitive = sens.positive;
  it.highlighted = it.risk || it.sensitive;
  it.source_id = s.id;
  it.sentence_index = index;
  it.original = s.text;
  it.input_truncated = cut.truncated;
  it.scores = {imp.probability, topic_p, risk.probability, sens.probability};
  it.text = caps.rewrite == RewriteForm::None ? s.text : backend.rewrite(fv, cut.text).text;
  return o;
}

}  // namespace

Summary summarize(const std::string& source_id, const std::vector<PipelineSentence>& sentences,
                  const TopicSelection& sel, ExpertBackend& backend, const SummarizeOptions& opts) {
  const auto caps = backend.capabilities();
  if (!caps.all_classifiers()) {
    throw ExpertError(ExpertError::Kind::BackendUnavailable,
                      backend.tag() + " lacks one of the four classification heads");
  }

  const std::size_t n = sentences.size();
  std::vector<std::optional<Outcome>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t workers = std::max<std::size_t>(1, opts.workers);
  if (!caps.thread_safe) workers = 1;
  workers = std::min(workers, std::max<std::size_t>(1, n));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = process(sentences[i], i, sel, backend, caps, opts);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Summary summary;
  summary.source_id = source_id;
  summary.provenance = {backend.tag(), std::string(kSegmenterVersion), backend.thresholds(), sel.to_string(),
                        opts.max_input_words};
  for (auto topic : sel.ordered()) {
    SummarySection section{topic, std::string(section_title(topic)), {}};
    for (auto& r : results) {
      if (r && r->topic == topic) section.items.push_back(r->item);
    }
    if (!section.items.empty() || opts.keep_empty_sections) summary.sections.push_back(std::move(section));
  }
  return summary;
}

Summary summarize(const SegmentedDocument& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts) {
  return summarize(doc.source_id, pipeline_sentences(doc), sel, backend, opts);
}

Summary summarize(const RawDocument& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts) {
  return summarize(segment_document(doc, opts.segmenter), sel, backend, opts);
}

Summary summarize(const Document& doc, const TopicSelection& sel, ExpertBackend& backend,
                  const SummarizeOptions& opts) {
  return summarize(doc.doc_id, pipeline_sentences(doc), sel, backend, opts);
}

// ---------------------------------------------------------------------------
// Rendering

std::optional<RenderFormat> parse_render_format(std::string_view s) {
  const auto l = text::to_lower_ascii(s);
  if (l == "json") return RenderFormat::Json;
  if (l == "markdown" || l == "md") return RenderFormat::Markdown;
  if (l == "html") return RenderFormat::Html;
  return std::nullopt;
}

namespace {

json thresholds_json(const Thresholds& t) {
  return {{"importance", t.importance},
          {"risk", t.risk},
          {"sensitivity", t.sensitivity},
          {"multi_label_topics", t.multi_label_topics},
          {"topic", t.topic}};
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string provenance_line(const Provenance& p) {
  return "backend " + p.backend_tag + "; segmenter " + p.segmenter_version + "; topics " + p.selection +
         "; thresholds importance=" + number(p.thresholds.importance) + " risk=" + number(p.thresholds.risk) +
         " sensitivity=" + number(p.thresholds.sensitivity) + "; max input words " +
         std::to_string(p.max_input_words);
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr std::string_view kWarn = "\xE2\x9A\xA0";  // U+26A0

std::string render_markdown(const Summary& s) {
  if (s.sections.empty()) return "";
  std::ostringstream out;
  for (const auto& sec : s.sections) {
    out << "## " << sec.title << "\n\n";
    for (const auto& it : sec.items) {
      if (it.highlighted) {
        out << "- " << kWarn << " **" << it.text << "**\n";
      } else {
        out << "- " << it.text << "\n";
      }
    }
    out << "\n";
  }
  out << "---\n\n_" << provenance_line(s.provenance) << "_\n";
  return out.str();
}

std::string render_html(const Summary& s) {
  if (s.sections.empty()) return "";
  std::ostringstream out;
  out << "<div class=\"tcsi-summary\">\n";
  for (const auto& sec : s.sections) {
    out << "<section data-topic=\"" << enum_name(sec.topic) << "\">\n<h2>" << html_escape(sec.title)
        << "</h2>\n<ul>\n";
    for (const auto& it : sec.items) {
      if (it.highlighted) {
        out << "<li class=\"highlight\">" << kWarn << " <strong>" << html_escape(it.text) << "</strong></li>\n";
      } else {
        out << "<li>" << html_escape(it.text) << "</li>\n";
      }
    }
    out << "</ul>\n</section>\n";
  }
  out << "<footer class=\"provenance\">" << html_escape(provenance_line(s.provenance)) << "</footer>\n</div>\n";
  return out.str();
}

}  // namespace

json to_json(const Summary& s) {
  json sections = json::array();
  for (const auto& sec : s.sections) {
    json items = json::array();
    for (const auto& it : sec.items) {
      items.push_back({{"text", it.text},
                       {"highlighted", it.highlighted},
                       {"risk", it.risk},
                       {"sensitive", it.sensitive},
                       {"source_id", it.source_id},
                       {"sentence_index", it.sentence_index},
                       {"original", it.original},
                       {"input_truncated", it.input_truncated},
                       {"scores",
                        {{"importance", it.scores.importance},
                         {"topic", it.scores.topic},
                         {"risk", it.scores.risk},
                         {"sensitivity", it.scores.sensitivity}}}});
    }
    sections.push_back({{"topic", enum_name(sec.topic)}, {"title", sec.title}, {"items", items}});
  }
  const auto& p = s.provenance;
  return {{"source_id", s.source_id},
          {"sections", sections},
          {"provenance",
           {{"backend", p.backend_tag},
            {"segmenter", p.segmenter_version},
            {"thresholds", thresholds_json(p.thresholds)},
            {"selection", p.selection},
            {"max_input_words", p.max_input_words}}}};
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.source_id = j.at("source_id").get<std::string>();
  for (const auto& sj : j.at("sections")) {
    SummarySection sec;
    const auto name = sj.at("topic").get<std::string>();
    auto c = parse_category(name);
    if (!c) throw std::invalid_argument("unknown topic '" + name + "'");
    sec.topic = *c;
    sec.title = sj.at("title").get<std::string>();
    for (const auto& ij : sj.at("items")) {
      SummaryItem it;
      it.text = ij.at("text").get<std::string>();
      it.highlighted = ij.at("highlighted").get<bool>();
      it.risk = ij.at("risk").get<bool>();
      it.sensitive = ij.at("sensitive").get<bool>();
      if (it.highlighted != (it.risk || it.sensitive)) {
        throw std::invalid_argument("highlighted must equal risk or sensitive");
      }
      it.source_id = ij.at("source_id").get<std::string>();
      it.sentence_index = ij.at("sentence_index").get<std::size_t>();
      it.original = ij.at("original").get<std::string>();
      it.input_truncated = ij.at("input_truncated").get<bool>();
      const auto& sc = ij.at("scores");
      it.scores = {sc.at("importance").get<double>(), sc.at("topic").get<double>(), sc.at("risk").get<double>(),
                   sc.at("sensitivity").get<double>()};
      sec.items.push_back(std::move(it));
    }
    s.sections.push_back(std::move(sec));
  }
  const auto& p = j.at("provenance");
  s.provenance.backend_tag = p.at("backend").get<std::string>();
  s.provenance.segmenter_version = p.at("segmenter").get<std::string>();
  s.provenance.selection = p.at("selection").get<std::string>();
  s.provenance.max_input_words = p.at("max_input_words").get<std::size_t>();
  const auto& t = p.at("thresholds");
  s.provenance.thresholds.importance = t.at("importance").get<double>();
  s.provenance.thresholds.risk = t.at("risk").get<double>();
  s.provenance.thresholds.sensitivity = t.at("sensitivity").get<double>();
  s.provenance.thresholds.multi_label_topics = t.at("multi_label_topics").get<bool>();
  s.provenance.thresholds.topic = t.at("topic").get<double>();
  return s;
}

std::string render(const Summary& s, RenderFormat format) {
  switch (format) {
    case RenderFormat::Json: return to_json(s).dump(2) + "\n";
    case RenderFormat::Markdown: return render_markdown(s);
    case RenderFormat::Html: return render_html(s);
  }
  return {};
}

}  // namespace tcsi
