// SPDX-License-Identifier: Apache-2.0
#include "tcsi/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tcsi/hash.hpp"
#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

namespace tcsi {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Model

bool AnnotationSet::has_topic(DataPracticeCategory c) const {
  return std::find(topics.begin(), topics.end(), c) != topics.end();
}

std::optional<DataPracticeCategory> AnnotationSet::primary_topic() const {
  for (auto c : kClassifiableTopics) {
    if (has_topic(c)) return c;
  }
  return std::nullopt;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

const Sentence* Corpus::find(std::string_view sentence_id) const {
  for (const auto& d : documents) {
    for (const auto& s : d.sentences) {
      if (s.id == sentence_id) return &s;
    }
  }
  return nullptr;
}

std::vector<const Sentence*> Corpus::sentences() const {
  std::vector<const Sentence*> out;
  out.reserve(sentence_count());
  for (const auto& d : documents) {
    for (const auto& s : d.sentences) out.push_back(&s);
  }
  return out;
}

CorpusError::CorpusError(Kind kind, std::string path, const std::string& reason)
    : std::runtime_error(std::string(error_kind_name(kind)) +
                         (path.empty() ? std::string() : " at " + path) + ": " + reason),
      kind_(kind),
      path_(std::move(path)) {}

std::string_view error_kind_name(CorpusError::Kind k) {
  switch (k) {
    case CorpusError::Kind::MalformedJson: return "MalformedJson";
    case CorpusError::Kind::SchemaViolation: return "SchemaViolation";
    case CorpusError::Kind::DuplicateId: return "DuplicateId";
    case CorpusError::Kind::BadRatios: return "BadRatios";
    case CorpusError::Kind::EmptyCorpus: return "EmptyCorpus";
  }
  return "CorpusError";
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

const std::set<std::string> kSentenceKeys = {"id",        "index",  "text",     "topics",
                                             "important", "risk",   "sensitive", "rewritten"};
const std::set<std::string> kDocumentKeys = {"doc_id", "title", "sentences"};
const std::set<std::string> kCorpusKeys = {"version", "documents"};

[[noreturn]] void schema_error(const std::string& path, const std::string& reason) {
  throw CorpusError(CorpusError::Kind::SchemaViolation, path, reason);
}

json extras_of(const json& obj, const std::set<std::string>& known) {
  json extras = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) extras[it.key()] = it.value();
  }
  return extras;
}

std::string id_field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing required field '") + key + "'");
  if (it->is_string()) {
    if (it->get<std::string>().empty()) schema_error(path + "/" + key, "empty identifier");
    return it->get<std::string>();
  }
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  schema_error(path + "/" + key, "identifier must be a string or integer");
}

bool bool_field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return false;
  if (!it->is_boolean()) schema_error(path + "/" + key, "expected boolean");
  return it->get<bool>();
}

Sentence parse_sentence(const json& js, const std::string& doc_id, const std::string& path) {
  if (!js.is_object()) schema_error(path, "sentence must be an object");
  Sentence s;
  s.id = id_field(js, "id", path);
  s.doc_id = doc_id;

  auto idx = js.find("index");
  if (idx == js.end()) schema_error(path, "missing required field 'index'");
  if (!idx->is_number_integer() || idx->get<std::int64_t>() < 0)
    schema_error(path + "/index", "expected non-negative integer");
  s.index = idx->get<std::size_t>();

  auto txt = js.find("text");
  if (txt == js.end() || !txt->is_string()) schema_error(path + "/text", "expected string");
  s.text = txt->get<std::string>();

  if (auto tp = js.find("topics"); tp != js.end() && !tp->is_null()) {
    if (!tp->is_array()) schema_error(path + "/topics", "expected array of strings");
    for (std::size_t i = 0; i < tp->size(); ++i) {
      const auto& t = (*tp)[i];
      const std::string tpath = path + "/topics/" + std::to_string(i);
      if (!t.is_string()) schema_error(tpath, "expected string");
      auto cat = parse_category(t.get<std::string>());
      if (!cat) schema_error(tpath, "unknown data practice category '" + t.get<std::string>() + "'");
      if (s.annotations.has_topic(*cat)) schema_error(tpath, "duplicate topic");
      s.annotations.topics.push_back(*cat);
    }
  }
  s.annotations.important = bool_field(js, "important", path);
  s.annotations.risk = bool_field(js, "risk", path);
  s.annotations.sensitive = bool_field(js, "sensitive", path);
  if (auto rw = js.find("rewritten"); rw != js.end() && !rw->is_null()) {
    if (!rw->is_string()) schema_error(path + "/rewritten", "expected string or null");
    s.annotations.rewritten = rw->get<std::string>();
  }
  s.extras = extras_of(js, kSentenceKeys);
  return s;
}

}  // namespace

Corpus parse_corpus(std::string_view raw, const ParseOptions& opts) {
  json root;
  try {
    root = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw CorpusError(CorpusError::Kind::MalformedJson, "", e.what());
  }
  if (!root.is_object()) schema_error("", "top level must be an object");

  Corpus c;
  if (auto v = root.find("version"); v != root.end()) {
    if (!v->is_string()) schema_error("/version", "expected string");
    c.version = v->get<std::string>();
  }
  auto docs = root.find("documents");
  if (docs == root.end() || !docs->is_array()) schema_error("/documents", "expected array");
  c.extras = extras_of(root, kCorpusKeys);

  std::unordered_set<std::string> doc_ids;
  std::unordered_set<std::string> sentence_ids;
  for (std::size_t d = 0; d < docs->size(); ++d) {
    const auto& jd = (*docs)[d];
    const std::string dpath = "/documents/" + std::to_string(d);
    if (!jd.is_object()) schema_error(dpath, "document must be an object");
    Document doc;
    doc.doc_id = id_field(jd, "doc_id", dpath);
    if (!doc_ids.insert(doc.doc_id).second)
      throw CorpusError(CorpusError::Kind::DuplicateId, dpath + "/doc_id",
                        "duplicate doc_id '" + doc.doc_id + "'");
    if (auto t = jd.find("title"); t != jd.end() && !t->is_null()) {
      if (!t->is_string()) schema_error(dpath + "/title", "expected string");
      doc.title = t->get<std::string>();
    }
    auto sents = jd.find("sentences");
    if (sents == jd.end() || !sents->is_array()) schema_error(dpath + "/sentences", "expected array");
    for (std::size_t i = 0; i < sents->size(); ++i) {
      const std::string spath = dpath + "/sentences/" + std::to_string(i);
      Sentence s = parse_sentence((*sents)[i], doc.doc_id, spath);
      if (!sentence_ids.insert(s.id).second)
        throw CorpusError(CorpusError::Kind::DuplicateId, spath + "/id",
                          "duplicate sentence id '" + s.id + "'");
      doc.sentences.push_back(std::move(s));
    }
    doc.extras = extras_of(jd, kDocumentKeys);
    c.documents.push_back(std::move(doc));
  }

  if (opts.skip_validation) return c;
  auto report = validate(c, opts);
  for (const auto& v : report.violations) {
    if (v.severity != Violation::Severity::Error) continue;
    std::string path = "/documents/" + v.doc_id;
    if (!v.sentence_id.empty()) path += "/sentences/" + v.sentence_id;
    schema_error(path, v.rule + ": " + v.message);
  }
  return c;
}

Corpus load_corpus(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), opts);
}

json corpus_to_json(const Corpus& c) {
  json root = c.extras.is_object() ? c.extras : json::object();
  root["version"] = c.version;
  json docs = json::array();
  for (const auto& d : c.documents) {
    json jd = d.extras.is_object() ? d.extras : json::object();
    jd["doc_id"] = d.doc_id;
    jd["title"] = d.title;
    json sents = json::array();
    for (const auto& s : d.sentences) {
      json js = s.extras.is_object() ? s.extras : json::object();
      js["id"] = s.id;
      js["index"] = s.index;
      js["text"] = s.text;
      json topics = json::array();
      for (auto t : s.annotations.topics) topics.push_back(std::string(display_name(t)));
      js["topics"] = std::move(topics);
      js["important"] = s.annotations.important;
      js["risk"] = s.annotations.risk;
      js["sensitive"] = s.annotations.sensitive;
      if (s.annotations.rewritten) js["rewritten"] = *s.annotations.rewritten;
      sents.push_back(std::move(js));
    }
    jd["sentences"] = std::move(sents);
    docs.push_back(std::move(jd));
  }
  root["documents"] = std::move(docs);
  return root;
}

std::string serialize_corpus(const Corpus& c, int indent) { return corpus_to_json(c).dump(indent); }

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(),
                    [](const Violation& v) { return v.severity == Violation::Severity::Error; }));
}

ValidationReport validate(const Corpus& c, const ParseOptions& opts) {
  ValidationReport r;
  const auto implication =
      opts.lenient ? Violation::Severity::Warning : Violation::Severity::Error;
  auto add = [&](const Document& d, const Sentence* s, std::string rule, std::string msg,
                 Violation::Severity sev = Violation::Severity::Error) {
    r.violations.push_back({d.doc_id, s ? s->id : std::string(), std::move(rule), std::move(msg), sev});
  };

  std::unordered_set<std::string> doc_ids;
  std::unordered_set<std::string> sentence_ids;
  for (const auto& d : c.documents) {
    if (!doc_ids.insert(d.doc_id).second) add(d, nullptr, "duplicate-doc-id", "doc_id repeated");
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const auto& s = d.sentences[i];
      const auto& a = s.annotations;
      if (!sentence_ids.insert(s.id).second) add(d, &s, "duplicate-id", "sentence id repeated");
      if (s.doc_id != d.doc_id)
        add(d, &s, "doc-id-mismatch", "sentence doc_id '" + s.doc_id + "' differs from parent");
      if (s.index != i) {
        add(d, &s, "index-gap",
            "expected index " + std::to_string(i) + ", found " + std::to_string(s.index));
      }
      if (text::trim(s.text).empty()) add(d, &s, "empty-text", "sentence text is empty");
      if (contains_markup(s.text)) add(d, &s, "markup", "sentence text contains a markup tag");
      std::set<DataPracticeCategory> seen(a.topics.begin(), a.topics.end());
      if (seen.size() != a.topics.size()) add(d, &s, "duplicate-topic", "topic listed twice");
      if (a.risk && !a.important)
        add(d, &s, "risk-without-important", "risk=true requires important=true", implication);
      if (a.sensitive && !a.important)
        add(d, &s, "sensitive-without-important", "sensitive=true requires important=true",
            implication);
      if (a.rewritten) {
        if (!a.important)
          add(d, &s, "rewritten-without-important", "rewritten form requires important=true",
              implication);
        if (text::trim(*a.rewritten).empty())
          add(d, &s, "empty-rewritten", "rewritten form is empty");
      }
    }
  }
  return r;
}

json to_json(const ValidationReport& r) {
  json out;
  out["ok"] = r.ok();
  out["error_count"] = r.error_count();
  json list = json::array();
  for (const auto& v : r.violations) {
    list.push_back({{"doc_id", v.doc_id},
                    {"sentence_id", v.sentence_id},
                    {"rule", v.rule},
                    {"message", v.message},
                    {"severity", v.severity == Violation::Severity::Error ? "error" : "warning"}});
  }
  out["violations"] = std::move(list);
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

std::string_view part_name(SplitPart p) {
  switch (p) {
    case SplitPart::Train: return "train";
    case SplitPart::Validation: return "validation";
    case SplitPart::Test: return "test";
  }
  return "?";
}

bool eligible_for(Task t, const Sentence& s) {
  switch (t) {
    case Task::Importance: return true;
    case Task::Topic:
    case Task::Risk:
    case Task::Sensitivity: return s.annotations.important;
    case Task::Rewrite: return s.annotations.rewritten.has_value();
  }
  return false;
}

std::size_t SplitAssignment::size(SplitPart p) const {
  return static_cast<std::size_t>(std::count_if(
      parts.begin(), parts.end(), [p](const auto& kv) { return kv.second == p; }));
}

std::vector<std::string> SplitAssignment::ids(SplitPart p) const {
  std::vector<std::string> out;
  for (const auto& [id, part] : parts) {
    if (part == p) out.push_back(id);
  }
  return out;
}

namespace {

void check_ratios(const SplitRatios& r) {
  for (double x : {r.train, r.validation, r.test}) {
    if (!std::isfinite(x) || x < 0.0)
      throw CorpusError(CorpusError::Kind::BadRatios, "", "ratios must be finite and non-negative");
  }
  const double sum = r.train + r.validation + r.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "ratios must sum to 1 (got " << std::setprecision(12) << sum << ")";
    throw CorpusError(CorpusError::Kind::BadRatios, "", os.str());
  }
}

std::uint64_t rank_key(std::uint64_t seed, std::string_view id) {
  return hash::splitmix64(seed ^ hash::fnv1a64(id));
}

}  // namespace

std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& r) {
  check_ratios(r);
  const std::array<double, 3> ratios = {r.train, r.validation, r.test};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratios[i] * static_cast<double>(n);
    // Absorb representation error such as 0.3 * 10 = 2.9999999999999996.
    const double base = std::floor(quota + 1e-9);
    sizes[i] = static_cast<std::size_t>(base);
    remainders[i] = std::max(0.0, quota - base);
    assigned += sizes[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best] + 1e-12) best = i;
    }
    ++sizes[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  while (assigned > n) {  // only reachable through the epsilon above
    for (std::size_t i = 3; i-- > 0;) {
      if (sizes[i] > 0) {
        --sizes[i];
        --assigned;
        break;
      }
    }
  }
  return sizes;
}

SplitAssignment split(const Corpus& c, Task population, const SplitRatios& ratios,
                      std::uint64_t seed, SplitUnit unit) {
  check_ratios(ratios);
  if (c.sentence_count() == 0) throw CorpusError(CorpusError::Kind::EmptyCorpus, "", "no sentences");

  SplitAssignment out;
  out.population = population;
  out.seed = seed;
  out.ratios = ratios;
  out.unit = unit;

  // A unit is a sentence or a whole document; each holds its eligible sentence ids.
  struct Unit {
    std::uint64_t key;
    std::string name;
    std::vector<std::string> members;
  };
  std::vector<Unit> units;
  for (const auto& d : c.documents) {
    if (unit == SplitUnit::Document) {
      Unit u{rank_key(seed, d.doc_id), d.doc_id, {}};
      for (const auto& s : d.sentences) {
        if (eligible_for(population, s)) u.members.push_back(s.id);
      }
      if (!u.members.empty()) units.push_back(std::move(u));
    } else {
      for (const auto& s : d.sentences) {
        if (eligible_for(population, s)) units.push_back({rank_key(seed, s.id), s.id, {s.id}});
      }
    }
  }
  std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
    return a.key != b.key ? a.key < b.key : a.name < b.name;
  });

  const auto sizes = apportion(units.size(), ratios);
  std::size_t pos = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t k = 0; k < sizes[p]; ++k, ++pos) {
      for (const auto& id : units[pos].members) out.parts[id] = static_cast<SplitPart>(p);
    }
  }
  return out;
}

SplitPlan split_all(const Corpus& c, const SplitRatios& ratios, std::uint64_t seed, SplitUnit unit) {
  SplitPlan plan;
  for (auto t : {Task::Importance, Task::Topic, Task::Risk, Task::Sensitivity, Task::Rewrite}) {
    plan.emplace(t, split(c, t, ratios, seed, unit));
  }
  return plan;
}

json to_json(const SplitPlan& plan) {
  json out = json::object();
  json tasks = json::object();
  for (const auto& [task, a] : plan) {
    json jt;
    jt["seed"] = a.seed;
    jt["ratios"] = {a.ratios.train, a.ratios.validation, a.ratios.test};
    jt["unit"] = a.unit == SplitUnit::Sentence ? "sentence" : "document";
    for (auto p : {SplitPart::Train, SplitPart::Validation, SplitPart::Test}) {
      jt[std::string(part_name(p))] = a.ids(p);
    }
    tasks[std::string(task_name(task))] = std::move(jt);
    out["seed"] = a.seed;
  }
  out["tasks"] = std::move(tasks);
  return out;
}

SplitPlan split_plan_from_json(const json& j) {
  SplitPlan plan;
  const auto& tasks = j.at("tasks");
  for (auto it = tasks.begin(); it != tasks.end(); ++it) {
    auto task = parse_task(it.key());
    if (!task) schema_error("/tasks/" + it.key(), "unknown task");
    SplitAssignment a;
    a.population = *task;
    const auto& jt = it.value();
    a.seed = jt.value("seed", std::uint64_t{0});
    if (auto r = jt.find("ratios"); r != jt.end() && r->is_array() && r->size() == 3) {
      a.ratios = {(*r)[0].get<double>(), (*r)[1].get<double>(), (*r)[2].get<double>()};
    }
    a.unit = jt.value("unit", std::string("sentence")) == "document" ? SplitUnit::Document
                                                                      : SplitUnit::Sentence;
    for (auto p : {SplitPart::Train, SplitPart::Validation, SplitPart::Test}) {
      if (auto ids = jt.find(std::string(part_name(p))); ids != jt.end()) {
        for (const auto& id : *ids) a.parts[id.get<std::string>()] = p;
      }
    }
    plan.emplace(*task, std::move(a));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Statistics

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

const LabelStats* CorpusStats::find(std::string_view label) const {
  for (const auto& l : labels) {
    if (l.label == label) return &l;
  }
  return nullptr;
}

CorpusStats compute_stats(const Corpus& c) {
  const std::size_t total = c.sentence_count();
  if (total == 0) throw CorpusError(CorpusError::Kind::EmptyCorpus, "", "no sentences");

  // 11 categories, then the three markings.
  std::vector<std::vector<double>> lengths(kCategoryCount + 3);
  CorpusStats st;
  st.total_sentences = total;
  double rewritten_words = 0.0, original_words = 0.0;
  for (const auto& d : c.documents) {
    for (const auto& s : d.sentences) {
      const auto& a = s.annotations;
      const double len = static_cast<double>(text::word_count(s.text));
      for (auto t : a.topics) lengths[static_cast<std::size_t>(t)].push_back(len);
      if (a.important) lengths[kCategoryCount].push_back(len);
      if (a.risk) lengths[kCategoryCount + 1].push_back(len);
      if (a.sensitive) lengths[kCategoryCount + 2].push_back(len);
      st.annotation_count += a.topics.size() + (a.important ? 1 : 0) + (a.risk ? 1 : 0) +
                             (a.sensitive ? 1 : 0);
      if (a.rewritten) {
        ++st.rewritten_count;
        rewritten_words += static_cast<double>(text::word_count(*a.rewritten));
        original_words += len;
      }
    }
  }
  if (st.rewritten_count > 0) {
    st.mean_rewritten_length = rewritten_words / static_cast<double>(st.rewritten_count);
    st.mean_original_length_of_rewritten = original_words / static_cast<double>(st.rewritten_count);
  }

  auto row = [&](std::string label, const std::vector<double>& lens) {
    LabelStats l;
    l.label = std::move(label);
    l.count = lens.size();
    l.pct = static_cast<double>(l.count) / static_cast<double>(total) * 100.0;
    l.median_length = median(lens);
    l.mean_length =
        lens.empty() ? 0.0 : std::accumulate(lens.begin(), lens.end(), 0.0) / static_cast<double>(lens.size());
    st.labels.push_back(std::move(l));
  };
  for (auto cat : kAllCategories) row(std::string(short_name(cat)), lengths[static_cast<std::size_t>(cat)]);
  row("Important", lengths[kCategoryCount]);
  row("Risk", lengths[kCategoryCount + 1]);
  row("Sensitivity", lengths[kCategoryCount + 2]);
  return st;
}

json to_json(const CorpusStats& s) {
  json out;
  json rows = json::array();
  for (const auto& l : s.labels) {
    rows.push_back({{"label", l.label},
                    {"count", l.count},
                    {"pct", l.pct},
                    {"median_length", l.median_length},
                    {"mean_length", l.mean_length}});
  }
  out["labels"] = std::move(rows);
  out["total_sentences"] = s.total_sentences;
  out["annotation_count"] = s.annotation_count;
  out["rewritten_count"] = s.rewritten_count;
  out["rewrite_compression"] = {
      {"mean_rewritten_length", s.mean_rewritten_length},
      {"mean_original_length", s.mean_original_length_of_rewritten},
      {"reduction",
       s.mean_original_length_of_rewritten > 0
           ? 1.0 - s.mean_rewritten_length / s.mean_original_length_of_rewritten
           : 0.0}};
  out["metadata"] = {{"pct_base", "all_sentences"}, {"length_unit", "whitespace_words"}};
  return out;
}

std::string format_stats_table(const CorpusStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Topic" << std::right << std::setw(8) << "Num"
     << std::setw(9) << "Pct" << std::setw(8) << "Med." << std::setw(8) << "Avg." << '\n';
  os << std::string(45, '-') << '\n';
  os << std::fixed;
  for (const auto& l : s.labels) {
    std::ostringstream pct;
    pct << std::fixed << std::setprecision(2) << l.pct << '%';
    os << std::left << std::setw(12) << l.label << std::right << std::setw(8) << l.count
       << std::setw(9) << pct.str() << std::setprecision(1) << std::setw(8) << l.median_length
       << std::setw(8) << l.mean_length << '\n';
  }
  os << std::string(45, '-') << '\n';
  os << "sentences: " << s.total_sentences << "  annotations: " << s.annotation_count
     << "  rewritten: " << s.rewritten_count << '\n';
  if (s.rewritten_count > 0) {
    os << std::setprecision(1) << "rewritten length: " << s.mean_rewritten_length
       << " words vs " << s.mean_original_length_of_rewritten << " original\n";
  }
  os << "pct base: all sentences\n";
  return os.str();
}

}  // namespace tcsi
