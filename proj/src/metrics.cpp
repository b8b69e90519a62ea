// SPDX-License-Identifier: Apache-2.0
#include "tcsi/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tcsi/text.hpp"

namespace tcsi {

MetricsError::MetricsError(Kind kind, const std::string& detail)
    : std::invalid_argument(std::string(error_kind_name(kind)) + ": " + detail), kind_(kind) {}

std::string_view error_kind_name(MetricsError::Kind k) {
  switch (k) {
    case MetricsError::Kind::InstanceMismatch: return "InstanceMismatch";
    case MetricsError::Kind::UnknownLabel: return "UnknownLabel";
    case MetricsError::Kind::EmptyAfterTokenization: return "EmptyAfterTokenization";
    case MetricsError::Kind::LengthMismatch: return "LengthMismatch";
    case MetricsError::Kind::EmptyInput: return "EmptyInput";
  }
  return "MetricsError";
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

ClassificationReport finish(const std::vector<std::string>& label_set, const std::vector<Counts>& counts,
                            std::size_t instances, bool multi_label) {
  ClassificationReport r;
  r.instances = instances;
  r.multi_label = multi_label;
  Counts pooled;
  double f1_sum = 0.0;
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    const auto& c = counts[i];
    ClassMetrics m;
    m.label = label_set[i];
    m.support = c.tp + c.fn;
    m.predicted = c.tp + c.fp;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.zero_support = m.support == 0;
    m.f1 = m.zero_support ? 0.0 : harmonic(m.precision, m.recall);
    f1_sum += m.f1;
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    r.classes.push_back(std::move(m));
  }
  r.micro_precision = ratio(pooled.tp, pooled.tp + pooled.fp);
  r.micro_recall = ratio(pooled.tp, pooled.tp + pooled.fn);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  r.macro_f1 = label_set.empty() ? 0.0 : f1_sum / static_cast<double>(label_set.size());
  return r;
}

std::map<std::string, std::size_t> label_positions(const std::vector<std::string>& label_set) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    if (!pos.emplace(label_set[i], i).second) {
      throw MetricsError(MetricsError::Kind::UnknownLabel, "duplicate label '" + label_set[i] + "'");
    }
  }
  return pos;
}

std::size_t lookup(const std::map<std::string, std::size_t>& pos, const std::string& label) {
  auto it = pos.find(label);
  if (it == pos.end()) throw MetricsError(MetricsError::Kind::UnknownLabel, "'" + label + "'");
  return it->second;
}

template <typename Map>
void check_same_keys(const Map& gold, const Map& pred) {
  if (gold.size() != pred.size() ||
      !std::equal(gold.begin(), gold.end(), pred.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw MetricsError(MetricsError::Kind::InstanceMismatch, "gold and pred cover different instance ids");
  }
}

}  // namespace

const ClassMetrics* ClassificationReport::find(std::string_view label) const {
  for (const auto& c : classes) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

std::size_t ClassificationReport::total_support() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.support;
  return n;
}

ClassificationReport classification_report(const std::map<std::string, std::string>& gold,
                                           const std::map<std::string, std::string>& pred,
                                           const std::vector<std::string>& label_set) {
  check_same_keys(gold, pred);
  const auto pos = label_positions(label_set);
  std::vector<Counts> counts(label_set.size());
  for (auto g = gold.begin(), p = pred.begin(); g != gold.end(); ++g, ++p) {
    const auto gi = lookup(pos, g->second);
    const auto pi = lookup(pos, p->second);
    if (gi == pi) {
      ++counts[gi].tp;
    } else {
      ++counts[gi].fn;
      ++counts[pi].fp;
    }
  }
  return finish(label_set, counts, gold.size(), false);
}

ClassificationReport classification_report(const std::vector<std::string>& gold,
                                           const std::vector<std::string>& pred,
                                           const std::vector<std::string>& label_set) {
  if (gold.size() != pred.size()) {
    throw MetricsError(MetricsError::Kind::InstanceMismatch,
                       std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) + " predicted");
  }
  const auto pos = label_positions(label_set);
  std::vector<Counts> counts(label_set.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto gi = lookup(pos, gold[i]);
    const auto pi = lookup(pos, pred[i]);
    if (gi == pi) {
      ++counts[gi].tp;
    } else {
      ++counts[gi].fn;
      ++counts[pi].fp;
    }
  }
  return finish(label_set, counts, gold.size(), false);
}

ClassificationReport multilabel_report(const std::map<std::string, std::set<std::string>>& gold,
                                       const std::map<std::string, std::set<std::string>>& pred,
                                       const std::vector<std::string>& label_set) {
  check_same_keys(gold, pred);
  const auto pos = label_positions(label_set);
  std::vector<Counts> counts(label_set.size());
  for (auto g = gold.begin(), p = pred.begin(); g != gold.end(); ++g, ++p) {
    for (const auto& l : g->second) {
      const auto i = lookup(pos, l);
      if (p->second.count(l)) {
        ++counts[i].tp;
      } else {
        ++counts[i].fn;
      }
    }
    for (const auto& l : p->second) {
      const auto i = lookup(pos, l);
      if (!g->second.count(l)) ++counts[i].fp;
    }
  }
  return finish(label_set, counts, gold.size(), true);
}

ClassificationReport binary_report(const std::vector<bool>& gold, const std::vector<bool>& pred) {
  std::vector<std::string> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (bool b : gold) g.emplace_back(b ? kPositiveLabel : kNegativeLabel);
  for (bool b : pred) p.emplace_back(b ? kPositiveLabel : kNegativeLabel);
  return classification_report(g, p, {std::string(kPositiveLabel), std::string(kNegativeLabel)});
}

nlohmann::json to_json(const ClassificationReport& r) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"predicted", c.predicted},
                       {"zero_support", c.zero_support}});
  }
  return {{"classes", classes},       {"micro_precision", r.micro_precision},
          {"micro_recall", r.micro_recall}, {"micro_f1", r.micro_f1},
          {"macro_f1", r.macro_f1},   {"instances", r.instances},
          {"multi_label", r.multi_label}};
}

// ---------------------------------------------------------------------------
// ROUGE

RougeScore rouge_n_tokens(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                          std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be at least 1");
  if (cand.empty() || ref.empty()) {
    throw MetricsError(MetricsError::Kind::EmptyAfterTokenization, "rouge_n needs non-empty token lists");
  }
  auto grams = [n](const std::vector<std::string>& toks) {
    std::map<std::vector<std::string>, std::size_t> m;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      ++m[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return m;
  };
  const auto cg = grams(cand);
  const auto rg = grams(ref);
  std::size_t overlap = 0;
  for (const auto& [g, c] : cg) {
    auto it = rg.find(g);
    if (it != rg.end()) overlap += std::min(c, it->second);
  }
  const std::size_t cand_total = cand.size() >= n ? cand.size() - n + 1 : 0;
  const std::size_t ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
  RougeScore s;
  s.precision = ratio(overlap, cand_total);
  s.recall = ratio(overlap, ref_total);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  return rouge_n_tokens(text::word_tokens(candidate), text::word_tokens(reference), n);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l_tokens(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) {
    throw MetricsError(MetricsError::Kind::EmptyAfterTokenization, "rouge_l needs non-empty token lists");
  }
  const auto l = lcs_length(cand, ref);
  RougeScore s;
  s.precision = ratio(l, cand.size());
  s.recall = ratio(l, ref.size());
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l_tokens(text::word_tokens(candidate), text::word_tokens(reference));
}

RougeSummary rouge_summary(const std::vector<std::pair<std::string, std::string>>& pairs) {
  RougeSummary s;
  auto add = [](RougeScore& acc, const RougeScore& x) {
    acc.precision += x.precision;
    acc.recall += x.recall;
    acc.f1 += x.f1;
  };
  for (const auto& [cand, ref] : pairs) {
    const auto ct = text::word_tokens(cand);
    const auto rt = text::word_tokens(ref);
    add(s.rouge1, rouge_n_tokens(ct, rt, 1));
    add(s.rouge2, rouge_n_tokens(ct, rt, 2));
    add(s.rougeL, rouge_l_tokens(ct, rt));
    ++s.pairs;
  }
  if (s.pairs > 0) {
    const double n = static_cast<double>(s.pairs);
    for (auto* r : {&s.rouge1, &s.rouge2, &s.rougeL}) {
      r->precision /= n;
      r->recall /= n;
      r->f1 /= n;
    }
  }
  return s;
}

nlohmann::json to_json(const RougeScore& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

nlohmann::json to_json(const RougeSummary& r) {
  return {{"rouge1", to_json(r.rouge1)}, {"rouge2", to_json(r.rouge2)}, {"rougeL", to_json(r.rougeL)},
          {"pairs", r.pairs}};
}

// ---------------------------------------------------------------------------
// Kappa

KappaScore cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) {
    throw MetricsError(MetricsError::Kind::LengthMismatch,
                       std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " labels");
  }
  if (a.empty()) throw MetricsError(MetricsError::Kind::EmptyInput, "no labels to compare");
  std::map<std::string, std::size_t> ma, mb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ma[a[i]];
    ++mb[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  KappaScore k;
  k.po = agree / n;
  for (const auto& [label, ca] : ma) {
    auto it = mb.find(label);
    if (it != mb.end()) k.pe += (ca / n) * (it->second / n);
  }
  if (k.pe >= 1.0) {
    k.degenerate = true;
    k.kappa = k.po >= 1.0 ? 1.0 : 0.0;
  } else {
    k.kappa = (k.po - k.pe) / (1.0 - k.pe);
  }
  return k;
}

double mean_pairwise_kappa(const std::vector<std::vector<std::string>>& raters) {
  if (raters.size() < 2) throw MetricsError(MetricsError::Kind::EmptyInput, "need at least two raters");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      sum += cohens_kappa(raters[i], raters[j]).kappa;
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

namespace {

std::string task_decision(const AnnotationSet& s, Task t) {
  switch (t) {
    case Task::Importance: return s.important ? "yes" : "no";
    case Task::Risk: return s.risk ? "yes" : "no";
    case Task::Sensitivity: return s.sensitive ? "yes" : "no";
    case Task::Topic: {
      auto p = s.primary_topic();
      return p ? std::string(enum_name(*p)) : "none";
    }
    case Task::Rewrite: break;
  }
  throw std::invalid_argument("kappa is defined for classification tasks only");
}

}  // namespace

KappaScore task_kappa(const std::vector<AnnotationSet>& a, const std::vector<AnnotationSet>& b, Task t) {
  std::vector<std::string> la, lb;
  for (const auto& s : a) la.push_back(task_decision(s, t));
  for (const auto& s : b) lb.push_back(task_decision(s, t));
  return cohens_kappa(la, lb);
}

KappaScore flattened_kappa(const std::vector<AnnotationSet>& a, const std::vector<AnnotationSet>& b) {
  if (a.size() != b.size()) {
    throw MetricsError(MetricsError::Kind::LengthMismatch, "annotators cover different sentence counts");
  }
  std::vector<std::string> la, lb;
  auto push = [](std::vector<std::string>& out, const AnnotationSet& s) {
    for (auto c : kAllCategories) out.emplace_back(s.has_topic(c) ? "yes" : "no");
    out.emplace_back(s.important ? "yes" : "no");
    out.emplace_back(s.risk ? "yes" : "no");
    out.emplace_back(s.sensitive ? "yes" : "no");
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    push(la, a[i]);
    push(lb, b[i]);
  }
  return cohens_kappa(la, lb);
}

nlohmann::json to_json(const KappaScore& k) {
  return {{"kappa", k.kappa}, {"po", k.po}, {"pe", k.pe}, {"degenerate", k.degenerate}};
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_task_table(const std::vector<std::pair<std::string, ClassificationReport>>& rows) {
  std::size_t w = 4;
  for (const auto& [name, _] : rows) w = std::max(w, name.size());
  std::ostringstream out;
  out << pad("Task", w) << "  Micro-F1  Macro-F1\n";
  for (const auto& [name, r] : rows) {
    out << pad(name, w) << "  " << pad(cell(r.micro_f1), 8) << "  " << cell(r.macro_f1) << "\n";
  }
  return out.str();
}

std::string format_class_table(const ClassificationReport& r) {
  std::size_t w = 5;
  for (const auto& c : r.classes) w = std::max(w, c.label.size() + (c.zero_support ? 1 : 0));
  std::ostringstream out;
  out << pad("Class", w) << "  Precision  Recall  F1      Support\n";
  for (const auto& c : r.classes) {
    out << pad(c.label + (c.zero_support ? "*" : ""), w) << "  " << pad(cell(c.precision), 9) << "  "
        << pad(cell(c.recall), 6) << "  " << pad(cell(c.f1), 6) << "  " << c.support << "\n";
  }
  out << pad("micro", w) << "  " << pad(cell(r.micro_precision), 9) << "  " << pad(cell(r.micro_recall), 6)
      << "  " << cell(r.micro_f1) << "\n";
  out << pad("macro", w) << "  " << pad("", 9) << "  " << pad("", 6) << "  " << cell(r.macro_f1) << "\n";
  return out.str();
}

std::string format_rouge_table(const RougeSummary& r) {
  std::ostringstream out;
  out << "ROUGE-1  ROUGE-2  ROUGE-L  Pairs\n";
  out << cell(r.rouge1.f1) << "   " << cell(r.rouge2.f1) << "   " << cell(r.rougeL.f1) << "   " << r.pairs << "\n";
  return out.str();
}

}  // namespace tcsi
