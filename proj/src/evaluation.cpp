// SPDX-License-Identifier: Apache-2.0
#include "tcsi/evaluation.hpp"

#include <set>
#include <sstream>

#include "tcsi/segmenter.hpp"

namespace tcsi {

std::vector<EvalItem> eval_items(const Corpus& c) {
  std::vector<EvalItem> out;
  for (const auto* s : c.sentences()) out.push_back({s->id, s->text, s->annotations});
  return out;
}

std::vector<EvalItem> eval_items(const Corpus& c, const std::vector<std::string>& ids) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<EvalItem> out;
  for (const auto* s : c.sentences()) {
    if (wanted.count(s->id)) out.push_back({s->id, s->text, s->annotations});
  }
  return out;
}

namespace {

// Label set = classes seen in gold or predictions, in a fixed order, so a
// class absent from both does not drag macro-F1 down.
std::vector<std::string> observed(const std::vector<std::string>& order, const std::vector<std::string>& gold,
                                  const std::vector<std::string>& pred) {
  std::set<std::string> seen(gold.begin(), gold.end());
  seen.insert(pred.begin(), pred.end());
  std::vector<std::string> out;
  for (const auto& l : order) {
    if (seen.count(l)) out.push_back(l);
  }
  return out;
}

std::vector<std::string> topic_order() {
  std::vector<std::string> out;
  for (auto c : kClassifiableTopics) out.emplace_back(enum_name(c));
  return out;
}

const std::vector<std::string> kBinaryOrder{std::string(kPositiveLabel), std::string(kNegativeLabel)};

}  // namespace

EvaluationReport evaluate_backend(ExpertBackend& backend, const std::vector<EvalItem>& items,
                                  const EvaluationOptions& opts) {
  EvaluationReport r;
  r.items = items.size();
  const auto caps = backend.capabilities();
  std::map<Task, std::pair<std::vector<std::string>, std::vector<std::string>>> labels;
  std::vector<std::pair<std::string, std::string>> rewrites;

  auto yes_no = [](bool b) { return std::string(b ? kPositiveLabel : kNegativeLabel); };
  for (const auto& item : items) {
    const auto input = truncate(item.text, opts.max_input_words).text;
    const auto fv = backend.encode(input);
    if (caps.importance) {
      auto& [g, p] = labels[Task::Importance];
      g.push_back(yes_no(item.gold.important));
      p.push_back(yes_no(backend.classify(Task::Importance, fv).positive));
    }
    if (!item.gold.important) continue;
    if (caps.topic) {
      if (auto gold_topic = item.gold.primary_topic()) {
        auto& [g, p] = labels[Task::Topic];
        g.emplace_back(enum_name(*gold_topic));
        p.emplace_back(enum_name(*backend.classify(Task::Topic, fv).topic));
      }
    }
    if (caps.risk) {
      auto& [g, p] = labels[Task::Risk];
      g.push_back(yes_no(item.gold.risk));
      p.push_back(yes_no(backend.classify(Task::Risk, fv).positive));
    }
    if (caps.sensitivity) {
      auto& [g, p] = labels[Task::Sensitivity];
      g.push_back(yes_no(item.gold.sensitive));
      p.push_back(yes_no(backend.classify(Task::Sensitivity, fv).positive));
    }
    if (opts.score_rewrite && caps.rewrite != RewriteForm::None && item.gold.rewritten) {
      rewrites.emplace_back(backend.rewrite(fv, input).text, *item.gold.rewritten);
    }
  }

  const auto topics = topic_order();
  for (const auto& [task, gp] : labels) {
    const auto& order = task == Task::Topic ? topics : kBinaryOrder;
    r.tasks.emplace(task, classification_report(gp.first, gp.second, observed(order, gp.first, gp.second)));
  }
  if (!rewrites.empty()) r.rewrite = rouge_summary(rewrites);
  return r;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [t, rep] : r.tasks) tasks[std::string(task_name(t))] = to_json(rep);
  nlohmann::json j{{"items", r.items}, {"tasks", tasks}};
  j["rewrite"] = r.rewrite ? to_json(*r.rewrite) : nlohmann::json(nullptr);
  return j;
}

std::string format_evaluation(const EvaluationReport& r) {
  std::vector<std::pair<std::string, ClassificationReport>> rows;
  for (const auto& [t, rep] : r.tasks) rows.emplace_back(std::string(task_name(t)), rep);
  std::ostringstream out;
  out << format_task_table(rows);
  if (auto it = r.tasks.find(Task::Topic); it != r.tasks.end()) {
    out << "\n" << format_class_table(it->second);
  }
  if (r.rewrite) out << "\n" << format_rouge_table(*r.rewrite);
  return out.str();
}

}  // namespace tcsi
