// SPDX-License-Identifier: Apache-2.0
#include "tcsi/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "tcsi/hash.hpp"
#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

namespace tcsi {

using nlohmann::json;

std::uint64_t ngram_hash(std::string_view gram, std::uint64_t seed) {
  return hash::splitmix64(hash::fnv1a64(gram) ^ seed);
}

// ---------------------------------------------------------------------------
// Featurizer

HashedFeaturizer::HashedFeaturizer(FeaturizerConfig cfg) : cfg_(cfg) {
  if (cfg_.dim == 0 || (cfg_.dim & (cfg_.dim - 1)) != 0) {
    throw std::invalid_argument("featurizer dim must be a power of two, got " + std::to_string(cfg_.dim));
  }
}

std::vector<std::string> HashedFeaturizer::ngrams(std::string_view text) const {
  const auto toks = text::word_tokens(text, cfg_.lowercase);
  std::vector<std::string> out(toks.begin(), toks.end());
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) out.push_back(toks[i] + " " + toks[i + 1]);
  return out;
}

std::uint32_t HashedFeaturizer::index_of(std::string_view gram) const {
  return static_cast<std::uint32_t>(ngram_hash(gram, cfg_.seed) & (cfg_.dim - 1));
}

FeatureVector HashedFeaturizer::featurize(std::string_view text, const std::string& tag) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : ngrams(text)) counts[index_of(g)] += 1.0;
  double norm = 0.0;
  for (const auto& [_, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  std::vector<FeatureVector::SparseEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [i, c] : counts) entries.emplace_back(i, static_cast<float>(c / norm));
  return FeatureVector::sparse(cfg_.dim, std::move(entries), tag);
}

// ---------------------------------------------------------------------------
// Heads

LinearHead::LinearHead(Task t, std::uint32_t d) : task(t), dim(d) {
  const std::size_t rows = t == Task::Topic ? kClassifiableCount : 1;
  weights.assign(rows, std::vector<double>(d, 0.0));
  bias.assign(rows, 0.0);
}

std::vector<double> LinearHead::logits(const FeatureVector& fv) const {
  std::vector<double> z(bias);
  for (std::size_t r = 0; r < rows(); ++r) {
    if (fv.is_sparse()) {
      for (const auto& [i, v] : fv.sparse_entries()) z[r] += weights[r][i] * v;
    } else {
      const auto& d = fv.dense_values();
      for (std::size_t i = 0; i < d.size() && i < dim; ++i) z[r] += weights[r][i] * d[i];
    }
  }
  return z;
}

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

std::vector<double> softmax(std::vector<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

}  // namespace

std::vector<double> LinearHead::probabilities(const FeatureVector& fv) const {
  auto z = logits(fv);
  if (task == Task::Topic) return softmax(std::move(z));
  return {sigmoid(z[0])};
}

// ---------------------------------------------------------------------------
// Config and errors

std::string_view to_string(ClassWeighting w) {
  return w == ClassWeighting::None ? "none" : "inverse-frequency";
}

std::string_view to_string(Alternation a) { return a == Alternation::PerBatch ? "per-batch" : "per-epoch"; }

TrainingError::TrainingError(Kind kind, const std::string& detail, std::optional<Task> task)
    : std::runtime_error([&] {
        std::string head = kind == Kind::EmptyTaskData ? "EmptyTaskData"
                           : kind == Kind::Divergence  ? "Divergence"
                                                       : "BadConfig";
        if (task) head += "(" + std::string(task_name(*task)) + ")";
        return head + ": " + detail;
      }()),
      kind_(kind),
      task_(task) {}

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { throw TrainingError(TrainingError::Kind::BadConfig, m); };
  if (epochs < 1) bad("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning rate must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) bad("l2 must be non-negative");
  if (batch_size < 1) bad("batch size must be at least 1");
  if (max_input_words < 1) bad("max_input_words must be at least 1");
  try {
    HashedFeaturizer{featurizer};
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
}

// ---------------------------------------------------------------------------
// Rule rewriter

const std::vector<std::string>& boilerplate_phrases() {
  static const std::vector<std::string> phrases{
      "at our sole discretion",
      "to the extent permitted by law",
      "including but not limited to",
      "from time to time",
  };
  return phrases;
}

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u >= 0x80;
}

bool is_closing_punct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')';
}

std::string drop_parentheticals(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '(') {
      int depth = 0;
      std::size_t j = i;
      for (; j < s.size(); ++j) {
        if (s[j] == '(') ++depth;
        if (s[j] == ')' && --depth == 0) break;
      }
      if (j < s.size()) {
        const char next = j + 1 < s.size() ? s[j + 1] : '\0';
        if (next == '\0' || text::is_space(next) || is_closing_punct(next)) {
          while (!out.empty() && text::is_space(out.back())) out.pop_back();
        }
        i = j + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

// Removes one occurrence of `pattern` (matched case-insensitively) with word
// boundaries at the phrase ends. Returns false when nothing matched.
bool replace_once(std::string& s, const std::string& pattern, const std::string& phrase,
                  std::string_view replacement) {
  const auto lower = text::to_lower_ascii(s);
  std::size_t from = 0;
  while (true) {
    const auto at = lower.find(pattern, from);
    if (at == std::string::npos) return false;
    const auto p = lower.find(phrase, at);
    const auto end = p + phrase.size();
    const bool left_ok = p == 0 || !is_word_byte(s[p - 1]);
    const bool right_ok = end >= s.size() || !is_word_byte(s[end]);
    if (left_ok && right_ok) {
      s.replace(at, pattern.size(), replacement);
      return true;
    }
    from = at + 1;
  }
}

std::string drop_boilerplate(std::string s) {
  for (const auto& phrase : boilerplate_phrases()) {
    while (replace_once(s, ", " + phrase + ",", phrase, " ") || replace_once(s, ", " + phrase, phrase, "") ||
           replace_once(s, phrase, phrase, "")) {
    }
  }
  return s;
}

// Collapses whitespace runs and removes spaces before closing punctuation.
// Never inserts a space where there was none.
std::string tidy(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (text::is_space(s[i])) {
      std::size_t j = i;
      while (j < s.size() && text::is_space(s[j])) ++j;
      if (!out.empty() && j < s.size() && !is_closing_punct(s[j])) out.push_back(' ');
      i = j - 1;
      continue;
    }
    out.push_back(s[i]);
  }
  // A removed leading phrase can leave ", rest".
  std::size_t lead = 0;
  while (lead < out.size() && (out[lead] == ',' || out[lead] == ';' || text::is_space(out[lead]))) ++lead;
  return out.substr(lead);
}

void capitalize_first(std::string& s) {
  for (auto& c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      c = static_cast<char>(std::toupper(u));
      return;
    }
    if (std::isdigit(u) || u >= 0x80) return;
  }
}

std::string split_semicolon(const std::string& s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] != ';' || !text::is_space(s[i + 1])) continue;
    std::string first(text::trim(std::string_view(s).substr(0, i)));
    std::string second(text::trim(std::string_view(s).substr(i + 1)));
    if (first.empty()) return second;
    const char last = first.back();
    if (last != '.' && last != '!' && last != '?') first.push_back('.');
    if (second.empty()) return first;
    capitalize_first(second);
    return first + " " + second;
  }
  return s;
}

bool starts_upper(std::string_view s) {
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) return std::isupper(u) != 0;
  }
  return false;
}

}  // namespace

RewriteResult rule_rewrite(std::string_view sentence) {
  std::string s = drop_parentheticals(sentence);
  s = tidy(drop_boilerplate(std::move(s)));
  s = tidy(split_semicolon(s));
  if (text::trim(s).empty()) return {std::string(sentence), false};
  if (starts_upper(sentence)) capitalize_first(s);
  return {s, false};
}

// ---------------------------------------------------------------------------
// Backend

LexicalBackend::LexicalBackend(HashedFeaturizer featurizer, std::map<Task, LinearHead> heads)
    : featurizer_(std::move(featurizer)), heads_(std::move(heads)) {
  for (auto t : kClassificationTasks) {
    auto it = heads_.find(t);
    if (it == heads_.end()) throw std::invalid_argument("missing head " + std::string(task_name(t)));
    if (it->second.dim != featurizer_.config().dim) {
      throw std::invalid_argument("head dimension differs from featurizer dimension");
    }
  }
}

Capabilities LexicalBackend::capabilities() const {
  Capabilities c;
  c.importance = c.topic = c.risk = c.sensitivity = true;
  c.rewrite = RewriteForm::Text;
  c.thread_safe = true;
  return c;
}

const LinearHead& LexicalBackend::head(Task t) const {
  auto it = heads_.find(t);
  if (it == heads_.end()) throw ExpertError(ExpertError::Kind::UnsupportedTask, std::string(task_name(t)));
  return it->second;
}

FeatureVector LexicalBackend::do_encode(std::string_view sentence) {
  return featurizer_.featurize(sentence, tag());
}

void LexicalBackend::check_features(const FeatureVector& fv) const {
  ExpertBackend::check_features(fv);
  if (fv.dim() != featurizer_.config().dim) {
    throw ExpertError(ExpertError::Kind::DimensionMismatch,
                      "expected dim " + std::to_string(featurizer_.config().dim) + ", got " +
                          std::to_string(fv.dim()));
  }
}

std::vector<double> LexicalBackend::do_scores(Task task, const FeatureVector& fv) const {
  return head(task).probabilities(fv);
}

RewriteResult LexicalBackend::do_rewrite(const FeatureVector&, std::string_view sentence) {
  return rule_rewrite(sentence);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Example {
  FeatureVector fv;
  std::size_t label = 0;  // binary: 1 = positive; Topic: classifiable index
  double weight = 1.0;
};

struct TaskData {
  Task task;
  std::vector<Example> train;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
};

double example_loss(const LinearHead& h, const Example& e) {
  const auto p = h.probabilities(e.fv);
  constexpr double kFloor = 1e-300;
  if (h.task == Task::Topic) return -e.weight * std::log(std::max(p[e.label], kFloor));
  const double q = e.label ? p[0] : 1.0 - p[0];
  return -e.weight * std::log(std::max(q, kFloor));
}

double mean_loss(const LinearHead& h, const std::vector<Example>& xs) {
  double sum = 0.0;
  for (const auto& e : xs) sum += example_loss(h, e);
  return sum / static_cast<double>(xs.size());
}

// One mini-batch gradient step; gradients are computed against the weights
// as they were before the step.
double sgd_step(LinearHead& h, const std::vector<const Example*>& batch, const TrainConfig& cfg) {
  std::map<std::pair<std::size_t, std::uint32_t>, double> grad;
  std::vector<double> grad_bias(h.rows(), 0.0);
  double loss = 0.0;
  for (const auto* e : batch) {
    const auto p = h.probabilities(e->fv);
    loss += example_loss(h, *e);
    for (std::size_t r = 0; r < h.rows(); ++r) {
      const double target = h.task == Task::Topic ? (r == e->label ? 1.0 : 0.0) : static_cast<double>(e->label);
      const double g = e->weight * (p[r] - target);
      grad_bias[r] += g;
      for (const auto& [i, v] : e->fv.sparse_entries()) grad[{r, i}] += g * v;
    }
  }
  const double n = static_cast<double>(batch.size());
  for (const auto& [key, g] : grad) {
    auto& w = h.weights[key.first][key.second];
    w -= cfg.learning_rate * (g / n + cfg.l2 * w);
  }
  for (std::size_t r = 0; r < h.rows(); ++r) h.bias[r] -= cfg.learning_rate * grad_bias[r] / n;
  return loss / n;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

std::optional<std::size_t> label_for(Task t, const AnnotationSet& a) {
  switch (t) {
    case Task::Importance: return a.important ? 1 : 0;
    case Task::Risk: return a.risk ? 1 : 0;
    case Task::Sensitivity: return a.sensitive ? 1 : 0;
    case Task::Topic: {
      auto p = a.primary_topic();
      if (!p) return std::nullopt;
      return classifiable_index(*p);
    }
    case Task::Rewrite: break;
  }
  return std::nullopt;
}

std::vector<std::string> class_names(Task t) {
  if (t != Task::Topic) return {std::string(kNegativeLabel), std::string(kPositiveLabel)};
  std::vector<std::string> out;
  for (auto c : kClassifiableTopics) out.emplace_back(enum_name(c));
  return out;
}

json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"l2", c.l2},
          {"class_weighting", to_string(c.class_weighting)},
          {"seed", c.seed},
          {"alternation", to_string(c.alternation)},
          {"batch_size", c.batch_size},
          {"max_input_words", c.max_input_words}};
}

}  // namespace

TrainResult train_multitask(const Corpus& corpus, const SplitPlan& splits, const TrainConfig& cfg) {
  cfg.validate();
  const HashedFeaturizer featurizer(cfg.featurizer);
  const std::string tag(LexicalBackend::kTag);

  std::map<std::string, const Sentence*> by_id;
  for (const auto* s : corpus.sentences()) by_id.emplace(s->id, s);
  auto input_of = [&](const Sentence& s) { return truncate(s.text, cfg.max_input_words).text; };

  std::vector<TaskData> tasks;
  for (auto t : kClassificationTasks) {
    auto sp = splits.find(t);
    if (sp == splits.end()) throw TrainingError(TrainingError::Kind::EmptyTaskData, "no split for task", t);
    TaskData d{t, {}, {}, 0};
    for (const auto& id : sp->second.ids(SplitPart::Train)) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw TrainingError(TrainingError::Kind::EmptyTaskData, "unknown id " + id, t);
      auto label = label_for(t, it->second->annotations);
      if (!label) continue;
      d.train.push_back({featurizer.featurize(input_of(*it->second), tag), *label, 1.0});
    }
    if (d.train.empty()) throw TrainingError(TrainingError::Kind::EmptyTaskData, "no training examples", t);

    const bool weighted = cfg.class_weighting == ClassWeighting::InverseFrequency &&
                          (t == Task::Risk || t == Task::Sensitivity);
    if (weighted) {
      std::size_t pos = 0;
      for (const auto& e : d.train) pos += e.label;
      const std::size_t neg = d.train.size() - pos;
      if (pos == 0 || neg == 0) {
        throw TrainingError(TrainingError::Kind::EmptyTaskData,
                            std::string("no ") + (pos == 0 ? "positive" : "negative") +
                                " training examples for inverse-frequency weighting",
                            t);
      }
      const double n = static_cast<double>(d.train.size());
      for (auto& e : d.train) e.weight = n / (2.0 * static_cast<double>(e.label ? pos : neg));
    }
    d.order.resize(d.train.size());
    for (std::size_t i = 0; i < d.order.size(); ++i) d.order[i] = i;
    tasks.push_back(std::move(d));
  }

  std::map<Task, LinearHead> heads;
  TrainResult result;
  for (const auto& d : tasks) {
    heads.emplace(d.task, LinearHead(d.task, cfg.featurizer.dim));
    auto& log = result.log[d.task];
    log.train_examples = d.train.size();
    log.initial_loss = mean_loss(heads.at(d.task), d.train);
  }

  std::mt19937_64 rng(cfg.seed);
  auto next_batch = [&](TaskData& d) {
    std::vector<const Example*> batch;
    for (std::size_t k = 0; k < cfg.batch_size && k < d.train.size(); ++k) {
      if (d.cursor == d.order.size()) {
        d.cursor = 0;
        shuffle(d.order, rng);
      }
      batch.push_back(&d.train[d.order[d.cursor++]]);
    }
    return batch;
  };
  auto step = [&](TaskData& d) {
    const double loss = sgd_step(heads.at(d.task), next_batch(d), cfg);
    if (!std::isfinite(loss)) throw TrainingError(TrainingError::Kind::Divergence, "non-finite batch loss", d.task);
    ++result.log[d.task].batches;
  };

  for (auto& d : tasks) shuffle(d.order, rng);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::map<Task, std::size_t> steps;
    auto per_task = [&](const TaskData& d) { return (d.train.size() + cfg.batch_size - 1) / cfg.batch_size; };
    if (cfg.alternation == Alternation::PerBatch) {
      // Every task gets the same number of batches; smaller tasks cycle.
      std::size_t rounds = 0;
      for (const auto& d : tasks) rounds = std::max(rounds, per_task(d));
      for (std::size_t r = 0; r < rounds; ++r) {
        for (auto& d : tasks) {
          step(d);
          ++steps[d.task];
          if (epoch == 0) result.first_epoch_schedule.push_back(d.task);
        }
      }
    } else {
      for (auto& d : tasks) {
        for (std::size_t b = 0; b < per_task(d); ++b) {
          step(d);
          ++steps[d.task];
          if (epoch == 0) result.first_epoch_schedule.push_back(d.task);
        }
      }
    }
    for (const auto& d : tasks) {
      const double loss = mean_loss(heads.at(d.task), d.train);
      if (!std::isfinite(loss)) throw TrainingError(TrainingError::Kind::Divergence, "non-finite epoch loss", d.task);
      result.log[d.task].epoch_loss.push_back(loss);
      result.log[d.task].epoch_batches.push_back(steps[d.task]);
    }
  }

  result.backend = std::make_unique<LexicalBackend>(featurizer, std::move(heads));
  result.backend->set_thresholds(cfg.thresholds);

  // Validation reports, scored straight from the heads.
  for (auto t : kClassificationTasks) {
    const auto ids = splits.at(t).ids(SplitPart::Validation);
    std::vector<std::string> gold, pred;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) continue;
      auto label = label_for(t, it->second->annotations);
      if (!label) continue;
      const auto fv = featurizer.featurize(input_of(*it->second), tag);
      const auto lab = make_label(t, result.backend->head(t).probabilities(fv), cfg.thresholds);
      const auto names = class_names(t);
      gold.push_back(names[*label]);
      if (t == Task::Topic) {
        pred.emplace_back(enum_name(*lab.topic));
      } else {
        pred.push_back(names[lab.positive ? 1 : 0]);
      }
    }
    if (gold.empty()) continue;
    std::set<std::string> seen(gold.begin(), gold.end());
    seen.insert(pred.begin(), pred.end());
    std::vector<std::string> labels;
    for (const auto& n : class_names(t)) {
      if (seen.count(n)) labels.push_back(n);
    }
    result.validation.emplace(t, classification_report(gold, pred, labels));
  }

  json losses = json::object();
  for (const auto& [t, log] : result.log) {
    losses[std::string(task_name(t))] = {{"initial", log.initial_loss}, {"epochs", log.epoch_loss},
                                         {"train_examples", log.train_examples}};
  }
  result.backend->metadata = {{"config", config_to_json(cfg)}, {"loss", losses}};
  return result;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::string_view kModelFormat = "tcsi-lexical-model";
constexpr int kModelVersion = 1;

json thresholds_to_json(const Thresholds& t) {
  return {{"importance", t.importance},
          {"risk", t.risk},
          {"sensitivity", t.sensitivity},
          {"multi_label_topics", t.multi_label_topics},
          {"topic", t.topic}};
}

Thresholds thresholds_from_json(const json& j) {
  Thresholds t;
  t.importance = j.value("importance", t.importance);
  t.risk = j.value("risk", t.risk);
  t.sensitivity = j.value("sensitivity", t.sensitivity);
  t.multi_label_topics = j.value("multi_label_topics", t.multi_label_topics);
  t.topic = j.value("topic", t.topic);
  return t;
}

}  // namespace

json lexical_model_to_json(const LexicalBackend& b) {
  const auto& fc = b.featurizer().config();
  json heads = json::object();
  for (auto t : kClassificationTasks) {
    const auto& h = b.head(t);
    json rows = json::array();
    for (std::size_t r = 0; r < h.rows(); ++r) {
      json w = json::array();
      for (std::uint32_t i = 0; i < h.dim; ++i) {
        if (h.weights[r][i] != 0.0) w.push_back({i, h.weights[r][i]});
      }
      rows.push_back({{"bias", h.bias[r]}, {"weights", w}});
    }
    json classes = json::array();
    if (t == Task::Topic) {
      for (auto c : kClassifiableTopics) classes.push_back(enum_name(c));
    } else {
      classes.push_back(kPositiveLabel);
    }
    heads[std::string(task_name(t))] = {{"classes", classes}, {"rows", rows}};
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"tag", b.tag()},
          {"featurizer",
           {{"dim", fc.dim},
            {"ngram_range", {1, 2}},
            {"hash", "splitmix64(fnv1a64(gram) ^ seed)"},
            {"seed", fc.seed},
            {"lowercase", fc.lowercase}}},
          {"thresholds", thresholds_to_json(b.thresholds())},
          {"heads", heads},
          {"training", b.metadata}};
}

std::unique_ptr<LexicalBackend> lexical_model_from_json(const json& j) {
  if (j.value("format", std::string()) != kModelFormat) throw std::invalid_argument("not a lexical model file");
  if (j.value("version", 0) != kModelVersion) throw std::invalid_argument("unsupported lexical model version");
  const auto& f = j.at("featurizer");
  FeaturizerConfig fc;
  fc.dim = f.at("dim").get<std::uint32_t>();
  fc.seed = f.at("seed").get<std::uint64_t>();
  fc.lowercase = f.at("lowercase").get<bool>();
  HashedFeaturizer featurizer(fc);
  std::map<Task, LinearHead> heads;
  for (auto t : kClassificationTasks) {
    const auto& hj = j.at("heads").at(std::string(task_name(t)));
    LinearHead h(t, fc.dim);
    const auto& rows = hj.at("rows");
    if (rows.size() != h.rows()) throw std::invalid_argument("wrong row count for " + std::string(task_name(t)));
    for (std::size_t r = 0; r < h.rows(); ++r) {
      h.bias[r] = rows[r].at("bias").get<double>();
      for (const auto& pair : rows[r].at("weights")) {
        const auto i = pair.at(0).get<std::uint32_t>();
        if (i >= fc.dim) throw std::invalid_argument("weight index out of range");
        h.weights[r][i] = pair.at(1).get<double>();
      }
    }
    heads.emplace(t, std::move(h));
  }
  auto b = std::make_unique<LexicalBackend>(std::move(featurizer), std::move(heads));
  b->set_thresholds(thresholds_from_json(j.value("thresholds", json::object())));
  b->metadata = j.value("training", json::object());
  return b;
}

void save_lexical_model(const LexicalBackend& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << lexical_model_to_json(b).dump() << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::unique_ptr<LexicalBackend> load_lexical_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExpertError(ExpertError::Kind::BackendUnavailable, "cannot open model " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ExpertError(ExpertError::Kind::BackendUnavailable, "malformed model " + path + ": " + e.what());
  }
  try {
    return lexical_model_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ExpertError(ExpertError::Kind::BackendUnavailable, "bad model " + path + ": " + e.what());
  } catch (const json::exception& e) {
    throw ExpertError(ExpertError::Kind::BackendUnavailable, "bad model " + path + ": " + e.what());
  }
}

}  // namespace tcsi
