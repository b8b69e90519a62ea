// SPDX-License-Identifier: Apache-2.0
//
// Natively trainable baseline backend. All heads share one hashed n-gram
// featurizer; each classification head is linear and trained with an
// alternating multi-task schedule. Rewriting is a fixed rule table.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcsi/corpus.hpp"
#include "tcsi/experts.hpp"
#include "tcsi/metrics.hpp"

namespace tcsi {

inline constexpr std::uint64_t kDefaultHashSeed = 0x5443534950505632ULL;  // "TCSIPPV2"

/// Hash of one n-gram (tokens joined by a single space):
/// splitmix64(fnv1a64(gram) ^ seed).
std::uint64_t ngram_hash(std::string_view gram, std::uint64_t seed = kDefaultHashSeed);

struct FeaturizerConfig {
  std::uint32_t dim = 1u << 18;  // power of two
  bool lowercase = true;
  std::uint64_t seed = kDefaultHashSeed;
};

/// Word 1-2-gram counts hashed into `dim` buckets (index = hash & (dim - 1)),
/// then L2-normalized. Tokens are alphanumeric runs.
class HashedFeaturizer {
 public:
  explicit HashedFeaturizer(FeaturizerConfig cfg = {});

  const FeaturizerConfig& config() const { return cfg_; }
  std::vector<std::string> ngrams(std::string_view text) const;
  std::uint32_t index_of(std::string_view gram) const;
  FeatureVector featurize(std::string_view text, const std::string& tag) const;

 private:
  FeaturizerConfig cfg_;
};

/// Linear head over the shared features: one weight row per class. Binary
/// heads have one row scored through the logistic function; the Topic head
/// has one row per classifiable topic scored through softmax.
struct LinearHead {
  Task task = Task::Importance;
  std::uint32_t dim = 0;
  std::vector<std::vector<double>> weights;  // rows x dim
  std::vector<double> bias;                  // one per row

  LinearHead() = default;
  LinearHead(Task t, std::uint32_t dim);
  std::size_t rows() const { return bias.size(); }
  std::vector<double> logits(const FeatureVector& fv) const;
  /// Binary: {P(positive)}. Topic: distribution over kClassifiableTopics.
  std::vector<double> probabilities(const FeatureVector& fv) const;
};

enum class ClassWeighting { None, InverseFrequency };
enum class Alternation { PerBatch, PerEpoch };

std::string_view to_string(ClassWeighting w);
std::string_view to_string(Alternation a);

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  /// Applied to the Risk and Sensitivity heads.
  ClassWeighting class_weighting = ClassWeighting::InverseFrequency;
  std::uint64_t seed = 1;
  Alternation alternation = Alternation::PerBatch;
  std::size_t batch_size = 16;
  std::size_t max_input_words = 512;
  FeaturizerConfig featurizer;
  Thresholds thresholds;

  /// Throws TrainingError(BadConfig) on out-of-range values.
  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  enum class Kind { EmptyTaskData, Divergence, BadConfig };
  TrainingError(Kind kind, const std::string& detail, std::optional<Task> task = std::nullopt);
  Kind kind() const { return kind_; }
  std::optional<Task> task() const { return task_; }

 private:
  Kind kind_;
  std::optional<Task> task_;
};

/// Deterministic stand-in for the rewrite expert. Rules, in order:
/// drop parenthesized asides, drop boilerplate phrases, split at the first
/// semicolon into two sentences, tidy spacing. Never returns empty text.
RewriteResult rule_rewrite(std::string_view sentence);
const std::vector<std::string>& boilerplate_phrases();

class LexicalBackend final : public ExpertBackend {
 public:
  static constexpr std::string_view kTag = "lexical-v1";

  LexicalBackend(HashedFeaturizer featurizer, std::map<Task, LinearHead> heads);

  Capabilities capabilities() const override;
  std::string tag() const override { return std::string(kTag); }

  const HashedFeaturizer& featurizer() const { return featurizer_; }
  const LinearHead& head(Task t) const;

  /// Training settings and losses recorded in the model file.
  nlohmann::json metadata = nlohmann::json::object();

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  std::vector<double> do_scores(Task task, const FeatureVector& fv) const override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;
  void check_features(const FeatureVector& fv) const override;

 private:
  HashedFeaturizer featurizer_;
  std::map<Task, LinearHead> heads_;
};

struct TaskTrainingLog {
  std::size_t train_examples = 0;
  std::size_t batches = 0;             // over the whole run
  double initial_loss = 0.0;           // before the first step
  std::vector<double> epoch_loss;      // weighted mean training loss after each epoch
  std::vector<std::size_t> epoch_batches;
};

struct TrainResult {
  std::unique_ptr<LexicalBackend> backend;
  std::map<Task, TaskTrainingLog> log;
  /// Per-task report on the validation part (absent when it is empty).
  std::map<Task, ClassificationReport> validation;
  /// Task of every gradient step in the first epoch.
  std::vector<Task> first_epoch_schedule;
};

/// Trains the four classification heads on the train parts of `splits`.
/// Throws TrainingError EmptyTaskData(task) or Divergence.
TrainResult train_multitask(const Corpus& corpus, const SplitPlan& splits, const TrainConfig& config);

nlohmann::json lexical_model_to_json(const LexicalBackend& b);
std::unique_ptr<LexicalBackend> lexical_model_from_json(const nlohmann::json& j);
void save_lexical_model(const LexicalBackend& b, const std::string& path);
std::unique_ptr<LexicalBackend> load_lexical_model(const std::string& path);

}  // namespace tcsi
