// SPDX-License-Identifier: Apache-2.0
#include "tcsi/oracle_backend.hpp"

#include <cmath>

#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

namespace tcsi {

OracleBackend::OracleBackend(const Corpus& corpus) {
  // Ordinals travel as float32; stay inside its exact integer range.
  if (corpus.sentence_count() >= (1u << 24)) {
    throw ExpertError(ExpertError::Kind::BackendUnavailable, "corpus too large for the oracle");
  }
  for (const auto& d : corpus.documents) {
    for (const auto& s : d.sentences) {
      const std::size_t ordinal = entries_.size();
      entries_.push_back({s.text, s.annotations});
      by_text_.emplace(text::normalize_whitespace(s.text), ordinal);
      auto cut = truncate(s.text, kTruncationWords);
      if (cut.truncated) by_text_.emplace(text::normalize_whitespace(cut.text), ordinal);
    }
  }
}

Capabilities OracleBackend::capabilities() const {
  Capabilities c;
  c.importance = c.topic = c.risk = c.sensitivity = true;
  c.rewrite = RewriteForm::Features;
  c.thread_safe = true;
  return c;
}

FeatureVector OracleBackend::do_encode(std::string_view sentence) {
  auto it = by_text_.find(text::normalize_whitespace(sentence));
  if (it == by_text_.end()) {
    throw ExpertError(ExpertError::Kind::UnknownSentence,
                      "sentence not in oracle corpus: '" + std::string(sentence.substr(0, 60)) + "'");
  }
  return FeatureVector::dense({static_cast<float>(it->second)}, tag());
}

void OracleBackend::check_features(const FeatureVector& fv) const {
  ExpertBackend::check_features(fv);
  if (fv.dim() != 1) {
    throw ExpertError(ExpertError::Kind::DimensionMismatch, "oracle features have dimension 1");
  }
}

const OracleBackend::Entry& OracleBackend::entry_for(const FeatureVector& fv) const {
  const float v = fv.at(0);
  if (v < 0.0f || v != std::floor(v) || static_cast<std::size_t>(v) >= entries_.size()) {
    throw ExpertError(ExpertError::Kind::UnknownSentence, "feature does not name an oracle sentence");
  }
  return entries_[static_cast<std::size_t>(v)];
}

std::vector<double> OracleBackend::do_scores(Task task, const FeatureVector& fv) const {
  const auto& gold = entry_for(fv).gold;
  switch (task) {
    case Task::Importance: return {gold.important ? 1.0 : 0.0};
    case Task::Risk: return {gold.risk ? 1.0 : 0.0};
    case Task::Sensitivity: return {gold.sensitive ? 1.0 : 0.0};
    case Task::Topic: {
      std::vector<double> scores(kClassifiableCount, 0.0);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < kClassifiableCount; ++i) {
        if (gold.has_topic(kClassifiableTopics[i])) {
          scores[i] = 1.0;
          ++hits;
        }
      }
      // No predictable gold topic: uniform, so the tie rule picks the first class.
      if (hits == 0) {
        std::fill(scores.begin(), scores.end(), 1.0);
        hits = kClassifiableCount;
      }
      for (auto& s : scores) s /= static_cast<double>(hits);
      return scores;
    }
    case Task::Rewrite: break;
  }
  throw ExpertError(ExpertError::Kind::UnsupportedTask, "not a classification task");
}

RewriteResult OracleBackend::do_rewrite(const FeatureVector& fv, std::string_view) {
  const auto& e = entry_for(fv);
  return {e.gold.rewritten.value_or(e.text), false};
}

std::unique_ptr<OracleBackend> attach_oracle(const Corpus& corpus) {
  return std::make_unique<OracleBackend>(corpus);
}

}  // namespace tcsi
