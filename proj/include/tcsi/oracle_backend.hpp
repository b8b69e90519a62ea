// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcsi/corpus.hpp"
#include "tcsi/experts.hpp"

namespace tcsi {

/// Answers every head from gold annotations. encode() returns a
/// one-dimensional vector holding the sentence's ordinal in the corpus, so
/// heads (including rewrite) decode from features alone.
class OracleBackend final : public ExpertBackend {
 public:
  /// Sentences longer than this are also indexed under their truncated form,
  /// matching the pipeline's default input budget.
  static constexpr std::size_t kTruncationWords = 512;

  explicit OracleBackend(const Corpus& corpus);

  Capabilities capabilities() const override;
  std::string tag() const override { return "oracle-v1"; }

  std::size_t size() const { return entries_.size(); }

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  std::vector<double> do_scores(Task task, const FeatureVector& fv) const override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;
  void check_features(const FeatureVector& fv) const override;

 private:
  struct Entry {
    std::string text;
    AnnotationSet gold;
  };
  const Entry& entry_for(const FeatureVector& fv) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_text_;
};

/// Builds an oracle over a validated corpus.
std::unique_ptr<OracleBackend> attach_oracle(const Corpus& corpus);

}  // namespace tcsi
