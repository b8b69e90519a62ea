// SPDX-License-Identifier: Apache-2.0
//
// Synthetic corpora and small helpers shared by the test binaries.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tcsi/corpus.hpp"

namespace tcsi::testing {

struct SyntheticSpec {
  std::size_t documents = 4;
  std::size_t sentences_per_document = 25;
  std::uint64_t seed = 7;
  double p_important = 0.5;
  double p_risk = 0.25;       // among important
  double p_sensitive = 0.25;  // among important
  double p_rewrite = 0.7;     // among important
  double p_second_topic = 0.25;
  double p_unclassifiable = 0.05;  // topic is PermissionAcquisition or CeaseOperation only
  /// Every sentence important, risky, sensitive and rewritten.
  bool all_pass = false;
};

inline Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
  static const char* const kVerbs[] = {"collect", "share", "use", "retain", "protect", "update", "delete", "review"};
  static const char* const kNouns[] = {"email", "location", "contacts", "photos", "payment details", "device id"};
  std::mt19937_64 rng(spec.seed);
  auto coin = [&](double p) { return static_cast<double>(rng() % 1000000) / 1e6 < p; };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  Corpus c;
  for (std::size_t d = 0; d < spec.documents; ++d) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(d);
    doc.title = "Policy " + std::to_string(d);
    for (std::size_t i = 0; i < spec.sentences_per_document; ++i) {
      Sentence s;
      s.id = doc.doc_id + "-s" + std::to_string(i);
      s.doc_id = doc.doc_id;
      s.index = i;
      std::ostringstream text;
      text << "Clause " << d << "." << i << " says we " << kVerbs[pick(8)] << " your " << kNouns[pick(6)];
      const std::size_t extra = pick(12);
      for (std::size_t k = 0; k < extra; ++k) text << " and more";
      text << ".";
      s.text = text.str();
      auto& a = s.annotations;
      if (coin(spec.p_unclassifiable) && !spec.all_pass) {
        a.topics.push_back(coin(0.5) ? DataPracticeCategory::PermissionAcquisition
                                     : DataPracticeCategory::CeaseOperation);
      } else {
        a.topics.push_back(kClassifiableTopics[pick(kClassifiableCount)]);
        if (coin(spec.p_second_topic)) {
          const auto second = kAllCategories[pick(kCategoryCount)];
          if (!a.has_topic(second)) a.topics.push_back(second);
        }
      }
      a.important = spec.all_pass || coin(spec.p_important);
      if (a.important) {
        a.risk = spec.all_pass || coin(spec.p_risk);
        a.sensitive = spec.all_pass || coin(spec.p_sensitive);
        if (spec.all_pass || coin(spec.p_rewrite)) a.rewritten = "In short, clause " + std::to_string(d) + "." +
                                                                  std::to_string(i) + " covers your data.";
      }
      doc.sentences.push_back(std::move(s));
    }
    c.documents.push_back(std::move(doc));
  }
  return c;
}

/// Linearly separable four-task toy corpus: one keyword decides each label.
/// "notably" marks Importance, one verb per classifiable topic, "sell" marks
/// Risk and "biometric" marks Sensitivity.
inline Corpus make_separable_corpus(std::size_t n, std::uint64_t seed) {
  static const char* const kTopicWords[] = {"gather",  "disclose", "analyze", "keep",     "encrypt",
                                            "correct", "minors",   "email",   "amend"};
  static const char* const kFiller[] = {"the", "service", "account", "app", "website", "users", "team", "records"};
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t k) { return static_cast<std::size_t>(rng() % k); };
  Corpus c;
  Document doc;
  doc.doc_id = "toy";
  for (std::size_t i = 0; i < n; ++i) {
    Sentence s;
    s.id = "toy-" + std::to_string(i);
    s.doc_id = doc.doc_id;
    s.index = i;
    auto& a = s.annotations;
    const std::size_t topic = pick(kClassifiableCount);
    a.topics.push_back(kClassifiableTopics[topic]);
    a.important = i % 5 != 0;  // 80% important
    if (a.important) {
      a.risk = pick(3) == 0;
      a.sensitive = pick(3) == 0;
    }
    std::ostringstream text;
    text << "We " << kTopicWords[topic];
    for (std::size_t k = 0, m = 2 + pick(4); k < m; ++k) text << " " << kFiller[pick(8)];
    if (a.important) text << " notably";
    if (a.risk) text << " sell";
    if (a.sensitive) text << " biometric";
    text << " ref" << i << ".";
    s.text = text.str();
    doc.sentences.push_back(std::move(s));
  }
  c.documents.push_back(std::move(doc));
  return c;
}

inline std::filesystem::path temp_dir() {
  static const auto dir = [] {
    auto p = std::filesystem::temp_directory_path() /
             ("tcsi-test-" + std::to_string(std::random_device{}()) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

inline std::string write_temp(const std::string& name, const std::string& content) {
  const auto p = temp_dir() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p.string();
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tcsi::testing
