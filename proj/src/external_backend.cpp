// SPDX-License-Identifier: Apache-2.0
#include "tcsi/external_backend.hpp"

#include <cmath>

namespace tcsi {

using nlohmann::json;

namespace {

ExpertError::Kind kind_from_message(const std::string& msg, ExpertError::Kind fallback) {
  for (auto k : {ExpertError::Kind::DimensionMismatch, ExpertError::Kind::UnsupportedTask,
                 ExpertError::Kind::EncodingFailure, ExpertError::Kind::GenerationFailure,
                 ExpertError::Kind::UnknownSentence}) {
    if (msg.rfind(std::string(error_kind_name(k)), 0) == 0) return k;
  }
  return fallback;
}

}  // namespace

ExternalBackend::ExternalBackend(const std::string& command, const ExternalConfig& config)
    : client_(command, config.timeout) {
  json resp;
  try {
    resp = client_.call("capabilities");
  } catch (const ExpertError& e) {
    if (e.kind() == ExpertError::Kind::BackendUnavailable) {
      throw ExpertError(ExpertError::Kind::SpawnFailure, "'" + command + "' did not start: " + e.what());
    }
    throw;
  }
  if (!resp["ok"].get<bool>()) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation,
                      "capabilities request failed: " + resp.value("error", std::string()));
  }
  auto list = resp.find("capabilities");
  if (list == resp.end() || !list->is_array()) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "capabilities response lacks a list");
  }
  for (const auto& c : *list) {
    if (!c.is_string()) continue;
    auto t = parse_task(c.get<std::string>());
    if (!t) continue;
    switch (*t) {
      case Task::Importance: caps_.importance = true; break;
      case Task::Topic: caps_.topic = true; break;
      case Task::Risk: caps_.risk = true; break;
      case Task::Sensitivity: caps_.sensitivity = true; break;
      case Task::Rewrite: caps_.rewrite = RewriteForm::Text; break;
    }
  }
  caps_.thread_safe = false;
  dim_ = resp.value("dim", std::size_t{0});
  tag_ = "external:" + resp.value("tag", command);
}

json ExternalBackend::checked_call(const std::string& op, json fields, ExpertError::Kind failure) const {
  json resp = client_.call(op, std::move(fields));
  if (!resp["ok"].get<bool>()) {
    const auto msg = resp.value("error", std::string("unspecified error"));
    throw ExpertError(kind_from_message(msg, failure), "backend: " + msg);
  }
  return resp;
}

FeatureVector ExternalBackend::do_encode(std::string_view sentence) {
  json resp = checked_call("encode", {{"text", std::string(sentence)}}, ExpertError::Kind::EncodingFailure);
  auto f = resp.find("features");
  if (f == resp.end() || !f->is_array() || f->empty()) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "encode response lacks features");
  }
  std::vector<float> values;
  values.reserve(f->size());
  for (const auto& v : *f) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ExpertError(ExpertError::Kind::ProtocolViolation, "non-finite feature value");
    }
    values.push_back(v.get<float>());
  }
  if (dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation,
                      "feature dimension " + std::to_string(values.size()) + " != " + std::to_string(dim_));
  }
  return FeatureVector::dense(std::move(values), tag_);
}

void ExternalBackend::check_features(const FeatureVector& fv) const {
  ExpertBackend::check_features(fv);
  if (dim_ != 0 && fv.dim() != dim_) {
    throw ExpertError(ExpertError::Kind::DimensionMismatch,
                      "expected " + std::to_string(dim_) + " features, got " + std::to_string(fv.dim()));
  }
}

std::vector<double> ExternalBackend::do_scores(Task task, const FeatureVector& fv) const {
  json feats = json::array();
  for (float v : fv.to_dense()) feats.push_back(v);
  json resp = checked_call("classify", {{"task", std::string(task_name(task))}, {"features", feats}},
                           ExpertError::Kind::ProtocolViolation);
  auto s = resp.find("scores");
  if (s == resp.end() || !s->is_object()) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "classify response lacks scores");
  }
  auto number = [](const json& v) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ExpertError(ExpertError::Kind::ProtocolViolation, "non-finite score");
    }
    return v.get<double>();
  };
  if (task == Task::Topic) {
    std::vector<double> out(kClassifiableCount, 0.0);
    for (auto it = s->begin(); it != s->end(); ++it) {
      auto cat = parse_category(it.key());
      auto idx = cat ? classifiable_index(*cat) : std::nullopt;
      if (!idx) throw ExpertError(ExpertError::Kind::ProtocolViolation, "unknown topic '" + it.key() + "'");
      out[*idx] = number(it.value());
    }
    return out;
  }
  if (auto p = s->find("positive"); p != s->end()) return {number(*p)};
  if (s->size() == 1) return {number(s->begin().value())};
  throw ExpertError(ExpertError::Kind::ProtocolViolation, "binary scores lack 'positive'");
}

RewriteResult ExternalBackend::do_rewrite(const FeatureVector&, std::string_view sentence) {
  json resp = checked_call("rewrite", {{"text", std::string(sentence)}}, ExpertError::Kind::GenerationFailure);
  auto t = resp.find("text");
  if (t == resp.end() || !t->is_string()) {
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "rewrite response lacks text");
  }
  return {t->get<std::string>(), resp.value("truncated", false)};
}

std::unique_ptr<ExternalBackend> open_external_backend(const std::string& command,
                                                       const ExternalConfig& config) {
  return std::make_unique<ExternalBackend>(command, config);
}

}  // namespace tcsi
