// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "tcsi/experts.hpp"
#include "tcsi/protocol.hpp"

namespace tcsi {

struct ExternalConfig {
  std::chrono::milliseconds timeout{10000};
};

/// Proxies the expert contract to a child process speaking the JSON-lines
/// protocol. Rewrites go out in text form, so each one is attributed an
/// encode. Calls are serialized; the backend reports itself single-threaded.
class ExternalBackend final : public ExpertBackend {
 public:
  ExternalBackend(const std::string& command, const ExternalConfig& config);

  Capabilities capabilities() const override { return caps_; }
  std::string tag() const override { return tag_; }
  /// Feature dimension announced by the backend (0 until known).
  std::size_t dim() const { return dim_; }

 protected:
  FeatureVector do_encode(std::string_view sentence) override;
  std::vector<double> do_scores(Task task, const FeatureVector& fv) const override;
  RewriteResult do_rewrite(const FeatureVector& fv, std::string_view sentence) override;
  void check_features(const FeatureVector& fv) const override;

 private:
  nlohmann::json checked_call(const std::string& op, nlohmann::json fields,
                              ExpertError::Kind failure) const;

  mutable ProtocolClient client_;
  Capabilities caps_;
  std::string tag_;
  std::size_t dim_ = 0;
};

/// Spawns `command` and performs the capabilities handshake.
/// Throws SpawnFailure if the process cannot be started or never answers.
std::unique_ptr<ExternalBackend> open_external_backend(const std::string& command,
                                                       const ExternalConfig& config = {});

}  // namespace tcsi
