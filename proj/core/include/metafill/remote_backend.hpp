#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>

#include "metafill/lm_backend.hpp"

namespace metafill {

// Environment variable that overrides the configured scorer URL.
inline constexpr const char* kScorerUrlEnv = "METAFILL_SCORER_URL";

// Client for the scorer wire protocol (JSON over HTTP):
//   POST /v1/score  {"tokens":[...]}                          -> {"log_prob": x}
//   POST /v1/fill   {"template":..,"mask_position":p,"candidates":[[..]]|null,"k":k}
//                                                             -> {"fills":[{"tokens":[..],"log_score":x}]}
//   POST /v1/embed  {"tokens":[...]}                          -> {"vector":[...]}
//   GET  /v1/info                                             -> {"embedding_dim":d,"capabilities":[..]}
// Every call opens its own connection, so concurrent callers never share an
// in-flight request. Failures surface as TransportError.
class RemoteBackend final : public ScorerBackend {
 public:
  explicit RemoteBackend(std::string base_url,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

  BackendInfo info() const override;
  double score(const Tokens& tokens) const override;
  std::vector<Fill> fill(const MaskedTemplate& tmpl, std::size_t mask_position,
                         const std::vector<Tokens>* candidates, std::size_t k) const override;
  std::vector<double> embed(const Tokens& tokens) const override;

  const std::string& base_url() const { return base_url_; }

 private:
  std::string post(const std::string& path, const std::string& body) const;
  std::string get(const std::string& path) const;

  std::string base_url_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex info_mutex_;
  mutable std::optional<BackendInfo> info_;
};

// Wire-format helpers shared with the tests' in-process reference server.
namespace wire {
std::string score_request(const Tokens& tokens);
std::string fill_request(const MaskedTemplate& tmpl, std::size_t mask_position,
                         const std::vector<Tokens>* candidates, std::size_t k);
std::string embed_request(const Tokens& tokens);
std::string score_response(double log_prob);
std::string fill_response(const std::vector<Fill>& fills);
std::string embed_response(const std::vector<double>& vector);
std::string info_response(const BackendInfo& info);
std::string error_response(const std::string& message);
}  // namespace wire

}  // namespace metafill
