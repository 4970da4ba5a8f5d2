#pragma once

// In-process scorer server that answers the wire protocol by delegating to a
// local backend. Requests are recorded so tests can compare golden bodies.

#include <httplib.h>

#include <json.hpp>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "metafill/lm_backend.hpp"
#include "metafill/remote_backend.hpp"
#include "metafill/verbalizer.hpp"

namespace metafill::testing {

class ReferenceServer {
 public:
  explicit ReferenceServer(const ScorerBackend& backend) : backend_(backend) {
    using nlohmann::json;
    auto guarded = [this](auto handler) {
      return [this, handler](const httplib::Request& req, httplib::Response& res) {
        {
          std::lock_guard lock(mutex_);
          requests_.push_back(req.path + " " + req.body);
        }
        try {
          res.set_content(handler(req), "application/json");
        } catch (const std::exception& e) {
          res.status = 400;
          res.set_content(wire::error_response(e.what()), "application/json");
        }
      };
    };
    server_.Post("/v1/score", guarded([this](const httplib::Request& req) {
      return wire::score_response(backend_.score(json::parse(req.body).at("tokens").get<Tokens>()));
    }));
    server_.Post("/v1/embed", guarded([this](const httplib::Request& req) {
      return wire::embed_response(backend_.embed(json::parse(req.body).at("tokens").get<Tokens>()));
    }));
    server_.Post("/v1/fill", guarded([this](const httplib::Request& req) {
      const auto body = json::parse(req.body);
      const auto tmpl = template_from_json(body.at("template").dump());
      std::vector<Tokens> cands;
      const bool has = !body.at("candidates").is_null();
      if (has) cands = body.at("candidates").get<std::vector<Tokens>>();
      return wire::fill_response(backend_.fill(tmpl, body.at("mask_position").get<std::size_t>(),
                                               has ? &cands : nullptr, body.at("k").get<std::size_t>()));
    }));
    server_.Get("/v1/info", guarded([this](const httplib::Request&) {
      return wire::info_response(backend_.info());
    }));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ReferenceServer() {
    server_.stop();
    thread_.join();
  }

  ReferenceServer(const ReferenceServer&) = delete;
  ReferenceServer& operator=(const ReferenceServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<std::string> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  const ScorerBackend& backend_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::vector<std::string> requests_;
};

// A port that was free a moment ago; nothing listens on it.
inline int closed_port() {
  httplib::Server probe;
  return probe.bind_to_any_port("127.0.0.1");
}

}  // namespace metafill::testing
