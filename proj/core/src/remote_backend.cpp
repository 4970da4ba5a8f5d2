#include "metafill/remote_backend.hpp"

#include <httplib.h>
#include <json.hpp>

#include "metafill/errors.hpp"

namespace metafill {

using nlohmann::json;

namespace wire {

std::string score_request(const Tokens& tokens) { return json{{"tokens", tokens}}.dump(); }

std::string fill_request(const MaskedTemplate& tmpl, std::size_t mask_position,
                         const std::vector<Tokens>* candidates, std::size_t k) {
  json body = {{"template", json::parse(template_to_json(tmpl))},
               {"mask_position", mask_position},
               {"k", k}};
  body["candidates"] = candidates ? json(*candidates) : json(nullptr);
  return body.dump();
}

std::string embed_request(const Tokens& tokens) { return json{{"tokens", tokens}}.dump(); }

std::string score_response(double log_prob) { return json{{"log_prob", log_prob}}.dump(); }

std::string fill_response(const std::vector<Fill>& fills) {
  json arr = json::array();
  for (const auto& f : fills) arr.push_back({{"tokens", f.tokens}, {"log_score", f.log_score}});
  return json{{"fills", arr}}.dump();
}

std::string embed_response(const std::vector<double>& vector) {
  return json{{"vector", vector}}.dump();
}

std::string info_response(const BackendInfo& info) {
  return json{{"embedding_dim", info.embedding_dim}, {"capabilities", info.capabilities}}.dump();
}

std::string error_response(const std::string& message) { return json{{"error", message}}.dump(); }

}  // namespace wire

namespace {

json parse_reply(const std::string& body, const std::string& path) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(path + ": malformed response: " + e.what());
  }
}

template <typename Fn>
auto read_field(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw TransportError(path + ": unexpected response shape: " + e.what());
  }
}

}  // namespace

RemoteBackend::RemoteBackend(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.empty()) throw UsageError("remote backend needs a URL");
}

std::string RemoteBackend::post(const std::string& path, const std::string& body) const {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Post(path, body, "application/json");
  if (!res)
    throw TransportError(base_url_ + path + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    std::string detail = res->body;
    try {
      detail = json::parse(res->body).at("error").get<std::string>();
    } catch (const json::exception&) {
    }
    throw TransportError(base_url_ + path + ": HTTP " + std::to_string(res->status) + ": " + detail);
  }
  return res->body;
}

std::string RemoteBackend::get(const std::string& path) const {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Get(path);
  if (!res)
    throw TransportError(base_url_ + path + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError(base_url_ + path + ": HTTP " + std::to_string(res->status));
  return res->body;
}

BackendInfo RemoteBackend::info() const {
  std::lock_guard lock(info_mutex_);
  if (!info_) {
    auto doc = parse_reply(get("/v1/info"), "/v1/info");
    info_ = read_field("/v1/info", [&] {
      return BackendInfo{doc.at("embedding_dim").get<std::size_t>(),
                         doc.at("capabilities").get<std::vector<std::string>>()};
    });
  }
  return *info_;
}

double RemoteBackend::score(const Tokens& tokens) const {
  if (tokens.empty()) throw UsageError("score: empty sequence");
  auto doc = parse_reply(post("/v1/score", wire::score_request(tokens)), "/v1/score");
  return read_field("/v1/score", [&] { return doc.at("log_prob").get<double>(); });
}

std::vector<Fill> RemoteBackend::fill(const MaskedTemplate& tmpl, std::size_t mask_position,
                                      const std::vector<Tokens>* candidates, std::size_t k) const {
  auto doc = parse_reply(post("/v1/fill", wire::fill_request(tmpl, mask_position, candidates, k)),
                         "/v1/fill");
  return read_field("/v1/fill", [&] {
    std::vector<Fill> fills;
    for (const auto& f : doc.at("fills"))
      fills.push_back({f.at("tokens").get<Tokens>(), f.at("log_score").get<double>()});
    return fills;
  });
}

std::vector<double> RemoteBackend::embed(const Tokens& tokens) const {
  if (tokens.empty()) throw UsageError("embed: empty sequence");
  auto doc = parse_reply(post("/v1/embed", wire::embed_request(tokens)), "/v1/embed");
  return read_field("/v1/embed", [&] { return doc.at("vector").get<std::vector<double>>(); });
}

}  // namespace metafill
