#include "streason/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "streason/errors.hpp"

using nlohmann::json;

namespace streason {

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open fixtures file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("fixtures file: ") + e.what());
  }
  FixtureBackend backend;
  try {
    for (const auto& f : doc.at("fixtures"))
      backend.add(f.at("query").get<std::string>(), f.at("completion").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("fixtures file: ") + e.what());
  }
  return backend;
}

void FixtureBackend::add(std::string key, std::string completion) {
  entries_.emplace_back(std::move(key), std::move(completion));
}

std::string FixtureBackend::complete(const std::string& prompt) {
  // Match against the final "Query:" section only; generator prompts embed
  // other queries as in-context examples and those must not trigger fixtures.
  std::size_t tail_start = prompt.rfind("Query:");
  std::string_view tail(prompt);
  if (tail_start != std::string::npos) tail = tail.substr(tail_start);
  for (const auto& [key, completion] : entries_)
    if (!key.empty() && tail.find(key) != std::string_view::npos) return completion;
  throw Error(ErrKind::Backend, "no fixture matches the prompt");
}

WireConfig WireConfig::from_env() {
  WireConfig cfg;
  if (const char* url = std::getenv("STREASON_API_URL")) cfg.url = url;
  if (const char* key = std::getenv("STREASON_API_KEY")) cfg.api_key = key;
  if (const char* model = std::getenv("STREASON_MODEL")) cfg.model = model;
  return cfg;
}

WireBackend::WireBackend(WireConfig config) : config_(std::move(config)) {
  if (config_.url.empty())
    throw Error(ErrKind::Backend, "no endpoint configured (set STREASON_API_URL)");
  // scheme://host[:port]/path
  auto scheme_end = config_.url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = config_.url.find('/', host_start);
  if (path_start == std::string::npos) {
    host_ = config_.url;
    path_ = "/";
  } else {
    host_ = config_.url.substr(0, path_start);
    path_ = config_.url.substr(path_start);
  }
}

std::string WireBackend::complete(const std::string& prompt) {
  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);

  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config_.temperature},
               {"max_tokens", config_.max_tokens}};
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res)
    throw Error(ErrKind::Backend, "transport failure talking to " + host_);
  if (res->status != 200)
    throw Error(ErrKind::Backend,
                "endpoint returned status " + std::to_string(res->status) + ": " + res->body);
  try {
    json doc = json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrKind::Backend, std::string("malformed completion response: ") + e.what());
  }
}

std::string complete_with_retry(CompletionBackend& backend, const std::string& prompt,
                                int attempts, int initial_backoff_ms) {
  int backoff = initial_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.complete(prompt);
    } catch (const Error& e) {
      if (e.kind != ErrKind::Backend || attempt >= attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
}

}  // namespace streason
