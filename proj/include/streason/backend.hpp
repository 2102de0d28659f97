#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace streason {

// Completion backends must be safe for concurrent complete() calls.
class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
};

// Replays canned completions keyed by substring match against the prompt; the
// hermetic stand-in for a live model. Keys are typically the query text the
// prompt embeds.
class FixtureBackend : public CompletionBackend {
public:
  static FixtureBackend from_file(const std::string& path);  // {fixtures:[{query,completion}]}

  void add(std::string key, std::string completion);
  std::string complete(const std::string& prompt) override;  // BackendError when nothing matches
  std::string name() const override { return "fixture"; }

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct WireConfig {
  std::string url;       // e.g. http://host:port/v1/chat/completions
  std::string api_key;
  std::string model;
  double temperature = 0.7;
  int max_tokens = 4096;
  int timeout_seconds = 120;

  // Reads STREASON_API_URL / STREASON_API_KEY / STREASON_MODEL.
  static WireConfig from_env();
};

// Generic chat-completion client: POSTs {model, messages, temperature,
// max_tokens} and reads choices[0].message.content.
class WireBackend : public CompletionBackend {
public:
  explicit WireBackend(WireConfig config);
  std::string complete(const std::string& prompt) override;
  std::string name() const override { return "wire:" + config_.model; }

private:
  WireConfig config_;
  std::string host_;  // scheme://host[:port]
  std::string path_;
};

// complete() with up to `attempts` tries and exponential backoff on
// BackendError.
std::string complete_with_retry(CompletionBackend& backend, const std::string& prompt,
                                int attempts = 3, int initial_backoff_ms = 250);

}  // namespace streason
