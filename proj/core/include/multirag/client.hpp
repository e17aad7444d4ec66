#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "multirag/error.hpp"

namespace multirag {

// Role of a generation request; determines the expected reply grammar.
enum class RequestKind { ner, triple, std_names, logic_form, authority, answer };

std::string_view to_string(RequestKind kind);

struct GenerationRequest {
  RequestKind kind = RequestKind::answer;
  std::string prompt;  // full rendered prompt (sent to live endpoints)
  std::string key;     // canonical lookup key (drives mock fixtures)
};

// Canonical key = "<kind>\n<field1>\n<field2>..." over the semantically
// identifying fields of a request; stable across prompt template changes.
std::string make_request_key(RequestKind kind,
                             std::initializer_list<std::string_view> fields);

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

struct ClientStats {
  std::atomic<std::uint64_t> calls_total{0};
  std::atomic<std::uint64_t> calls_ner{0};
  std::atomic<std::uint64_t> calls_triple{0};
  std::atomic<std::uint64_t> calls_std{0};
  std::atomic<std::uint64_t> calls_logic_form{0};
  std::atomic<std::uint64_t> calls_authority{0};
  std::atomic<std::uint64_t> calls_answer{0};
  std::atomic<std::uint64_t> client_time_ns{0};

  void record(RequestKind kind, std::uint64_t elapsed_ns);
  std::uint64_t calls(RequestKind kind) const;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;

  // Returns the raw reply text; throws Error(Errc::client_error) on failure
  // or when the request budget is exhausted.
  std::string complete(const GenerationRequest& request);

  // Hard cap on total calls; 0 means unlimited.
  void set_budget(std::uint64_t max_calls) { budget_ = max_calls; }
  std::uint64_t budget() const { return budget_; }

  ClientStats& stats() { return stats_; }
  const ClientStats& stats() const { return stats_; }

 protected:
  virtual std::string do_complete(const GenerationRequest& request) = 0;

 private:
  ClientStats stats_;
  std::uint64_t budget_ = 0;
};

// Deterministic fixture-driven client. The fixture file is a JSON object
// mapping request keys to canned reply strings. Accepted key forms:
//   - canonical request key (see make_request_key)
//   - 16-hex-digit FNV-1a hash of the canonical key
//   - "@<n>" matching the n-th call overall (0-based)
//   - "_default/<kind>" fallback used when no specific entry matches
// Keys starting with "_comment" are ignored.
class MockClient : public GenerationClient {
 public:
  MockClient() = default;
  explicit MockClient(const std::string& fixture_path);

  void add_reply(std::string key, std::string reply);
  void add_default(RequestKind kind, std::string reply);
  void load_fixture_text(const std::string& json_text);

 protected:
  std::string do_complete(const GenerationRequest& request) override;

 private:
  std::map<std::string, std::string> replies_;
  std::map<std::string, std::string> defaults_;  // keyed by kind name
  std::vector<std::string> ordinal_;
  std::atomic<std::uint64_t> next_ordinal_{0};
};

// Single JSON request/response per prompt against an OpenAI-style chat
// endpoint; temperature is pinned to 0.
class HttpClient : public GenerationClient {
 public:
  HttpClient(std::string endpoint, std::string model, std::string api_key);

 protected:
  std::string do_complete(const GenerationRequest& request) override;

 private:
  std::string host_;
  std::string path_;
  std::string model_;
  std::string api_key_;
};

}  // namespace multirag
