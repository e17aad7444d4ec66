#include "multirag/client.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

namespace multirag {

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::ner: return "ner";
    case RequestKind::triple: return "triple";
    case RequestKind::std_names: return "std";
    case RequestKind::logic_form: return "logic_form";
    case RequestKind::authority: return "authority";
    case RequestKind::answer: return "answer";
  }
  return "answer";
}

std::string make_request_key(RequestKind kind,
                             std::initializer_list<std::string_view> fields) {
  std::string key(to_string(kind));
  for (auto f : fields) {
    key.push_back('\n');
    key.append(f);
  }
  return key;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

void ClientStats::record(RequestKind kind, std::uint64_t elapsed_ns) {
  calls_total.fetch_add(1, std::memory_order_relaxed);
  client_time_ns.fetch_add(elapsed_ns, std::memory_order_relaxed);
  switch (kind) {
    case RequestKind::ner: calls_ner.fetch_add(1); break;
    case RequestKind::triple: calls_triple.fetch_add(1); break;
    case RequestKind::std_names: calls_std.fetch_add(1); break;
    case RequestKind::logic_form: calls_logic_form.fetch_add(1); break;
    case RequestKind::authority: calls_authority.fetch_add(1); break;
    case RequestKind::answer: calls_answer.fetch_add(1); break;
  }
}

std::uint64_t ClientStats::calls(RequestKind kind) const {
  switch (kind) {
    case RequestKind::ner: return calls_ner.load();
    case RequestKind::triple: return calls_triple.load();
    case RequestKind::std_names: return calls_std.load();
    case RequestKind::logic_form: return calls_logic_form.load();
    case RequestKind::authority: return calls_authority.load();
    case RequestKind::answer: return calls_answer.load();
  }
  return 0;
}

std::string GenerationClient::complete(const GenerationRequest& request) {
  if (budget_ > 0 &&
      stats_.calls_total.load(std::memory_order_relaxed) >= budget_)
    raise(Errc::client_error,
          "request budget of " + std::to_string(budget_) + " calls exhausted");
  auto start = std::chrono::steady_clock::now();
  std::string reply = do_complete(request);
  auto elapsed = std::chrono::steady_clock::now() - start;
  stats_.record(request.kind,
                std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed)
                    .count());
  return reply;
}

MockClient::MockClient(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) raise(Errc::io_error, "cannot open mock fixture " + fixture_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  load_fixture_text(text);
}

void MockClient::load_fixture_text(const std::string& json_text) {
  auto parsed = nlohmann::json::parse(json_text, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    raise(Errc::io_error, "mock fixture is not a JSON object");
  for (const auto& [key, value] : parsed.items()) {
    if (key.starts_with("_comment")) continue;
    if (!value.is_string())
      raise(Errc::io_error, "mock reply for '" + key + "' is not a string");
    add_reply(key, value.get<std::string>());
  }
}

void MockClient::add_reply(std::string key, std::string reply) {
  if (key.starts_with("_default/")) {
    defaults_[key.substr(9)] = std::move(reply);
    return;
  }
  if (key.starts_with("@")) {
    std::size_t n = std::stoul(key.substr(1));
    if (ordinal_.size() <= n) ordinal_.resize(n + 1);
    ordinal_[n] = std::move(reply);
    return;
  }
  replies_[std::move(key)] = std::move(reply);
}

void MockClient::add_default(RequestKind kind, std::string reply) {
  defaults_[std::string(to_string(kind))] = std::move(reply);
}

std::string MockClient::do_complete(const GenerationRequest& request) {
  const std::uint64_t ordinal = next_ordinal_.fetch_add(1);
  if (auto it = replies_.find(request.key); it != replies_.end())
    return it->second;
  if (auto it = replies_.find(fnv1a64_hex(request.key)); it != replies_.end())
    return it->second;
  if (ordinal < ordinal_.size() && !ordinal_[ordinal].empty())
    return ordinal_[ordinal];
  if (auto it = defaults_.find(std::string(to_string(request.kind)));
      it != defaults_.end())
    return it->second;
  raise(Errc::client_error,
        "no canned reply for request key '" + request.key + "'");
}

}  // namespace multirag
