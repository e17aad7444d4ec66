#include <nlohmann/json.hpp>

#include "multirag/client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT_DISABLED
#include <httplib.h>

namespace multirag {

namespace {

// Splits "http://host:port/some/path" into (scheme://host:port, /some/path).
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpClient::HttpClient(std::string endpoint, std::string model,
                       std::string api_key)
    : model_(std::move(model)), api_key_(std::move(api_key)) {
  auto [host, path] = split_endpoint(endpoint);
  host_ = host;
  path_ = path;
}

std::string HttpClient::do_complete(const GenerationRequest& request) {
  nlohmann::json body = {
      {"model", model_},
      {"temperature", 0},
      {"messages",
       nlohmann::json::array(
           {{{"role", "user"}, {"content", request.prompt}}})},
  };

  httplib::Client cli(host_);
  cli.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res)
    raise(Errc::client_error,
          "no response from " + host_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    raise(Errc::client_error,
          "endpoint returned HTTP " + std::to_string(res->status));

  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded())
    raise(Errc::client_error, "endpoint returned invalid JSON");
  try {
    return parsed.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const nlohmann::json::exception&) {
    raise(Errc::client_error, "unexpected completion payload shape");
  }
}

}  // namespace multirag
