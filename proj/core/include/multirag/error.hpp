#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace multirag {

// Typed failure categories surfaced by the engine. Each maps 1:1 onto the
// error names used in the operation contracts.
enum class Errc {
  empty_input,
  malformed_table,
  malformed_tree,
  no_column_index,
  unknown_attribute,
  duplicate_document,
  no_extractable_content,
  client_error,
  reply_parse_error,
  precondition,
  unknown_entity,
  too_few_members,
  empty_content,
  no_candidates,
  empty_query,
  rate_too_high,
  io_error,
  config_error,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace multirag
