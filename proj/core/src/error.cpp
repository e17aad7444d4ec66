#include "multirag/error.hpp"

namespace multirag {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::empty_input: return "EmptyInput";
    case Errc::malformed_table: return "MalformedTable";
    case Errc::malformed_tree: return "MalformedTree";
    case Errc::no_column_index: return "NoColumnIndex";
    case Errc::unknown_attribute: return "UnknownAttribute";
    case Errc::duplicate_document: return "DuplicateDocument";
    case Errc::no_extractable_content: return "NoExtractableContent";
    case Errc::client_error: return "ClientError";
    case Errc::reply_parse_error: return "ReplyParseError";
    case Errc::precondition: return "PreconditionViolation";
    case Errc::unknown_entity: return "UnknownEntity";
    case Errc::too_few_members: return "TooFewMembers";
    case Errc::empty_content: return "EmptyContent";
    case Errc::no_candidates: return "NoCandidates";
    case Errc::empty_query: return "EmptyQuery";
    case Errc::rate_too_high: return "RateTooHigh";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace multirag
