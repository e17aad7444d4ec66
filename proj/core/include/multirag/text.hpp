#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace multirag {

// Inferred cell/literal type. The grammar is fixed: ISO-8601 dates (with an
// optional time part) and plain decimal numbers; everything else is a string.
enum class ValueType { string, number, date };

std::string_view to_string(ValueType t);
ValueType infer_value_type(std::string_view text);

// Lowercases ASCII in place semantics; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view s);

// Canonical surface form used for entity identity and value comparison:
// lowercased, outer whitespace trimmed, inner runs collapsed to one space.
std::string canonical_form(std::string_view s);

// Predicate/attribute key: lowercased with every non-alphanumeric byte
// removed, so "Directed_By", "directed by" and "directed-by" coincide.
std::string normalize_predicate(std::string_view s);

struct Token {
  std::string text;  // lowercased surface
  ValueType type = ValueType::string;

  bool operator==(const Token&) const = default;
};

// Splits on word boundaries; number and date/time spans are kept whole and
// tagged so "2024-10-01 14:30" stays a single comparable token.
std::vector<Token> tokenize(std::string_view text);

struct ChunkSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

// Fixed-size character windows with overlap; stride = size - overlap.
std::vector<ChunkSpan> chunk_spans(std::size_t length, std::size_t chunk_size,
                                   std::size_t overlap);

bool is_blank(std::string_view s);

}  // namespace multirag
