#include "multirag/text.hpp"

#include <algorithm>
#include <cctype>

namespace multirag {

namespace {

inline bool ascii_digit(char c) { return c >= '0' && c <= '9'; }

inline bool word_byte(unsigned char c) {
  // Letters, digits, and any non-ASCII byte count as word content.
  return std::isalnum(c) != 0 || c >= 0x80;
}

std::size_t digits_at(std::string_view s, std::size_t pos, std::size_t max) {
  std::size_t n = 0;
  while (pos + n < s.size() && n < max && ascii_digit(s[pos + n])) ++n;
  return n;
}

// Matches HH:MM(:SS)? at pos, returns matched length or 0.
std::size_t match_time(std::string_view s, std::size_t pos) {
  if (digits_at(s, pos, 2) != 2 || pos + 2 >= s.size() || s[pos + 2] != ':')
    return 0;
  if (digits_at(s, pos + 3, 2) != 2) return 0;
  std::size_t len = 5;
  if (pos + len + 2 < s.size() + 1 && pos + len < s.size() &&
      s[pos + len] == ':' && digits_at(s, pos + len + 1, 2) == 2) {
    len += 3;
  }
  // Reject if more digits follow (e.g. "12:345").
  if (pos + len < s.size() && ascii_digit(s[pos + len])) return 0;
  return len;
}

// Matches YYYY-MM-DD at pos with an optional "T" or " " time suffix.
std::size_t match_date(std::string_view s, std::size_t pos) {
  if (digits_at(s, pos, 4) != 4) return 0;
  if (pos + 4 >= s.size() || s[pos + 4] != '-') return 0;
  if (digits_at(s, pos + 5, 2) != 2) return 0;
  if (pos + 7 >= s.size() || s[pos + 7] != '-') return 0;
  if (digits_at(s, pos + 8, 2) != 2) return 0;
  std::size_t len = 10;
  if (pos + len < s.size() && ascii_digit(s[pos + len])) return 0;
  if (pos + len < s.size() && (s[pos + len] == 'T' || s[pos + len] == ' ')) {
    std::size_t t = match_time(s, pos + len + 1);
    if (t > 0) len += 1 + t;
  }
  return len;
}

// Matches [+-]?digits(.digits)? at pos; must not sit inside a word.
std::size_t match_number(std::string_view s, std::size_t pos) {
  std::size_t p = pos;
  if (p < s.size() && (s[p] == '+' || s[p] == '-')) ++p;
  std::size_t ints = 0;
  while (p < s.size() && ascii_digit(s[p])) ++p, ++ints;
  if (ints == 0) return 0;
  if (p < s.size() && s[p] == '.') {
    std::size_t fracs = 0;
    std::size_t q = p + 1;
    while (q < s.size() && ascii_digit(s[q])) ++q, ++fracs;
    if (fracs > 0) p = q;
  }
  // A trailing letter means this is part of a word token like "CA981".
  if (p < s.size() && word_byte(static_cast<unsigned char>(s[p]))) return 0;
  return p - pos;
}

}  // namespace

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::number: return "number";
    case ValueType::date: return "date";
  }
  return "string";
}

ValueType infer_value_type(std::string_view text) {
  // Trim outer whitespace before classifying.
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string_view s = text.substr(b, e - b);
  if (s.empty()) return ValueType::string;
  if (match_date(s, 0) == s.size()) return ValueType::date;
  if (match_time(s, 0) == s.size()) return ValueType::date;
  if (match_number(s, 0) == s.size()) return ValueType::number;
  return ValueType::string;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string canonical_form(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string normalize_predicate(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80)
      out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[pos]);
    if (std::isspace(c)) {
      ++pos;
      continue;
    }
    if (std::size_t len = match_date(text, pos); len > 0) {
      tokens.push_back({ascii_lower(text.substr(pos, len)), ValueType::date});
      pos += len;
      continue;
    }
    if (std::size_t len = match_time(text, pos); len > 0) {
      tokens.push_back({ascii_lower(text.substr(pos, len)), ValueType::date});
      pos += len;
      continue;
    }
    if (ascii_digit(static_cast<char>(c))) {
      if (std::size_t len = match_number(text, pos); len > 0) {
        tokens.push_back(
            {ascii_lower(text.substr(pos, len)), ValueType::number});
        pos += len;
        continue;
      }
    }
    if (word_byte(c)) {
      std::size_t end = pos;
      while (end < text.size() &&
             word_byte(static_cast<unsigned char>(text[end])))
        ++end;
      tokens.push_back(
          {ascii_lower(text.substr(pos, end - pos)), ValueType::string});
      pos = end;
      continue;
    }
    ++pos;  // punctuation
  }
  return tokens;
}

std::vector<ChunkSpan> chunk_spans(std::size_t length, std::size_t chunk_size,
                                   std::size_t overlap) {
  std::vector<ChunkSpan> spans;
  if (length == 0 || chunk_size == 0) return spans;
  if (overlap >= chunk_size) overlap = chunk_size - 1;
  const std::size_t stride = chunk_size - overlap;
  std::size_t begin = 0;
  while (true) {
    std::size_t end = std::min(begin + chunk_size, length);
    spans.push_back({begin, end});
    if (end == length) break;
    begin += stride;
  }
  return spans;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

}  // namespace multirag
