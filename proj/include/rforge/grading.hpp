#pragma once

// Final-answer extraction from CoT responses and canonical equality against
// typed answer keys. All functions here are pure and total over arbitrary
// model text: anything unparseable grades as F rather than erroring.

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "rforge/corpus.hpp"
#include "rforge/util.hpp"

namespace rforge {

struct ExtractedAnswer {
  std::string raw_span;
  bool extraction_ok = false;
};

// The content after the LAST line beginning "Answer:" (case-insensitive,
// leading whitespace allowed), trimmed. Models sometimes restate; the
// generation prompt places the final answer last.
inline ExtractedAnswer extract_answer(std::string_view response_text) {
  ExtractedAnswer result;
  for (const auto& line : split_lines(response_text)) {
    std::string_view v = line;
    std::size_t b = 0;
    while (b < v.size() && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
    v.remove_prefix(b);
    if (starts_with_ci(v, "answer:")) {
      result.raw_span = trim(v.substr(7));
      result.extraction_ok = true;
    }
  }
  return result;
}

namespace detail {

// Unwraps \boxed{...} and markdown emphasis around a span.
inline std::string unwrap_span(std::string str) {
  std::string s = trim(str);
  for (;;) {
    std::string prev = s;
    if (s.size() >= 2 && s.front() == '*' && s.back() == '*')
      s = trim(s.substr(1, s.size() - 2));
    if (s.size() >= 2 && s.front() == '`' && s.back() == '`')
      s = trim(s.substr(1, s.size() - 2));
    const std::string boxed = "\\boxed{";
    if (s.size() > boxed.size() && s.rfind(boxed, 0) == 0 && s.back() == '}')
      s = trim(s.substr(boxed.size(), s.size() - boxed.size() - 1));
    if (s == prev) break;
  }
  return s;
}

// "(B)", "B.", "b)" -> 'B'. Empty optional when the span is not a single
// choice letter after stripping punctuation.
inline std::optional<char> normalize_choice(std::string_view span) {
  std::string s = unwrap_span(std::string(span));
  std::string letters;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) letters.push_back(c);
    else if (c != '(' && c != ')' && c != '[' && c != ']' && c != '.' && c != ':' &&
             c != ',' && c != '\'' && c != '"' && !std::isspace(static_cast<unsigned char>(c)))
      return std::nullopt;
  }
  if (letters.size() != 1) return std::nullopt;
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letters[0])));
  if (up < 'A' || up > 'J') return std::nullopt;
  return up;
}

inline std::optional<double> parse_plain_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

// Decimal, scientific notation, or simple fraction a/b. Commas as thousands
// separators are stripped.
inline std::optional<double> normalize_numeric(std::string_view span) {
  std::string s = unwrap_span(std::string(span));
  std::string cleaned;
  for (char c : s)
    if (c != ',' && c != '$' && c != '%' && !std::isspace(static_cast<unsigned char>(c)))
      cleaned.push_back(c);
  if (cleaned.empty()) return std::nullopt;
  std::size_t slash = cleaned.find('/');
  if (slash != std::string::npos && slash > 0 && slash + 1 < cleaned.size()) {
    auto num = parse_plain_number(std::string_view(cleaned).substr(0, slash));
    auto den = parse_plain_number(std::string_view(cleaned).substr(slash + 1));
    if (num && den && *den != 0.0) return *num / *den;
    return std::nullopt;
  }
  return parse_plain_number(cleaned);
}

inline bool numeric_equal(double a, double b) {
  double diff = std::fabs(a - b);
  double scale = std::max(std::fabs(a), std::fabs(b));
  return diff <= std::max(1e-9, 1e-6 * scale);
}

// Case-fold, collapse internal whitespace, strip trailing period.
inline std::string normalize_text(std::string_view span) {
  std::string s = to_lower(trim(span));
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

}  // namespace detail

inline bool answers_equal(const ExtractedAnswer& candidate, const AnswerKey& key) {
  if (!candidate.extraction_ok) return false;
  switch (key.kind) {
    case KeyKind::Choice: {
      auto c = detail::normalize_choice(candidate.raw_span);
      return c && *c == key.choice_label[0];
    }
    case KeyKind::Numeric: {
      auto v = detail::normalize_numeric(candidate.raw_span);
      return v && detail::numeric_equal(*v, key.numeric_value);
    }
    case KeyKind::Text:
      return detail::normalize_text(candidate.raw_span) ==
             detail::normalize_text(key.text_value);
  }
  return false;
}

// Canonical equality between two extracted answers, interpreted under the
// key kind of the question's ground truth. Failed extractions form their own
// equivalence class: they match only other failed extractions with identical
// raw spans.
inline bool extracted_equal(const ExtractedAnswer& a, const ExtractedAnswer& b, KeyKind kind) {
  if (!a.extraction_ok || !b.extraction_ok)
    return a.extraction_ok == b.extraction_ok && a.raw_span == b.raw_span;
  switch (kind) {
    case KeyKind::Choice: {
      auto ca = detail::normalize_choice(a.raw_span);
      auto cb = detail::normalize_choice(b.raw_span);
      if (ca && cb) return *ca == *cb;
      if (!ca && !cb) return detail::normalize_text(a.raw_span) == detail::normalize_text(b.raw_span);
      return false;
    }
    case KeyKind::Numeric: {
      auto va = detail::normalize_numeric(a.raw_span);
      auto vb = detail::normalize_numeric(b.raw_span);
      if (va && vb) return detail::numeric_equal(*va, *vb);
      if (!va && !vb) return detail::normalize_text(a.raw_span) == detail::normalize_text(b.raw_span);
      return false;
    }
    case KeyKind::Text:
      return detail::normalize_text(a.raw_span) == detail::normalize_text(b.raw_span);
  }
  return false;
}

enum class Correctness : char { T = 'T', F = 'F' };

inline Correctness grade(std::string_view response_text, const AnswerKey& key) {
  return answers_equal(extract_answer(response_text), key) ? Correctness::T : Correctness::F;
}

}  // namespace rforge
