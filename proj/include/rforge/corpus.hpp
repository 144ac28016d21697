#pragma once

// Canonical question corpus: typed answer keys and line-delimited JSON
// persistence. Records are immutable values; one object per line, UTF-8,
// LF line endings.

#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rforge/util.hpp"

namespace rforge {

using json = nlohmann::ordered_json;

enum class KeyKind { Choice, Numeric, Text };

inline std::string to_string(KeyKind k) {
  switch (k) {
    case KeyKind::Choice: return "choice";
    case KeyKind::Numeric: return "numeric";
    case KeyKind::Text: return "text";
  }
  throw std::logic_error("bad KeyKind");
}

inline KeyKind key_kind_from_string(const std::string& s) {
  if (s == "choice") return KeyKind::Choice;
  if (s == "numeric") return KeyKind::Numeric;
  if (s == "text") return KeyKind::Text;
  throw DataError("unknown answer_key kind: " + s);
}

struct AnswerKey {
  KeyKind kind = KeyKind::Text;
  std::string choice_label;   // single letter A-J
  double numeric_value = 0.0;
  std::string text_value;

  static AnswerKey choice(char label) {
    AnswerKey k;
    k.kind = KeyKind::Choice;
    k.choice_label = std::string(1, label);
    k.validate();
    return k;
  }
  static AnswerKey numeric(double v) {
    AnswerKey k;
    k.kind = KeyKind::Numeric;
    k.numeric_value = v;
    k.validate();
    return k;
  }
  static AnswerKey text(std::string v) {
    AnswerKey k;
    k.kind = KeyKind::Text;
    k.text_value = std::move(v);
    return k;
  }

  void validate() const {
    switch (kind) {
      case KeyKind::Choice:
        if (choice_label.size() != 1 || choice_label[0] < 'A' || choice_label[0] > 'J')
          throw DataError("choice_label must be a single letter A-J, got '" + choice_label + "'");
        break;
      case KeyKind::Numeric:
        if (!std::isfinite(numeric_value))
          throw DataError("numeric_value must be finite");
        break;
      case KeyKind::Text:
        break;
    }
  }

  bool operator==(const AnswerKey& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case KeyKind::Choice: return choice_label == o.choice_label;
      case KeyKind::Numeric: return numeric_value == o.numeric_value;
      case KeyKind::Text: return text_value == o.text_value;
    }
    return false;
  }

  json to_json() const {
    json j;
    j["kind"] = to_string(kind);
    switch (kind) {
      case KeyKind::Choice: j["choice_label"] = choice_label; break;
      case KeyKind::Numeric: j["numeric_value"] = numeric_value; break;
      case KeyKind::Text: j["text_value"] = text_value; break;
    }
    return j;
  }

  static AnswerKey from_json(const json& j) {
    AnswerKey k;
    k.kind = key_kind_from_string(j.at("kind").get<std::string>());
    switch (k.kind) {
      case KeyKind::Choice: k.choice_label = j.at("choice_label").get<std::string>(); break;
      case KeyKind::Numeric: k.numeric_value = j.at("numeric_value").get<double>(); break;
      case KeyKind::Text: k.text_value = j.at("text_value").get<std::string>(); break;
    }
    k.validate();
    return k;
  }
};

enum class Domain { Science, Math, Logic, Other };

inline std::string to_string(Domain d) {
  switch (d) {
    case Domain::Science: return "science";
    case Domain::Math: return "math";
    case Domain::Logic: return "logic";
    case Domain::Other: return "other";
  }
  throw std::logic_error("bad Domain");
}

inline Domain domain_from_string(const std::string& s) {
  if (s == "science") return Domain::Science;
  if (s == "math") return Domain::Math;
  if (s == "logic") return Domain::Logic;
  if (s == "other") return Domain::Other;
  throw DataError("unknown domain: " + s);
}

struct QuestionRecord {
  std::string id;
  std::string dataset;
  Domain domain = Domain::Other;
  std::string prompt_text;
  AnswerKey answer_key;

  void validate() const {
    if (id.empty()) throw DataError("question id empty");
    if (prompt_text.empty()) throw DataError("prompt_text empty for question " + id);
    if (!valid_utf8(prompt_text)) throw DataError("prompt_text is not valid UTF-8 in " + id);
    answer_key.validate();
  }

  bool operator==(const QuestionRecord& o) const {
    return id == o.id && dataset == o.dataset && domain == o.domain &&
           prompt_text == o.prompt_text && answer_key == o.answer_key;
  }

  json to_json() const {
    json j;
    j["id"] = id;
    j["dataset"] = dataset;
    j["domain"] = to_string(domain);
    j["prompt_text"] = prompt_text;
    j["answer_key"] = answer_key.to_json();
    return j;
  }

  static QuestionRecord from_json(const json& j) {
    QuestionRecord r;
    r.id = j.at("id").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.domain = domain_from_string(j.at("domain").get<std::string>());
    r.prompt_text = j.at("prompt_text").get<std::string>();
    r.answer_key = AnswerKey::from_json(j.at("answer_key"));
    r.validate();
    return r;
  }
};

struct DatasetManifest {
  std::string name;
  std::string path;
  std::size_t count = 0;
  Domain domain = Domain::Other;
};

// Generic JSONL helpers. T must provide to_json() and static from_json().
template <typename T>
std::vector<T> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<T> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("parse error at " + path.string() + ":" + std::to_string(lineno) +
                      ": " + e.what());
    }
    try {
      records.push_back(T::from_json(j));
    } catch (const std::exception& e) {
      throw DataError("invalid record at " + path.string() + ":" + std::to_string(lineno) +
                      ": " + e.what());
    }
  }
  return records;
}

template <typename T>
std::size_t write_jsonl(const std::vector<T>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  for (const auto& r : records) {
    out << r.to_json().dump() << '\n';
    if (!out) throw DataError("write failed: " + path.string());
  }
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
  return records.size();
}

inline std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path) {
  auto records = load_jsonl<QuestionRecord>(path);
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (!seen.insert(r.id).second)
      throw DataError("duplicate question id '" + r.id + "' in " + path.string());
  return records;
}

}  // namespace rforge
