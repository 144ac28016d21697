#pragma once

// Desk-scale fixtures: a 50-question toy corpus with typed keys and a
// scripted mock-backend pool per (question, model, sample index). Pool
// shapes are chosen so every quadrant, both tau boundaries (3/5 and 2/5
// agreement), unanimous pools, and extraction failures all occur.

#include <string>
#include <vector>

#include "rforge/backend.hpp"
#include "rforge/corpus.hpp"
#include "rforge/util.hpp"

namespace rforge::fixtures {

inline const std::vector<std::string> kModels = {"model-a", "model-b", "model-c"};
inline constexpr int kSamplesPerModel = 5;

struct ScriptEntry {
  std::string question_id;
  std::string model;
  int index = 0;
  std::string text;

  json to_json() const {
    json j;
    j["question_id"] = question_id;
    j["model"] = model;
    j["index"] = index;
    j["text"] = text;
    return j;
  }
  static ScriptEntry from_json(const json& j) {
    ScriptEntry e;
    e.question_id = j.at("question_id").get<std::string>();
    e.model = j.at("model").get<std::string>();
    e.index = j.at("index").get<int>();
    e.text = j.at("text").get<std::string>();
    return e;
  }
};

struct FixtureSet {
  std::vector<QuestionRecord> corpus;
  std::vector<ScriptEntry> script;
};

namespace detail {

inline std::string cot(const std::string& answer_line) {
  return "Explanation: worked through the steps.\nAnswer: " + answer_line;
}

// Pool patterns over 5 samples. "correct" entries render the key's answer;
// integers select among distinct wrong answers; -1 renders a response with
// no extractable answer line.
struct Pattern {
  const char* name;
  std::array<int, 5> slots;  // 9 = correct, 0..3 = wrong variant, -1 = no marker
};

inline const std::vector<Pattern>& patterns() {
  static const std::vector<Pattern> p = {
      {"unanimous_correct", {9, 9, 9, 9, 9}},
      {"boundary_3_2", {9, 9, 9, 0, 0}},       // T&C at u=0.6, F&U at 0.4
      {"boundary_2_3", {9, 9, 0, 0, 0}},       // T&U at u=0.4, F&C at 0.6
      {"lucky_guess", {9, 0, 0, 0, 0}},        // T&U at u=0.2, F&C at 0.8
      {"unanimous_wrong", {0, 0, 0, 0, 0}},
      {"scattered", {9, 0, 1, 2, 3}},          // everything uncertain
      {"extraction_fail", {9, 9, 9, -1, -1}},  // unparseable tail pair
      {"mostly_wrong", {0, 0, 0, 9, 0}},       // wrong greedy answer, 1/5 correct
  };
  return p;
}

inline std::string render_answer(const QuestionRecord& q, int slot) {
  if (slot == 9) {
    switch (q.answer_key.kind) {
      case KeyKind::Choice: return q.answer_key.choice_label;
      case KeyKind::Numeric: {
        std::ostringstream ss;
        ss.precision(12);
        ss << q.answer_key.numeric_value;
        return ss.str();
      }
      case KeyKind::Text: return q.answer_key.text_value;
    }
  }
  switch (q.answer_key.kind) {
    case KeyKind::Choice: {
      char wrong = static_cast<char>('A' + (q.answer_key.choice_label[0] - 'A' + 1 + slot % 3) % 4);
      return std::string(1, wrong);
    }
    case KeyKind::Numeric: {
      std::ostringstream ss;
      ss.precision(12);
      ss << q.answer_key.numeric_value + 1.0 + slot;
      return ss.str();
    }
    case KeyKind::Text:
      return q.answer_key.text_value + " not really variant " + std::to_string(slot);
  }
  throw std::logic_error("bad slot");
}

}  // namespace detail

inline FixtureSet generate_fixtures(std::uint64_t seed = 17) {
  FixtureSet out;

  auto add_question = [&](std::string id, KeyKind kind, int i) {
    QuestionRecord q;
    q.id = std::move(id);
    q.dataset = "toy";
    q.domain = kind == KeyKind::Numeric ? Domain::Math
               : kind == KeyKind::Choice ? Domain::Science
                                         : Domain::Logic;
    switch (kind) {
      case KeyKind::Choice:
        q.prompt_text = "Toy question " + q.id + ": which option is marked correct?\n"
                        "A) alpha\nB) beta\nC) gamma\nD) delta";
        q.answer_key = AnswerKey::choice(static_cast<char>('A' + i % 4));
        break;
      case KeyKind::Numeric:
        q.prompt_text = "Toy question " + q.id + ": compute the marked value.";
        q.answer_key = AnswerKey::numeric(static_cast<double>((i * 37) % 200) + 0.5);
        break;
      case KeyKind::Text:
        q.prompt_text = "Toy question " + q.id + ": state the marked conclusion.";
        q.answer_key = AnswerKey::text(i % 2 == 0 ? "Entailment" : "Contradiction");
        break;
    }
    out.corpus.push_back(std::move(q));
  };

  // Two named boundary questions the tests reference directly, then a mix of
  // kinds up to 50.
  add_question("fx-boundary", KeyKind::Choice, 1);
  add_question("fx-lucky", KeyKind::Choice, 2);
  for (int i = 2; i < 50; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fx-%03d", i);
    KeyKind kind = i % 3 == 0 ? KeyKind::Numeric : i % 3 == 1 ? KeyKind::Choice : KeyKind::Text;
    add_question(buf, kind, i);
  }

  // Deterministic pattern assignment; seed shifts the rotation. The first
  // model doubles as the reference model for dataset selection, so its
  // patterns alternate first-sample correctness: the toy dataset's greedy
  // accuracy lands mid-band (26/50) and survives the retention filter.
  const auto& pats = detail::patterns();
  const std::array<std::size_t, 6> right_first = {0, 1, 2, 3, 5, 6};
  for (std::size_t qi = 0; qi < out.corpus.size(); ++qi) {
    const auto& q = out.corpus[qi];
    for (std::size_t mi = 0; mi < kModels.size(); ++mi) {
      const detail::Pattern* pat;
      if (q.id == "fx-boundary") pat = &pats[1];       // exactly 3/5 on the correct answer
      else if (q.id == "fx-lucky") pat = &pats[3];     // correct appears 1/5
      else if (mi == 0 && qi % 2 == 1) pat = &pats[qi / 2 % 2 == 0 ? 7 : 4];
      else if (mi == 0) pat = &pats[right_first[(qi / 2 + seed) % right_first.size()]];
      else pat = &pats[(qi * kModels.size() + mi + seed) % pats.size()];
      for (int j = 0; j < kSamplesPerModel; ++j) {
        ScriptEntry e;
        e.question_id = q.id;
        e.model = kModels[mi];
        e.index = j;
        int slot = pat->slots[static_cast<std::size_t>(j)];
        if (slot == -1)
          e.text = "Explanation: trailed off before concluding anything usable.";
        else
          e.text = detail::cot(detail::render_answer(q, slot));
        out.script.push_back(std::move(e));
      }
    }
  }
  return out;
}

inline MockBackend make_mock_backend(const std::vector<ScriptEntry>& script) {
  MockBackend backend;
  for (const auto& e : script) backend.script(e.question_id, e.model, e.index, e.text);
  return backend;
}

}  // namespace rforge::fixtures
