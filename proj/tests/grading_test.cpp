#include <doctest.h>

#include <random>

#include "rforge/grading.hpp"

using namespace rforge;

TEST_CASE("extract_answer basic format") {
  auto a = extract_answer("Explanation: because.\nAnswer: B");
  CHECK(a.extraction_ok);
  CHECK(a.raw_span == "B");
}

TEST_CASE("extract_answer absence") {
  CHECK_FALSE(extract_answer("no answer marker here").extraction_ok);
  CHECK_FALSE(extract_answer("").extraction_ok);
}

TEST_CASE("extract_answer takes the last Answer line") {
  auto a = extract_answer("Answer: A\n...revised...\nAnswer: C");
  CHECK(a.raw_span == "C");
}

// Independent scan oracle for the last-occurrence rule: find the final
// "answer:" line by reverse iteration over raw lines.
TEST_CASE("last-occurrence rule matches a reverse-scan oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> nlines(0, 12), coin(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> lines;
    int n = nlines(rng);
    for (int i = 0; i < n; ++i) {
      switch (coin(rng)) {
        case 0: lines.push_back("Answer: v" + std::to_string(i)); break;
        case 1: lines.push_back("  answer: v" + std::to_string(i)); break;
        case 2: lines.push_back("some reasoning " + std::to_string(i)); break;
        default: lines.push_back("the answer: is embedded mid-sentence"); break;
      }
    }
    std::string text;
    for (const auto& l : lines) text += l + "\n";

    std::string expected;
    bool found = false;
    for (auto it = lines.rbegin(); it != lines.rend() && !found; ++it) {
      std::string t = trim(*it);
      if (starts_with_ci(t, "answer:")) {
        expected = trim(t.substr(7));
        found = true;
      }
    }
    auto got = extract_answer(text);
    CHECK(got.extraction_ok == found);
    if (found) CHECK(got.raw_span == expected);
  }
}

TEST_CASE("extract_answer allows leading whitespace and any case") {
  CHECK(extract_answer("  ANSWER:  42 ").raw_span == "42");
}

TEST_CASE("choice normalization") {
  auto key = AnswerKey::choice('B');
  CHECK(answers_equal({"B.", true}, key));
  CHECK(answers_equal({"(B)", true}, key));
  CHECK(answers_equal({"b", true}, key));
  CHECK(answers_equal({"\\boxed{B}", true}, key));
  CHECK_FALSE(answers_equal({"A", true}, key));
  CHECK_FALSE(answers_equal({"B and C", true}, key));
  CHECK_FALSE(answers_equal({"", true}, key));
}

TEST_CASE("numeric parsing: decimals, fractions, scientific") {
  auto key = AnswerKey::numeric(0.5);
  CHECK(answers_equal({"0.5", true}, key));
  CHECK(answers_equal({"1/2", true}, key));
  CHECK(answers_equal({"5e-1", true}, key));
  CHECK(answers_equal({"5E-1", true}, key));
  CHECK_FALSE(answers_equal({"1/0", true}, key));
  CHECK_FALSE(answers_equal({"half", true}, key));
  CHECK(answers_equal({"1,000", true}, AnswerKey::numeric(1000)));
}

// Tolerance oracle: equal iff |a-b| <= max(1e-9, 1e-6 * max(|a|,|b|)).
TEST_CASE("numeric tolerance boundary") {
  auto key = AnswerKey::numeric(0.5);
  // relative error 4e-7 <= 1e-6, so this is equal
  CHECK(answers_equal({"0.5000002", true}, key));
  // relative error 4e-6 > 1e-6
  CHECK_FALSE(answers_equal({"0.500002", true}, key));
  // near zero the absolute floor applies
  CHECK(answers_equal({"1e-10", true}, AnswerKey::numeric(0.0)));
  CHECK_FALSE(answers_equal({"1e-8", true}, AnswerKey::numeric(0.0)));
}

TEST_CASE("numeric equality is symmetric under the tolerance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(-6, 6);
  for (int i = 0; i < 1000; ++i) {
    double x = std::pow(10.0, mag(rng));
    double y = x * (1.0 + std::uniform_real_distribution<double>(-3e-6, 3e-6)(rng));
    CHECK(detail::numeric_equal(x, y) == detail::numeric_equal(y, x));
  }
}

TEST_CASE("text normalization") {
  auto key = AnswerKey::text("The mitochondria");
  CHECK(answers_equal({"the   mitochondria.", true}, key));
  CHECK(answers_equal({"THE MITOCHONDRIA", true}, key));
  CHECK_FALSE(answers_equal({"a mitochondria", true}, key));
}

TEST_CASE("failed extraction never matches") {
  CHECK_FALSE(answers_equal({"B", false}, AnswerKey::choice('B')));
  CHECK_FALSE(answers_equal({"", false}, AnswerKey::text("")));
}

TEST_CASE("grade end to end") {
  CHECK(grade("Explanation: walk.\nAnswer: 200", AnswerKey::numeric(200)) == Correctness::T);
  CHECK(grade("Answer: \\boxed{200}", AnswerKey::numeric(200)) == Correctness::T);
  CHECK(grade("Answer: A", AnswerKey::choice('B')) == Correctness::F);
  CHECK(grade("", AnswerKey::choice('B')) == Correctness::F);
}

// Round-trip property: rendering a key and grading it against itself is T.
TEST_CASE("choice key round-trip grades T") {
  for (char c = 'A'; c <= 'J'; ++c) {
    auto key = AnswerKey::choice(c);
    std::string text = "Explanation: x.\nAnswer: " + std::string(1, c);
    CHECK(grade(text, key) == Correctness::T);
  }
}

TEST_CASE("numeric key round-trip grades T") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-1e4, 1e4);
  for (int i = 0; i < 200; ++i) {
    double x = v(rng);
    std::ostringstream ss;
    ss.precision(15);
    ss << x;
    CHECK(grade("Answer: " + ss.str(), AnswerKey::numeric(x)) == Correctness::T);
  }
}

TEST_CASE("extracted_equal groups failed extractions by raw span") {
  ExtractedAnswer fail1{"", false}, fail2{"", false}, ok{"B", true};
  CHECK(extracted_equal(fail1, fail2, KeyKind::Choice));
  CHECK_FALSE(extracted_equal(fail1, ok, KeyKind::Choice));
  CHECK_FALSE(extracted_equal(ok, fail1, KeyKind::Choice));
}
