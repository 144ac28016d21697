#pragma once

// Prompt templates. These strings are wire formats shared with external
// scorers and exported training files; treat every byte as part of the
// contract.

#include <string>
#include <string_view>

namespace rforge::prompts {

// Wraps a question for CoT generation with a machine-extractable final line.
inline std::string generation_prompt(std::string_view question) {
  static const std::string kTemplate =
      "Read the question, analyze step by step and provide your answer. "
      "Use the following format to answer:\n"
      "```Explanation: [insert step-by-step analysis here]\n"
      "Answer: [ONLY the final answer; not a complete sentence]\n"
      "```\n"
      "Please make sure to analyze step by step before giving the answer.\n"
      "Only give me the reply according to this format, don't give me any other words.\n"
      "\n";
  return kTemplate + std::string(question);
}

// Instruction of the certainty-assessment training record.
inline const std::string kSftInstruction =
    "Given the following Question and the corresponding Answer provided by a model, "
    "you are required to assess whether the model is certain about its answer. "
    "If the model is certain about its answer, output 'Yes'. "
    "If the model is uncertain about its answer, output 'No'.";

// Input field of the certainty-assessment record; also the scoring input.
inline std::string sft_input(std::string_view question, std::string_view answer) {
  std::string out = "Question:\n";
  out += question;
  out += "\n\nModel's Answer:\n";
  out += answer;
  return out;
}

// Pointwise judge prompt for completion-only backends.
inline std::string judge_prompt(std::string_view question, std::string_view response) {
  std::string out =
      "<Instruction> Given the following Question and the corresponding Answer provided "
      "by a model, assess the probability that the answer is correct. Please provide only "
      "a single number between 0 and 1 (not inclusive) representing the probability, "
      "where 0 means completely incorrect and 1 means completely correct. "
      "Your answer should be formatted as:\n"
      "```json\n"
      "{{\"probability\": 0.5}}\n"
      "```\n"
      "reason and analysis: <your analysis>\n"
      "</Instruction>\n"
      "<Question and the answer need to be scored>:\n"
      "Question: ";
  out += question;
  out += "\nModel's Response:\n";
  out += response;
  return out;
}

}  // namespace rforge::prompts
