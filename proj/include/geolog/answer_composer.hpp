#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "geolog/llm_backend.hpp"

namespace geolog {

struct ChatAnswer {
  std::string question;
  std::string sql;
  std::string sql_result;
  std::string answer;
  std::chrono::system_clock::time_point created_at;
};

// {question} and {result} are substituted in a single pass, so a question
// that itself contains "{result}" is left untouched.
std::string build_answer_prompt(std::string_view question, std::string_view sql_result);

// Throws BackendUnavailable (or ScriptExhausted for scripted backends).
ChatAnswer compose_answer(std::string_view question, std::string_view sql,
                          std::string_view sql_result, LlmBackend& backend);

}  // namespace geolog
