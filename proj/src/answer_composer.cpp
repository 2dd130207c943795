#include "geolog/answer_composer.hpp"

namespace geolog {

namespace {

constexpr std::string_view kAnswerTemplate =
    "Dada la siguiente pregunta del usuario sobre las tesis de Geología y el resultado SQL, genera "
    "una respuesta detallada al usuario mencionando siempre las tesis de Geología como tópico "
    "principal.\n"
    "Question: {question}\n"
    "SQL Result: {result}";

}  // namespace

std::string build_answer_prompt(std::string_view question, std::string_view sql_result) {
  std::string out;
  out.reserve(kAnswerTemplate.size() + question.size() + sql_result.size());
  std::size_t pos = 0;
  while (pos < kAnswerTemplate.size()) {
    const auto open = kAnswerTemplate.find('{', pos);
    if (open == std::string_view::npos) {
      out += kAnswerTemplate.substr(pos);
      break;
    }
    out += kAnswerTemplate.substr(pos, open - pos);
    const auto close = kAnswerTemplate.find('}', open);
    const auto slot = kAnswerTemplate.substr(open + 1, close - open - 1);
    out += slot == "question" ? question : sql_result;
    pos = close + 1;
  }
  return out;
}

ChatAnswer compose_answer(std::string_view question, std::string_view sql,
                          std::string_view sql_result, LlmBackend& backend) {
  CompletionRequest request;
  request.prompt = build_answer_prompt(question, sql_result);
  request.temperature = backend.temperature();
  request.max_tokens = backend.max_tokens();
  const auto response = backend.complete(request);

  ChatAnswer answer;
  answer.question = std::string(question);
  answer.sql = std::string(sql);
  answer.sql_result = std::string(sql_result);
  answer.answer = response.text;
  answer.created_at = std::chrono::system_clock::now();
  return answer;
}

}  // namespace geolog
