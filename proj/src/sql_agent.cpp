#include "geolog/sql_agent.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <array>
#include <cctype>

#include "geolog/error.hpp"
#include "geolog/text.hpp"
#include "json.hpp"

namespace geolog {

namespace {

constexpr std::string_view kPromptHeader =
    "You are an agent designed to interact with a SQL database. Given an input question, create a "
    "syntactically correct sqlite query to run, then look at the results of the query and return "
    "the answer.\n"
    "You have access to tools for interacting with the database. Only use the below tools. Only "
    "use the information returned by the below tools to construct your final answer.\n"
    "You must double check your query before executing it. If you get an error while executing a "
    "query, rewrite the query and try again.\n";

constexpr std::string_view kSeedThought =
    "Thought: I should look at the tables in the database to see what I can query.  Then I "
    "should query the schema of the most relevant tables.";

constexpr std::string_view kInvalidFormat =
    "Observation: Invalid Format: Missing 'Action:' after 'Thought:'";

constexpr std::string_view kThoughtMarker = "Thought:";
constexpr std::string_view kActionMarker = "Action:";
constexpr std::string_view kActionInputMarker = "Action Input:";
constexpr std::string_view kFinalAnswerMarker = "Final Answer:";

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto nl = s.find('\n', start);
    std::string_view line =
        s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

bool has_marker(std::string_view line, std::string_view marker) {
  return ltrim(line).substr(0, marker.size()) == marker;
}

std::string_view after_marker(std::string_view line, std::string_view marker) {
  return ltrim(line).substr(marker.size());
}

bool is_any_marker(std::string_view line) {
  return has_marker(line, kThoughtMarker) || has_marker(line, kActionMarker) ||
         has_marker(line, kActionInputMarker) || has_marker(line, kObservationStop) ||
         has_marker(line, kFinalAnswerMarker);
}

bool is_action_line(std::string_view line) {
  return has_marker(line, kActionMarker) && !has_marker(line, kActionInputMarker);
}

std::string strip_wrapping(std::string_view s) {
  s = text::trim(s);
  constexpr std::string_view kWrappers = "[]\"'`";
  while (!s.empty() && kWrappers.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  while (!s.empty() && kWrappers.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
  return std::string(text::trim(s));
}

// Removes one pair of matching quotes around the whole input when the quote
// character does not occur inside.
std::string unquote_input(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2) {
    const char q = s.front();
    if ((q == '"' || q == '\'' || q == '`') && s.back() == q &&
        s.substr(1, s.size() - 2).find(q) == std::string_view::npos) {
      return std::string(s.substr(1, s.size() - 2));
    }
  }
  return std::string(s);
}

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t from,
                       std::size_t to, std::string_view first_override) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back('\n');
    out += i == from ? first_override : lines[i];
  }
  return text::trim_copy(out);
}

constexpr std::array<std::string_view, 18> kSqlKeywords = {
    "SELECT", "WITH",   "INSERT",  "UPDATE",  "DELETE", "DROP",   "CREATE", "ALTER",   "REPLACE",
    "PRAGMA", "ATTACH", "DETACH",  "VACUUM",  "REINDEX", "ANALYZE", "EXPLAIN", "BEGIN", "COMMIT"};

// Length of the SQL keyword starting s, or 0.
std::size_t leading_keyword(std::string_view s) {
  for (const auto kw : kSqlKeywords) {
    if (!text::starts_with_icase(s, kw)) continue;
    if (s.size() == kw.size()) return kw.size();
    const auto next = static_cast<unsigned char>(s[kw.size()]);
    if (!std::isalnum(next) && next != '_') return kw.size();
  }
  return 0;
}

std::string_view strip_label(std::string_view line) {
  line = ltrim(line);
  for (const std::string_view label : {"SQLQuery:", "SQL Query:", "SQL:", "Query:", "sql"}) {
    if (text::starts_with_icase(line, label)) {
      std::string_view rest = line.substr(label.size());
      if (label == "sql" && !rest.empty() && !std::isspace(static_cast<unsigned char>(rest[0]))) {
        continue;
      }
      return ltrim(rest);
    }
  }
  return line;
}

std::string quote_identifier(std::string_view name) {
  std::string out = "\"";
  for (const char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string clip_cell(const Cell& cell) {
  if (!cell) return "NULL";
  std::string v;
  std::size_t count = 0;
  std::size_t pos = 0;
  const std::string& s = *cell;
  while (pos < s.size()) {
    char32_t cp = text::next_code_point(s, pos);
    if (cp == '\n' || cp == '\r' || cp == '\t') cp = ' ';
    if (count == 100) {
      v += "...";
      break;
    }
    text::append_utf8(v, cp);
    ++count;
  }
  return v;
}

std::string render_aligned(const QueryResult& result) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back(result.columns);
  for (const auto& row : result.rows) {
    std::vector<std::string> line;
    for (const auto& cell : row) line.push_back(clip_cell(cell));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(result.columns.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], text::display_width(line[c]));
    }
  }
  std::string out;
  for (const auto& line : grid) {
    std::string rendered;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) rendered += " | ";
      rendered += line[c];
      if (c + 1 < line.size()) rendered.append(widths[c] - text::display_width(line[c]), ' ');
    }
    out += rendered;
    out.push_back('\n');
  }
  return out;
}

std::string error_observation(std::string_view message) {
  return std::string(kErrorPrefix) + std::string(message);
}

}  // namespace

const std::vector<Tool>& sql_tools() {
  static const std::vector<Tool> tools = {
      {std::string(kQueryTool),
       "Input to this tool is a detailed and correct SQL query, output is a result from the "
       "database. If the query is not correct, an error message will be returned. If an error is "
       "returned, rewrite the query, check the query, and try again."},
      {std::string(kSchemaTool),
       "Input to this tool is a comma-separated list of tables, output is the schema and sample "
       "rows for those tables. Be sure that the tables actually exist by listing the tables "
       "first! Example Input: table1, table2, table3"},
      {std::string(kListTablesTool),
       "Input is an empty string, output is a comma-separated list of tables in the database."},
      {std::string(kQueryCheckerTool),
       "Use this tool to double check if your query is correct before executing it. Always use "
       "this tool before executing a query!"},
  };
  return tools;
}

bool is_sql_tool(std::string_view name) {
  return name == kQueryTool || name == kSchemaTool || name == kListTablesTool ||
         name == kQueryCheckerTool;
}

std::string_view to_string(AgentOutcome outcome) {
  switch (outcome) {
    case AgentOutcome::kAnswered: return "answered";
    case AgentOutcome::kIterationLimit: return "iteration_limit";
    case AgentOutcome::kParseFailure: return "parse_failure";
    case AgentOutcome::kBackendFailure: return "backend_failure";
  }
  return "parse_failure";
}

std::optional<AgentOutcome> agent_outcome_from(std::string_view name) {
  for (const auto o : {AgentOutcome::kAnswered, AgentOutcome::kIterationLimit,
                       AgentOutcome::kParseFailure, AgentOutcome::kBackendFailure}) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

const AgentStep* AgentTranscript::last_successful_query() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->action == kQueryTool && it->observation.rfind(kErrorPrefix, 0) != 0) return &*it;
  }
  return nullptr;
}

std::string build_agent_prompt(std::string_view question, const std::vector<Tool>& tools) {
  std::string names;
  std::string listing;
  for (const auto& tool : tools) {
    if (!names.empty()) names += ", ";
    names += tool.name;
    listing += tool.name + " - " + tool.description + "\n";
  }
  std::string prompt(kPromptHeader);
  prompt += "\n";
  prompt += listing;
  prompt += "\nUse the following format:\n\n";
  prompt += "Question: the input question you must answer\n";
  prompt += "Thought: you should always think about what to do\n";
  prompt += "Action: the action to take, should be one of [" + names + "]\n";
  prompt += "Action Input: the input to the action\n";
  prompt += "Observation: the result of the action\n";
  prompt += "... (this Thought/Action/Action Input/Observation can repeat N times)\n";
  prompt += "Thought: I now know the final answer\n";
  prompt += "Final Answer: the final answer to the original input question\n";
  prompt += "\nBegin!\n\n";
  prompt += "Question: ";
  prompt += question;
  prompt += "\n";
  prompt += kSeedThought;
  return prompt;
}

std::variant<AgentStep, FinalAnswer> parse_llm_step(std::string_view generated) {
  const auto lines = split_lines(generated);

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (has_marker(lines[i], kFinalAnswerMarker)) {
      return FinalAnswer{join_lines(lines, i, lines.size(), after_marker(lines[i], kFinalAnswerMarker))};
    }
  }

  std::vector<std::size_t> thoughts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (has_marker(lines[i], kThoughtMarker)) thoughts.push_back(i);
  }

  // Scan for the first complete Action / Action Input pair after `from`.
  auto find_pair = [&](std::size_t from) -> std::optional<std::pair<std::size_t, std::size_t>> {
    for (std::size_t a = from; a < lines.size(); ++a) {
      if (!is_action_line(lines[a])) continue;
      for (std::size_t b = a + 1; b < lines.size(); ++b) {
        if (has_marker(lines[b], kActionInputMarker)) return std::make_pair(a, b);
        if (is_any_marker(lines[b])) break;
      }
    }
    return std::nullopt;
  };

  std::optional<std::pair<std::size_t, std::size_t>> pair;
  std::optional<std::size_t> thought_line;
  for (auto it = thoughts.rbegin(); it != thoughts.rend() && !pair; ++it) {
    pair = find_pair(*it);
    if (pair) thought_line = *it;
  }
  if (!pair) pair = find_pair(0);
  if (!pair) {
    throw Error(ErrorCode::kStepParseError,
                "completion has neither 'Final Answer:' nor an 'Action:'/'Action Input:' pair");
  }
  const auto [action_idx, input_idx] = *pair;

  AgentStep step;
  if (thought_line) {
    step.thought = join_lines(lines, *thought_line, action_idx,
                              after_marker(lines[*thought_line], kThoughtMarker));
  } else {
    // Completion continued an open "Thought:" from the prompt.
    step.thought = join_lines(lines, 0, action_idx, action_idx > 0 ? lines[0] : "");
  }
  step.action = strip_wrapping(after_marker(lines[action_idx], kActionMarker));
  if (!is_sql_tool(step.action)) {
    throw Error(ErrorCode::kStepParseError,
                "'" + step.action + "' is not a valid tool, try one of [sql_db_query, "
                "sql_db_schema, sql_db_list_tables, sql_db_query_checker]");
  }

  std::size_t end = input_idx + 1;
  while (end < lines.size() && !text::trim(lines[end]).empty() && !is_any_marker(lines[end])) ++end;
  step.action_input =
      unquote_input(join_lines(lines, input_idx, end, after_marker(lines[input_idx], kActionInputMarker)));
  return step;
}

std::string render_step(const AgentStep& step) {
  std::string out;
  if (!step.thought.empty()) out += "Thought: " + step.thought + "\n";
  out += "Action: " + step.action + "\n";
  out += "Action Input: " + step.action_input;
  if (!step.observation.empty()) out += "\nObservation: " + step.observation;
  return out;
}

std::string tool_list_tables(const Database& db) {
  const auto result = db.query(
      "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
      "ORDER BY name");
  std::string out;
  for (const auto& row : result.rows) {
    if (!out.empty()) out += ", ";
    out += row[0].value_or("");
  }
  return out;
}

std::string tool_schema(const Database& db, std::string_view tables, const AgentConfig& config) {
  std::vector<std::string> names;
  std::size_t start = 0;
  while (start <= tables.size()) {
    const auto comma = tables.find(',', start);
    const auto piece = strip_wrapping(tables.substr(start, comma == std::string_view::npos
                                                                ? std::string_view::npos
                                                                : comma - start));
    if (!piece.empty()) names.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }

  std::vector<std::string> blocks;
  for (const auto& name : names) {
    Statement lookup(db, "SELECT sql FROM sqlite_master WHERE type = 'table' AND name = ?1");
    sqlite3_bind_text(lookup.get(), 1, name.data(), static_cast<int>(name.size()),
                      SQLITE_TRANSIENT);
    if (sqlite3_step(lookup.get()) != SQLITE_ROW) {
      std::string available = tool_list_tables(db);
      blocks.push_back(error_observation("table '" + name + "' not found. Available tables: " +
                                         (available.empty() ? "(none)" : available)));
      continue;
    }
    std::string block = reinterpret_cast<const char*>(sqlite3_column_text(lookup.get(), 0));
    if (config.sample_rows > 0) {
      const auto sample = db.query("SELECT * FROM " + quote_identifier(name) + " LIMIT " +
                                   std::to_string(config.sample_rows));
      block += "\n\n/*\n" + std::to_string(sample.rows.size()) + " rows from " + name +
               " table:\n" + render_aligned(sample) + "*/";
    }
    blocks.push_back(std::move(block));
  }

  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

std::string build_query_checker_prompt(std::string_view sql) {
  std::string prompt(text::trim(sql));
  prompt +=
      "\n\nDouble check the sqlite query above for common mistakes, including:\n"
      "- Using NOT IN with NULL values\n"
      "- Using UNION when UNION ALL should have been used\n"
      "- Using BETWEEN for exclusive ranges\n"
      "- Data type mismatch in predicates\n"
      "- Properly quoting identifiers\n"
      "- Using the correct number of arguments for functions\n"
      "- Casting to the correct data type\n"
      "- Using the proper columns for join\n"
      "\n"
      "If there are any of the above mistakes, rewrite the query. If there are no mistakes, just "
      "reproduce the original query.\n"
      "\n"
      "Output the final SQL query only.\n"
      "\n"
      "SQL Query: ";
  return prompt;
}

std::string tool_query_checker(std::string_view sql, LlmBackend& backend) {
  CompletionRequest request;
  request.prompt = build_query_checker_prompt(sql);
  request.temperature = backend.temperature();
  request.max_tokens = backend.max_tokens();
  const auto response = backend.complete(request);
  try {
    return extract_sql(response.text).text;
  } catch (const Error&) {
    return text::trim_copy(response.text);
  }
}

SqlStatement extract_sql(std::string_view model_text) {
  std::string_view body = model_text;

  // Prefer the first fenced block when one exists.
  const auto fence = body.find("```");
  if (fence != std::string_view::npos) {
    auto after = body.substr(fence + 3);
    const auto nl = after.find('\n');
    const auto info = nl == std::string_view::npos ? after : after.substr(0, nl);
    std::string_view inner;
    if (leading_keyword(ltrim(info)) > 0 || nl == std::string_view::npos) {
      inner = after;  // ```SELECT ...``` on one line
    } else {
      inner = after.substr(nl + 1);
    }
    const auto close = inner.find("```");
    body = close == std::string_view::npos ? inner : inner.substr(0, close);
  }

  const auto lines = split_lines(body);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = strip_label(lines[i]);
    char opening_quote = 0;
    if (!line.empty() && (line.front() == '"' || line.front() == '\'' || line.front() == '`')) {
      opening_quote = line.front();
      line.remove_prefix(1);
    }
    if (leading_keyword(line) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string_view::npos || colon > 40 ||
          leading_keyword(ltrim(line.substr(colon + 2))) == 0) {
        continue;
      }
      line = ltrim(line.substr(colon + 2));
    }

    // Statement runs until the first ';' outside string literals, else to a
    // blank line or the end of the body.
    const std::size_t offset = static_cast<std::size_t>(line.data() - body.data());
    std::string_view rest = body.substr(offset);
    std::string stmt;
    char in_quote = 0;
    bool terminated = false;
    for (std::size_t k = 0; k < rest.size(); ++k) {
      const char c = rest[k];
      if (in_quote != 0) {
        if (c == in_quote) in_quote = 0;
      } else if (c == '\'' || c == '"') {
        in_quote = c;
      } else if (c == ';') {
        stmt.push_back(c);
        terminated = true;
        break;
      } else if (c == '\n' && k + 1 < rest.size()) {
        const auto next_nl = rest.find('\n', k + 1);
        const auto next_line = rest.substr(k + 1, next_nl == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : next_nl - k - 1);
        if (text::trim(next_line).empty()) break;
      }
      stmt.push_back(c);
    }
    std::string trimmed = text::trim_copy(stmt);
    if (!terminated && opening_quote != 0 && !trimmed.empty() && trimmed.back() == opening_quote) {
      trimmed.pop_back();
      trimmed = text::trim_copy(trimmed);
    }
    SqlStatement out;
    out.text = std::move(trimmed);
    const bool is_select = text::starts_with_icase(out.text, "SELECT") ||
                           text::starts_with_icase(out.text, "WITH");
    out.kind = is_select ? StatementKind::kSelect : StatementKind::kOther;
    return out;
  }
  throw Error(ErrorCode::kNoSqlFound, "no SQL statement found in model output");
}

std::string tool_query(const Database& db, const SqlStatement& sql, const AgentConfig& config) {
  if (config.read_only && sql.kind != StatementKind::kSelect) {
    return error_observation(
        "ReadOnlyViolation: only SELECT statements may run against this database");
  }
  sqlite3* raw = db.raw();
  sqlite3_stmt* stmt_raw = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(raw, sql.text.c_str(), static_cast<int>(sql.text.size()), &stmt_raw,
                         &tail) != SQLITE_OK) {
    return error_observation(sqlite3_errmsg(raw));
  }
  std::unique_ptr<sqlite3_stmt, decltype(&sqlite3_finalize)> stmt(stmt_raw, &sqlite3_finalize);
  if (stmt == nullptr) return error_observation("empty statement");
  if (tail != nullptr) {
    const std::string_view rest(tail);
    if (rest.find_first_not_of(" \t\r\n;") != std::string_view::npos) {
      return error_observation("only one statement per query is allowed");
    }
  }
  if (config.read_only && sqlite3_stmt_readonly(stmt.get()) == 0) {
    return error_observation(
        "ReadOnlyViolation: only SELECT statements may run against this database");
  }

  std::string out;
  const int ncol = sqlite3_column_count(stmt.get());
  bool first_row = true;
  for (;;) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) return error_observation(sqlite3_errmsg(raw));
    if (!first_row) out.push_back('\n');
    first_row = false;
    for (int c = 0; c < ncol; ++c) {
      if (c > 0) out.push_back('|');
      if (sqlite3_column_type(stmt.get(), c) == SQLITE_NULL) {
        out += "NULL";
      } else {
        const auto* txt = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), c));
        out.append(txt, static_cast<std::size_t>(sqlite3_column_bytes(stmt.get(), c)));
      }
    }
  }
  return out;
}

AgentTranscript run_agent(std::string_view question, const Database& db, LlmBackend& backend,
                          const AgentConfig& config) {
  AgentTranscript transcript;
  transcript.question = std::string(question);
  const std::string base = build_agent_prompt(question, sql_tools());
  const int max_steps = std::max(1, config.max_iterations);
  int parse_failures = 0;

  for (;;) {
    if (static_cast<int>(transcript.steps.size()) >= max_steps) {
      transcript.outcome = AgentOutcome::kIterationLimit;
      return transcript;
    }

    std::string prompt = base;
    for (const auto& step : transcript.steps) prompt += "\n" + render_step(step);
    if (parse_failures > 0) {
      prompt += "\n";
      prompt += kInvalidFormat;
    }
    if (!transcript.steps.empty() || parse_failures > 0) prompt += "\nThought:";

    CompletionRequest request;
    request.prompt = std::move(prompt);
    request.temperature = backend.temperature();
    request.max_tokens = backend.max_tokens();
    request.stop_sequences = {std::string(kObservationStop)};

    std::string generated;
    try {
      generated = backend.complete(request).text;
    } catch (const Error& e) {
      transcript.outcome = AgentOutcome::kBackendFailure;
      transcript.failure_detail = e.what();
      return transcript;
    }

    std::variant<AgentStep, FinalAnswer> parsed;
    try {
      parsed = parse_llm_step(generated);
    } catch (const Error& e) {
      if (++parse_failures >= 2) {
        transcript.outcome = AgentOutcome::kParseFailure;
        transcript.failure_detail = e.detail();
        return transcript;
      }
      continue;
    }
    parse_failures = 0;

    if (auto* answer = std::get_if<FinalAnswer>(&parsed)) {
      transcript.final_answer = answer->text;
      transcript.outcome = AgentOutcome::kAnswered;
      return transcript;
    }

    AgentStep step = std::get<AgentStep>(std::move(parsed));
    try {
      if (step.action == kListTablesTool) {
        step.observation = tool_list_tables(db);
      } else if (step.action == kSchemaTool) {
        step.observation = tool_schema(db, step.action_input, config);
      } else if (step.action == kQueryCheckerTool) {
        step.observation = tool_query_checker(step.action_input, backend);
      } else {
        try {
          step.observation = tool_query(db, extract_sql(step.action_input), config);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNoSqlFound) throw;
          step.observation = error_observation(e.what());
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBackendUnavailable || e.code() == ErrorCode::kScriptExhausted ||
          e.code() == ErrorCode::kInvalidRequest) {
        step.observation = error_observation(e.what());
        transcript.steps.push_back(std::move(step));
        transcript.outcome = AgentOutcome::kBackendFailure;
        transcript.failure_detail = e.what();
        return transcript;
      }
      step.observation = error_observation(e.what());
    }
    if (step.observation.empty()) step.observation = "(no rows)";
    transcript.steps.push_back(std::move(step));
  }
}

std::string transcript_to_json_line(const AgentTranscript& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"thought", s.thought},
                     {"action", s.action},
                     {"action_input", s.action_input},
                     {"observation", s.observation}});
  }
  nlohmann::json j = {{"question", t.question},
                      {"steps", steps},
                      {"final_answer", t.final_answer ? nlohmann::json(*t.final_answer) : nullptr},
                      {"outcome", to_string(t.outcome)},
                      {"failure_detail", t.failure_detail}};
  return j.dump();
}

AgentTranscript transcript_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    AgentTranscript t;
    t.question = j.at("question").get<std::string>();
    for (const auto& s : j.at("steps")) {
      t.steps.push_back({s.at("thought").get<std::string>(), s.at("action").get<std::string>(),
                         s.at("action_input").get<std::string>(),
                         s.at("observation").get<std::string>()});
    }
    if (!j.at("final_answer").is_null()) t.final_answer = j["final_answer"].get<std::string>();
    const auto outcome = agent_outcome_from(j.at("outcome").get<std::string>());
    if (!outcome) throw Error(ErrorCode::kConfigError, "unknown outcome in transcript");
    t.outcome = *outcome;
    t.failure_detail = j.value("failure_detail", "");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad transcript record: ") + e.what());
  }
}

}  // namespace geolog
