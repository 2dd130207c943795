#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geolog/llm_backend.hpp"
#include "geolog/sqlite_db.hpp"

namespace geolog {

inline constexpr std::string_view kListTablesTool = "sql_db_list_tables";
inline constexpr std::string_view kSchemaTool = "sql_db_schema";
inline constexpr std::string_view kQueryCheckerTool = "sql_db_query_checker";
inline constexpr std::string_view kQueryTool = "sql_db_query";
inline constexpr std::string_view kObservationStop = "Observation:";

struct Tool {
  std::string name;
  std::string description;
};

// The four SQL tools, in the order they are listed in the agent prompt.
const std::vector<Tool>& sql_tools();
bool is_sql_tool(std::string_view name);

struct AgentStep {
  std::string thought;
  std::string action;
  std::string action_input;
  std::string observation;  // empty until dispatched

  bool operator==(const AgentStep&) const = default;
};

struct FinalAnswer {
  std::string text;
  bool operator==(const FinalAnswer&) const = default;
};

enum class AgentOutcome { kAnswered, kIterationLimit, kParseFailure, kBackendFailure };
std::string_view to_string(AgentOutcome outcome);
std::optional<AgentOutcome> agent_outcome_from(std::string_view name);

struct AgentTranscript {
  std::string question;
  std::vector<AgentStep> steps;
  std::optional<std::string> final_answer;  // present iff outcome == kAnswered
  AgentOutcome outcome = AgentOutcome::kParseFailure;
  std::string failure_detail;               // backend / parse diagnostics

  // The last sql_db_query step whose statement executed, if any.
  const AgentStep* last_successful_query() const;
  bool operator==(const AgentTranscript&) const = default;
};

struct AgentConfig {
  int max_iterations = 10;
  int sample_rows = 3;
  bool read_only = true;
};

enum class StatementKind { kSelect, kOther };

struct SqlStatement {
  std::string text;
  StatementKind kind = StatementKind::kOther;
};

std::string build_agent_prompt(std::string_view question, const std::vector<Tool>& tools);

/// Parses one model completion. Throws StepParseError when the text holds
/// neither a Final Answer nor a complete Action / Action Input pair naming
/// one of the SQL tools.
std::variant<AgentStep, FinalAnswer> parse_llm_step(std::string_view generated);

/// Renders a step in the ReAct format. The Observation line is emitted only
/// when the step has been dispatched.
std::string render_step(const AgentStep& step);

std::string tool_list_tables(const Database& db);
std::string tool_schema(const Database& db, std::string_view tables, const AgentConfig& config);
std::string build_query_checker_prompt(std::string_view sql);
std::string tool_query_checker(std::string_view sql, LlmBackend& backend);

/// Throws NoSqlFound.
SqlStatement extract_sql(std::string_view model_text);

/// SQL errors and read-only violations come back as observation text.
std::string tool_query(const Database& db, const SqlStatement& sql, const AgentConfig& config);

/// Prefix tool_query puts on observations that report a failure.
inline constexpr std::string_view kErrorPrefix = "Error: ";

AgentTranscript run_agent(std::string_view question, const Database& db, LlmBackend& backend,
                          const AgentConfig& config);

// One transcript per line (JSON) for audit logs.
std::string transcript_to_json_line(const AgentTranscript& transcript);
AgentTranscript transcript_from_json_line(std::string_view line);

}  // namespace geolog
