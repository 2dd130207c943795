#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace geolog {

inline constexpr double kPassThreshold = 0.7;

using Tokens = std::vector<std::string>;

/// Lowercased word and number tokens. Punctuation and whitespace separate
/// tokens; '_' stays inside words; "0,87" and "2.5" are single tokens.
Tokens tokenize(std::string_view text);

bool is_numeric_token(std::string_view token);

/// Every numeric token, with ',' read as a decimal separator.
std::set<double> extract_numbers(std::string_view text);

const std::set<std::string>& spanish_stopwords();
Tokens content_tokens(std::string_view text);

/// Sentence BLEU with uniform weights, clipped n-gram precision, brevity
/// penalty exp(1 - r/c) when c < r and no smoothing. The highest order is
/// min(max_n, |candidate|). Throws EmptyInput on an empty list.
double bleu(const Tokens& candidate, const Tokens& reference, int max_n = 4);

enum class ScoreRule { kNumberMatch, kKeywordBand, kBleuFallback };
std::string_view to_string(ScoreRule rule);

struct EvalScore {
  double value = 0.0;
  ScoreRule rule = ScoreRule::kBleuFallback;
  std::vector<double> shared_numbers;  // number_match
  double overlap = 0.0;                // content-token Jaccard
  double raw_bleu = 0.0;               // bleu_fallback
};

/// Three-band score:
///   shared number          -> 0.8 + 0.2 * J
///   content-token overlap  -> 0.6 + 0.4 * J
///   otherwise              -> 0.4 * BLEU
/// J is the Jaccard index of the content-token sets. Throws EmptyInput on
/// blank text.
EvalScore adapted_score(std::string_view candidate, std::string_view reference);

struct EvalCase {
  std::string id;
  std::string question;
  std::string reference;
  std::string candidate;
};

struct CaseScore {
  std::string id;
  EvalScore score;
};

struct EvalReport {
  std::vector<CaseScore> scores;  // ordered by case id
  double mean = 0.0;
  double threshold = kPassThreshold;
  bool pass = false;  // mean > threshold, strictly
};

/// Throws EmptyCorpus when `cases` is empty.
EvalReport evaluate_corpus(const std::vector<EvalCase>& cases, double threshold = kPassThreshold);

/// Builds a report from already computed scores. Throws EmptyCorpus.
EvalReport summarize(std::vector<CaseScore> scores, double threshold = kPassThreshold);

/// Reads `.csv` (header id,question,reference,candidate) or JSON Lines.
std::vector<EvalCase> load_eval_cases(const std::string& path);

std::string format_report_table(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace geolog
