#include "geolog/eval_bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "geolog/csv.hpp"
#include "geolog/error.hpp"
#include "geolog/text.hpp"
#include "stopwords_es.hpp"

namespace geolog {

namespace {

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || is_digit(cp) || cp == '_';
  }
  if (cp <= 0xBF) return false;  // Latin-1 punctuation and symbols: ¡ ¿ « » ° ...
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // general punctuation, arrows, symbols
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp == 0xFFFD || cp == 0xFEFF) return false;
  if (cp >= 0x1F000) return false;  // emoji and pictographs
  return true;
}

using Ngram = std::vector<std::string>;

std::map<Ngram, int> count_ngrams(const Tokens& tokens, std::size_t n) {
  std::map<Ngram, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::set<std::string> as_set(const Tokens& tokens) { return {tokens.begin(), tokens.end()}; }

}  // namespace

Tokens tokenize(std::string_view input) {
  Tokens out;
  std::string current;
  bool numeric = true;  // current holds only digits (and at most one separator)
  bool has_separator = false;
  char32_t last = 0;

  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
    numeric = true;
    has_separator = false;
    last = 0;
  };

  std::size_t pos = 0;
  while (pos < input.size()) {
    const char32_t cp = text::next_code_point(input, pos);
    if (is_word_char(cp)) {
      text::append_utf8(current, text::to_lower(cp));
      if (!is_digit(cp)) numeric = false;
      last = cp;
      continue;
    }
    if ((cp == '.' || cp == ',') && !current.empty() && numeric && !has_separator &&
        is_digit(last) && pos < input.size() && is_digit(static_cast<unsigned char>(input[pos]))) {
      current.push_back(static_cast<char>(cp));
      has_separator = true;
      last = cp;
      continue;
    }
    flush();
  }
  flush();
  return out;
}

bool is_numeric_token(std::string_view token) {
  if (token.empty() || !is_digit(static_cast<unsigned char>(token.front())) ||
      !is_digit(static_cast<unsigned char>(token.back()))) {
    return false;
  }
  int separators = 0;
  for (const char c : token) {
    if (c == '.' || c == ',') {
      ++separators;
    } else if (!is_digit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return separators <= 1;
}

std::set<double> extract_numbers(std::string_view input) {
  std::set<double> out;
  for (auto token : tokenize(input)) {
    if (!is_numeric_token(token)) continue;
    std::replace(token.begin(), token.end(), ',', '.');
    out.insert(std::strtod(token.c_str(), nullptr));
  }
  return out;
}

const std::set<std::string>& spanish_stopwords() {
  static const std::set<std::string> words = [] {
    std::set<std::string> s;
    std::istringstream in{std::string(kSpanishStopwords)};
    std::string line;
    while (std::getline(in, line)) {
      auto w = text::trim_copy(line);
      if (!w.empty()) s.insert(text::to_lower(w));
    }
    return s;
  }();
  return words;
}

Tokens content_tokens(std::string_view input) {
  Tokens out;
  const auto& stop = spanish_stopwords();
  for (auto& token : tokenize(input)) {
    if (!stop.contains(token)) out.push_back(std::move(token));
  }
  return out;
}

double bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::kEmptyInput, "bleu needs non-empty candidate and reference");
  }
  if (max_n < 1) throw Error(ErrorCode::kEmptyInput, "max_n must be >= 1");
  const std::size_t order = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    int clipped = 0;
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;
    const double total = static_cast<double>(candidate.size() - n + 1);
    log_sum += std::log(clipped / total);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return std::min(1.0, bp * std::exp(log_sum / static_cast<double>(order)));
}

std::string_view to_string(ScoreRule rule) {
  switch (rule) {
    case ScoreRule::kNumberMatch: return "number_match";
    case ScoreRule::kKeywordBand: return "keyword_band";
    case ScoreRule::kBleuFallback: return "bleu_fallback";
  }
  return "bleu_fallback";
}

EvalScore adapted_score(std::string_view candidate, std::string_view reference) {
  if (text::trim(candidate).empty() || text::trim(reference).empty()) {
    throw Error(ErrorCode::kEmptyInput, "candidate and reference must be non-empty");
  }
  EvalScore score;

  const auto cand_numbers = extract_numbers(candidate);
  const auto ref_numbers = extract_numbers(reference);
  std::set_intersection(cand_numbers.begin(), cand_numbers.end(), ref_numbers.begin(),
                        ref_numbers.end(), std::back_inserter(score.shared_numbers));

  const auto cand_set = as_set(content_tokens(candidate));
  const auto ref_set = as_set(content_tokens(reference));
  std::size_t common = 0;
  for (const auto& t : cand_set) common += ref_set.contains(t) ? 1 : 0;
  const std::size_t unioned = cand_set.size() + ref_set.size() - common;
  score.overlap = unioned == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unioned);

  if (!score.shared_numbers.empty()) {
    score.rule = ScoreRule::kNumberMatch;
    score.value = 0.8 + 0.2 * score.overlap;
  } else if (common > 0) {
    score.rule = ScoreRule::kKeywordBand;
    score.value = 0.6 + 0.4 * score.overlap;
  } else {
    score.rule = ScoreRule::kBleuFallback;
    const auto cand_tokens = tokenize(candidate);
    const auto ref_tokens = tokenize(reference);
    score.raw_bleu =
        cand_tokens.empty() || ref_tokens.empty() ? 0.0 : bleu(cand_tokens, ref_tokens);
    score.value = 0.4 * score.raw_bleu;
  }
  score.value = std::clamp(score.value, 0.0, 1.0);
  return score;
}

EvalReport summarize(std::vector<CaseScore> scores, double threshold) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyCorpus, "evaluation corpus is empty");
  std::stable_sort(scores.begin(), scores.end(),
                   [](const CaseScore& a, const CaseScore& b) { return a.id < b.id; });
  double sum = 0.0;
  for (const auto& s : scores) sum += s.score.value;
  EvalReport report;
  report.mean = sum / static_cast<double>(scores.size());
  report.threshold = threshold;
  report.pass = report.mean > threshold;
  report.scores = std::move(scores);
  return report;
}

EvalReport evaluate_corpus(const std::vector<EvalCase>& cases, double threshold) {
  if (cases.empty()) throw Error(ErrorCode::kEmptyCorpus, "evaluation corpus is empty");
  std::vector<CaseScore> scores;
  scores.reserve(cases.size());
  for (const auto& c : cases) scores.push_back({c.id, adapted_score(c.candidate, c.reference)});
  return summarize(std::move(scores), threshold);
}

std::vector<EvalCase> load_eval_cases(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageError, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<EvalCase> cases;
  const bool is_csv = path.size() >= 4 && text::to_lower(path.substr(path.size() - 4)) == ".csv";
  if (is_csv) {
    const auto records = csv::read(content);
    if (records.empty()) return cases;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
      index[text::to_lower(text::trim(records[0].fields[i]))] = i;
    }
    for (const char* col : {"id", "question", "reference", "candidate"}) {
      if (!index.contains(col)) {
        throw Error(ErrorCode::kHeaderMismatch, std::string("eval corpus lacks column '") + col + "'");
      }
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& f = records[r].fields;
      if (f.size() != records[0].fields.size()) {
        throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(records[r].line) +
                                                  ": wrong number of fields");
      }
      cases.push_back({f[index["id"]], f[index["question"]], f[index["reference"]],
                       f[index["candidate"]]});
    }
  } else {
    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        cases.push_back({j.at("id").get<std::string>(), j.value("question", ""),
                         j.at("reference").get<std::string>(),
                         j.at("candidate").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kMalformedRow,
                    "line " + std::to_string(lineno) + ": " + std::string(e.what()));
      }
    }
  }
  for (const auto& c : cases) {
    if (text::trim(c.reference).empty() || text::trim(c.candidate).empty()) {
      throw Error(ErrorCode::kEmptyInput, "case '" + c.id + "' has an empty reference or candidate");
    }
  }
  return cases;
}

std::string format_report_table(const EvalReport& report) {
  std::size_t id_width = 2;
  for (const auto& s : report.scores) id_width = std::max(id_width, text::display_width(s.id));
  std::string out;
  auto pad = [](std::string s, std::size_t w) {
    const auto dw = text::display_width(s);
    if (dw < w) s.append(w - dw, ' ');
    return s;
  };
  out += pad("id", id_width) + "  " + pad("rule", 13) + "  value\n";
  char num[32];
  for (const auto& s : report.scores) {
    std::snprintf(num, sizeof num, "%.4f", s.score.value);
    out += pad(s.id, id_width) + "  " + pad(std::string(to_string(s.score.rule)), 13) + "  " + num +
           "\n";
  }
  char summary[128];
  std::snprintf(summary, sizeof summary, "mean %.4f (threshold %.4f, strict) -> %s\n", report.mean,
                report.threshold, report.pass ? "PASS" : "FAIL");
  out += summary;
  return out;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json cases = nlohmann::json::array();
  nlohmann::json chart = nlohmann::json::array();
  for (const auto& s : report.scores) {
    nlohmann::json detail;
    switch (s.score.rule) {
      case ScoreRule::kNumberMatch:
        detail = {{"shared_numbers", s.score.shared_numbers}, {"overlap", s.score.overlap}};
        break;
      case ScoreRule::kKeywordBand: detail = {{"overlap", s.score.overlap}}; break;
      case ScoreRule::kBleuFallback: detail = {{"bleu", s.score.raw_bleu}}; break;
    }
    cases.push_back({{"id", s.id},
                     {"rule", to_string(s.score.rule)},
                     {"value", s.score.value},
                     {"detail", detail}});
    chart.push_back({{"id", s.id}, {"value", s.score.value}});
  }
  return {{"cases", cases},
          {"mean", report.mean},
          {"threshold", report.threshold},
          {"pass", report.pass},
          {"chart", chart}};
}

}  // namespace geolog
