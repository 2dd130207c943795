#include <cmath>
#include <random>

#include "bleu_oracle.hpp"
#include "doctest.h"
#include "geolog/eval_bleu.hpp"
#include "test_support.hpp"

using namespace geolog;
using geolog::testing::error_code_of;

namespace {

Tokens random_tokens(std::mt19937& rng, int min_len, int max_len) {
  static const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  Tokens out;
  const int len = std::uniform_int_distribution<int>(min_len, max_len)(rng);
  for (int i = 0; i < len; ++i) {
    out.push_back(vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)]);
  }
  return out;
}

std::string join(const Tokens& t) {
  std::string s;
  for (const auto& x : t) s += (s.empty() ? "" : " ") + x;
  return s;
}

}  // namespace

TEST_SUITE("eval_bleu") {
  TEST_CASE("tokenize") {
    CHECK(tokenize("Se realizaron 10 tesis.") == Tokens{"se", "realizaron", "10", "tesis"});
    CHECK(tokenize("Año_Aprobación = 2022") == Tokens{"año_aprobación", "2022"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("promedio 0,87 y 2.5, luego 3.") == Tokens{"promedio", "0,87", "y", "2.5", "luego", "3"});
    CHECK(tokenize("“A” y “M2”; (Napo)") == Tokens{"a", "y", "m2", "napo"});
    CHECK(tokenize("ÉXITO Ñandú") == Tokens{"éxito", "ñandú"});
  }

  TEST_CASE("numbers") {
    CHECK(extract_numbers("6 tesis en 2022") == std::set<double>{6, 2022});
    CHECK(extract_numbers("Troncoso Salgado Liliana Paulina").empty());
    CHECK(extract_numbers("0.87 de promedio") == std::set<double>{0.87});
    CHECK(extract_numbers("0,87") == extract_numbers("0.87"));
    CHECK(extract_numbers("10") == extract_numbers("10.0"));
    CHECK(is_numeric_token("2022"));
    CHECK(is_numeric_token("0,87"));
    CHECK_FALSE(is_numeric_token("m2"));
  }

  TEST_CASE("stopwords and content tokens") {
    CHECK(spanish_stopwords().count("de") == 1);
    CHECK(spanish_stopwords().size() >= 50);
    CHECK(content_tokens("las tesis de Geología en 2022") == Tokens{"tesis", "geología", "2022"});
  }

  TEST_CASE("bleu examples") {
    CHECK(bleu({"a", "b", "c"}, {"a", "b", "c"}) == doctest::Approx(1.0));
    CHECK(bleu({"a", "b"}, {"a", "b", "c"}, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
    CHECK(std::abs(bleu({"a", "b"}, {"a", "b", "c"}, 2) - 0.60653) < 1e-5);
    CHECK(bleu({"x", "y"}, {"a", "b"}) == 0.0);
    CHECK(error_code_of([] { bleu({}, {"a"}); }) == ErrorCode::kEmptyInput);
    CHECK(error_code_of([] { bleu({"a"}, {}); }) == ErrorCode::kEmptyInput);
  }

  TEST_CASE("bleu matches the brute-force oracle") {
    std::mt19937 rng(42);
    for (int i = 0; i < 100; ++i) {
      const auto c = random_tokens(rng, 1, 8);
      const auto r = random_tokens(rng, 1, 8);
      const int n = 1 + i % 4;
      CHECK(std::abs(bleu(c, r, n) - oracle::bleu(c, r, n)) < 1e-9);
    }
  }

  TEST_CASE("bleu is not symmetric") {
    const Tokens lng = {"a", "b", "c", "d"};
    const Tokens shrt = {"a", "b"};
    CHECK(bleu(shrt, lng, 2) < bleu(lng, lng, 2));
    CHECK(bleu(shrt, lng, 2) != doctest::Approx(bleu(lng, shrt, 2)));
  }

  TEST_CASE("adapted score examples") {
    const auto num = adapted_score(geolog::testing::kCountAnswer, "10");
    CHECK(num.rule == ScoreRule::kNumberMatch);
    CHECK(num.value >= 0.8);
    CHECK(num.shared_numbers == std::vector<double>{10});

    const auto same = adapted_score("tesis sobre volcanismo", "tesis sobre volcanismo");
    CHECK(same.rule == ScoreRule::kKeywordBand);
    CHECK(same.value == 1.0);

    const auto none = adapted_score("el de la", "y en los");
    CHECK(none.rule == ScoreRule::kBleuFallback);
    CHECK(none.value <= 0.4);

    CHECK(error_code_of([] { adapted_score("  ", "x"); }) == ErrorCode::kEmptyInput);
    CHECK(error_code_of([] { adapted_score("x", ""); }) == ErrorCode::kEmptyInput);
  }

  TEST_CASE("band formulas") {
    // J = |{tesis,2022}| / |{tesis,2022,volcanismo}| = 2/3
    const auto n = adapted_score("tesis 2022", "tesis 2022 volcanismo");
    CHECK(n.rule == ScoreRule::kNumberMatch);
    CHECK(n.value == doctest::Approx(0.8 + 0.2 * 2.0 / 3.0).epsilon(1e-12));
    // J = 1/3
    const auto k = adapted_score("tesis geología", "tesis volcanismo");
    CHECK(k.rule == ScoreRule::kKeywordBand);
    CHECK(k.value == doctest::Approx(0.6 + 0.4 / 3.0).epsilon(1e-12));
    CHECK(k.overlap == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("range, band separation and identity over random inputs") {
    std::mt19937 rng(8);
    const std::vector<std::string> vocab = {"tesis", "de", "la", "geología", "2022", "10", "0,87",
                                            "volcanismo", "tutor", "el", "y", "campo", "napo"};
    for (int i = 0; i < 500; ++i) {
      auto text = [&] {
        std::string s;
        const int len = std::uniform_int_distribution<int>(1, 7)(rng);
        for (int k = 0; k < len; ++k) {
          s += (k ? " " : "") + vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)];
        }
        return s;
      };
      const auto c = text();
      const auto r = text();
      const auto s = adapted_score(c, r);
      CHECK(s.value >= 0.0);
      CHECK(s.value <= 1.0);
      if (s.rule == ScoreRule::kNumberMatch) CHECK(s.value >= 0.8);
      if (s.rule == ScoreRule::kKeywordBand) CHECK(s.value >= 0.6);
      if (s.rule == ScoreRule::kBleuFallback) CHECK(s.value <= 0.4);
      if (!content_tokens(c).empty()) CHECK(adapted_score(c, c).value == 1.0);
    }
  }

  TEST_CASE("keyword band is monotone in overlap") {
    // Hold the union at 6 tokens and grow the shared part.
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"tesis alfa beta", "tesis gamma delta epsilon"},
        {"tesis campo alfa beta", "tesis campo gamma delta"},
        {"tesis campo napo alfa", "tesis campo napo gamma delta"}};
    double last = 0.0;
    for (const auto& [c, r] : steps) {
      const auto s = adapted_score(c, r);
      CHECK(s.rule == ScoreRule::kKeywordBand);
      CHECK(s.value >= last);
      last = s.value;
    }
  }

  TEST_CASE("pass gate is strict") {
    auto with_values = [](std::vector<double> values) {
      std::vector<CaseScore> scores;
      for (std::size_t i = 0; i < values.size(); ++i) {
        EvalScore s;
        s.value = values[i];
        scores.push_back({"c" + std::to_string(i), s});
      }
      return summarize(scores);
    };
    const auto boundary = with_values({0.8, 0.6});
    CHECK(boundary.mean == doctest::Approx(0.7));
    CHECK_FALSE(boundary.pass);
    CHECK_FALSE(with_values({0.7}).pass);
    CHECK(with_values({0.7001}).pass);
    CHECK(with_values({1, 1, 1, 1}).mean == 1.0);
    CHECK(with_values({1, 1, 1, 1}).pass);
    CHECK(error_code_of([] { summarize({}); }) == ErrorCode::kEmptyCorpus);
    CHECK(error_code_of([] { evaluate_corpus({}); }) == ErrorCode::kEmptyCorpus);
  }

  TEST_CASE("reports are ordered by case id") {
    const auto report = evaluate_corpus({{"b", "", "tesis", "tesis"}, {"a", "", "10", "10"}});
    REQUIRE(report.scores.size() == 2);
    CHECK(report.scores[0].id == "a");
    CHECK(report.pass);
    const auto j = report_to_json(report);
    CHECK(j["cases"].size() == 2);
    CHECK(j["chart"][0]["id"] == "a");
    CHECK(j["pass"] == true);
    CHECK(format_report_table(report).find("PASS") != std::string::npos);
  }

  TEST_CASE("user-profile cases keep their golden scores") {
    const auto cases = load_eval_cases(geolog::testing::fixture_path("profile_eval_cases.jsonl"));
    REQUIRE(cases.size() == 4);
    const auto report = evaluate_corpus(cases);
    REQUIRE(report.scores.size() == 4);
    CHECK(report.scores[0].id == "p1-directivos");
    CHECK(report.scores[0].score.rule == ScoreRule::kKeywordBand);
    CHECK(report.scores[0].score.value == doctest::Approx(0.7538461538461538).epsilon(1e-12));
    CHECK(report.scores[1].score.rule == ScoreRule::kKeywordBand);
    CHECK(report.scores[1].score.value == doctest::Approx(0.6933333333333334).epsilon(1e-12));
    CHECK(report.scores[2].score.rule == ScoreRule::kBleuFallback);
    CHECK(report.scores[2].score.value == 0.0);
    CHECK(report.scores[3].score.rule == ScoreRule::kKeywordBand);
    CHECK(report.scores[3].score.value == doctest::Approx(0.76).epsilon(1e-12));
    CHECK(report.mean == doctest::Approx(0.5517948717948717).epsilon(1e-12));
    CHECK_FALSE(report.pass);
  }

  TEST_CASE("CSV cases load by header name") {
    geolog::testing::TempDir dir;
    geolog::testing::write_file(dir.file("c.csv"),
                                "candidate,id,reference,question\n"
                                "\"Se realizaron 10 tesis, en 2022\",x1,10,¿Cuántas?\n");
    const auto cases = load_eval_cases(dir.file("c.csv"));
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].id == "x1");
    CHECK(cases[0].candidate == "Se realizaron 10 tesis, en 2022");
    CHECK(evaluate_corpus(cases).scores[0].score.rule == ScoreRule::kNumberMatch);
  }
}
