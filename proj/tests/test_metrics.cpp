#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "lexrag/metrics.hpp"
#include "test_support.hpp"

using namespace lexrag;
using lexrag::testing::data_dir;
using lexrag::testing::random_tokens;
using lexrag::testing::read_file;
using lexrag::testing::TableEmbedder;

namespace {

Tokens toks(std::string_view s) { return tokenize(s); }

double bleu1(std::string_view hyp, std::string_view ref) {
  const std::vector<TokenPair> pairs{{toks(hyp), toks(ref)}};
  return bleu(pairs);
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("ᎠᎴ ᎤᏁᎳᏅᎯ") == Tokens{"ᎠᎴ", "ᎤᏁᎳᏅᎯ"});
  CHECK(tokenize("ᎠᎴ", TokenizationPolicy::Codepoint) == Tokens{"Ꭰ", "Ꮄ"});
  CHECK(tokenize("").empty());
  CHECK(tokenize(" a  b\t") == Tokens{"a", "b"});
  CHECK(parse_tokenization_policy("codepoint") == TokenizationPolicy::Codepoint);
  CHECK_FALSE(parse_tokenization_policy("chars").has_value());
}

TEST_CASE("bleu hand-computed cases") {
  CHECK(bleu1("a b c d e", "a b c d f") == doctest::Approx(0.668740304976422).epsilon(1e-12));
  CHECK(bleu1("a b", "a b c d") == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(bleu1("a b c d", "a b c d") == 1.0);
  CHECK(bleu1("x y z w", "a b c d") < 1e-6);
  // longer hypothesis: no brevity penalty
  CHECK(bleu1("a b c d e f", "a b c d") ==
        doctest::Approx(std::pow(4.0 / 6 * 3.0 / 5 * 2.0 / 4 * 1.0 / 3, 0.25)).epsilon(1e-12));
}

TEST_CASE("bleu edge cases") {
  const std::vector<TokenPair> empty_hyp{{{}, toks("a b")}};
  CHECK(bleu(empty_hyp) == 0.0);
  const std::vector<TokenPair> empty_ref{{toks("a"), {}}};
  CHECK_THROWS_AS(bleu(empty_ref), Error);
  CHECK(bleu({}) == 0.0);
  const std::vector<TokenPair> clipped{{toks("the the the"), toks("the cat")}};
  // p1 = 1/3, p2 = eps, BP = 1
  CHECK(bleu(clipped, 2) == doctest::Approx(std::sqrt(1.0 / 3 * 1e-9)).epsilon(1e-9));
}

TEST_CASE("rouge_l hand-computed cases") {
  const Prf r = rouge_l(toks("the cat sat on mat"), toks("the cat on the mat"));
  CHECK(r.p == doctest::Approx(0.8));
  CHECK(r.r == doctest::Approx(0.8));
  CHECK(r.f == doctest::Approx(0.8));
  CHECK(rouge_l(toks("a b c"), toks("a b c")) == Prf{1.0, 1.0, 1.0});
  CHECK(rouge_l({}, toks("a")) == Prf{});
  CHECK(rouge_l(toks("a"), {}) == Prf{});
  CHECK(rouge_l(toks("x"), toks("y")) == Prf{});
  const Prf weighted = rouge_l(toks("a b"), toks("a b c d"), 2.0);
  CHECK(weighted.f == doctest::Approx(5.0 * 1.0 * 0.5 / (0.5 + 4.0 * 1.0)));
}

TEST_CASE("fixture matches the brute-force oracle") {
  const auto hyps = lines_of(data_dir() / "metrics_fixture" / "hyp.txt");
  const auto refs = lines_of(data_dir() / "metrics_fixture" / "ref.txt");
  const auto expected = nlohmann::json::parse(read_file(data_dir() / "metrics_fixture" / "expected.json"));
  REQUIRE(hyps.size() == 20);
  REQUIRE(refs.size() == 20);

  const auto report = evaluate_set(hyps, refs, TokenizationPolicy::Whitespace, nullptr, {true, true, false});
  CHECK(report.n_sentences == 20);
  CHECK(std::abs(*report.bleu - expected["bleu"].get<double>()) < 1e-6);
  CHECK(std::abs(report.rouge_l->p - expected["rouge_l_p"].get<double>()) < 1e-6);
  CHECK(std::abs(report.rouge_l->r - expected["rouge_l_r"].get<double>()) < 1e-6);
  CHECK(std::abs(report.rouge_l->f - expected["rouge_l_f"].get<double>()) < 1e-6);
  CHECK_FALSE(report.bertscore.has_value());

  for (std::size_t i = 0; i < hyps.size(); ++i) {
    CAPTURE(i);
    const auto& e = expected["sentences"][i];
    const std::vector<TokenPair> pair{{toks(hyps[i]), toks(refs[i])}};
    CHECK(std::abs(bleu(pair) - e["bleu"].get<double>()) < 1e-6);
    const Prf r = rouge_l(pair[0].hyp, pair[0].ref);
    CHECK(std::abs(r.p - e["rouge_l_p"].get<double>()) < 1e-6);
    CHECK(std::abs(r.r - e["rouge_l_r"].get<double>()) < 1e-6);
    CHECK(std::abs(r.f - e["rouge_l_f"].get<double>()) < 1e-6);
  }
}

TEST_CASE("bertscore orthogonal embeddings") {
  TableEmbedder e({{"a", {1, 0, 0}}, {"b", {0, 1, 0}}, {"c", {0, 0, 1}}});
  const Prf s = bertscore(Tokens{"a", "b"}, Tokens{"a", "c"}, e);
  CHECK(s.p == doctest::Approx(0.5));
  CHECK(s.r == doctest::Approx(0.5));
  CHECK(s.f == doctest::Approx(0.5));
}

TEST_CASE("bertscore single pair with cosine one half") {
  const std::vector<Vector> h{{1.0f, 0.0f}};
  const std::vector<Vector> r{{0.5f, static_cast<float>(std::sqrt(0.75))}};
  const Prf s = bertscore_vectors(h, r);
  CHECK(s.p == doctest::Approx(0.5));
  CHECK(s.r == doctest::Approx(0.5));
  CHECK(s.f == doctest::Approx(0.5));
}

TEST_CASE("bertscore identity and errors") {
  MockEmbedder e(32);
  const Prf s = bertscore(toks("the cat sat"), toks("the cat sat"), e);
  CHECK(s.p == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.f == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(bertscore({}, toks("a"), e), Error);
  CHECK_THROWS_AS(bertscore(toks("a"), {}, e), Error);
  const std::vector<Vector> h{{1.0f, 0.0f}}, r{{1.0f, 0.0f, 0.0f}};
  CHECK_THROWS_AS(bertscore_vectors(h, r), Error);
}

TEST_CASE("bertscore normalizes rows and stays in range") {
  const std::vector<Vector> h{{2.0f, 0.0f}, {-1.0f, 0.0f}};
  const std::vector<Vector> r{{5.0f, 0.0f}};
  const Prf s = bertscore_vectors(h, r);
  CHECK(s.p == doctest::Approx(0.0));
  CHECK(s.r == doctest::Approx(1.0));
  CHECK(s.f == doctest::Approx(0.0));
}

TEST_CASE("bertscore F1 is clamped when P and R differ in sign") {
  // P = (0.4 - 1) / 2 = -0.3, R = 0.4, so 2PR / (P + R) = -2.4
  const std::vector<Vector> h{{0.4f, static_cast<float>(std::sqrt(0.84))}, {-1.0f, 0.0f}};
  const std::vector<Vector> r{{1.0f, 0.0f}};
  const Prf s = bertscore_vectors(h, r);
  CHECK(s.p == doctest::Approx(-0.3));
  CHECK(s.r == doctest::Approx(0.4));
  CHECK(s.f == -1.0);
}

TEST_CASE("evaluate_set on identical sides") {
  const std::vector<std::string> lines{"the dog drinks water", "ᎩᏟ ᎠᎹ", "a b c"};
  MockEmbedder e(16);
  const auto report = evaluate_set(lines, lines, TokenizationPolicy::Whitespace, &e);
  CHECK(*report.bleu == doctest::Approx(1.0));
  CHECK(report.rouge_l->f == doctest::Approx(1.0));
  CHECK(report.bertscore->f == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.n_sentences == 3);
}

TEST_CASE("evaluate_set errors and empty hypotheses") {
  const std::vector<std::string> two{"a", "b"}, one{"a"};
  CHECK_THROWS_AS(evaluate_set(two, one, TokenizationPolicy::Whitespace, nullptr, {true, true, false}), Error);
  CHECK_THROWS_AS(evaluate_set({}, {}, TokenizationPolicy::Whitespace, nullptr, {true, true, false}), Error);
  CHECK_THROWS_AS(evaluate_set(one, one, TokenizationPolicy::Whitespace, nullptr), Error);
  const std::vector<std::string> blank_ref{""};
  CHECK_THROWS_AS(evaluate_set(one, blank_ref, TokenizationPolicy::Whitespace, nullptr, {true, true, false}), Error);

  MockEmbedder e(8);
  const std::vector<std::string> hyps{"", "a b"}, refs{"a", "a b"};
  const auto report = evaluate_set(hyps, refs, TokenizationPolicy::Whitespace, &e);
  CHECK(report.bertscore->f == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(report.rouge_l->f == doctest::Approx(0.5));
}

TEST_CASE("evaluate_set codepoint tokenization") {
  const std::vector<std::string> hyps{"ᎠᎴ"}, refs{"ᎠᎹ"};
  const auto report = evaluate_set(hyps, refs, TokenizationPolicy::Codepoint, nullptr, {false, true, false});
  CHECK(report.rouge_l->f == doctest::Approx(0.5));
  CHECK_FALSE(report.bleu.has_value());
}

TEST_CASE("property: identities, symmetry and ranges on random corpora") {
  std::mt19937_64 rng(2024);
  MockEmbedder e(16);
  for (int trial = 0; trial < 200; ++trial) {
    const Tokens h = random_tokens(rng, 1, 12);
    const Tokens r = random_tokens(rng, 1, 12);

    const std::vector<TokenPair> same{{h, h}};
    CHECK(bleu(same) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rouge_l(h, h) == Prf{1.0, 1.0, 1.0});

    const Prf fwd = rouge_l(h, r);
    const Prf back = rouge_l(r, h);
    CHECK(fwd.p == back.r);
    CHECK(fwd.r == back.p);
    CHECK(fwd.f == back.f);

    const Prf bf = bertscore(h, r, e);
    const Prf bb = bertscore(r, h, e);
    CHECK(bf.p == bb.r);
    CHECK(bf.r == bb.p);

    const std::vector<TokenPair> pair{{h, r}};
    const double b = bleu(pair);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    for (const Prf& x : {fwd, bf}) {
      CHECK(x.p >= -1.0);
      CHECK(x.p <= 1.0);
      CHECK(x.r >= -1.0);
      CHECK(x.r <= 1.0);
      CHECK(x.f >= -1.0);
      CHECK(x.f <= 1.0);
    }
    CHECK(fwd.f >= 0.0);
  }
}

TEST_CASE("property: bleu ignores pair order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenPair> pairs;
    for (int i = 0; i < 6; ++i) pairs.push_back({random_tokens(rng, 1, 8), random_tokens(rng, 1, 8)});
    const double before = bleu(pairs);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    CHECK(bleu(pairs) == before);
  }
}
