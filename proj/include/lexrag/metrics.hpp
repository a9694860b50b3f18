#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexrag/backends.hpp"

namespace lexrag {

using Tokens = std::vector<std::string>;

enum class TokenizationPolicy {
  Whitespace,  // split on Unicode whitespace
  Codepoint,   // one token per non-whitespace scalar value
};

std::string_view to_string(TokenizationPolicy policy);
std::optional<TokenizationPolicy> parse_tokenization_policy(std::string_view text);

Tokens tokenize(std::string_view text, TokenizationPolicy policy = TokenizationPolicy::Whitespace);

/// Precision, recall, F.
struct Prf {
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;

  bool operator==(const Prf&) const = default;
};

struct TokenPair {
  Tokens hyp;
  Tokens ref;
};

inline constexpr double kBleuZeroPrecision = 1e-9;

/// Corpus BLEU with a single reference per segment.
///
/// Clipped n-gram matches and candidate counts are summed over the corpus for
/// n = 1..max_order. Orders with no candidate n-grams are left out of the
/// geometric mean; an order with zero matches contributes kBleuZeroPrecision.
/// Brevity penalty is exp(1 - r/c) unless c > r. An empty hypothesis corpus
/// scores 0. Throws Error(Validation) on an empty reference.
double bleu(std::span<const TokenPair> pairs, std::size_t max_order = 4);

/// LCS-based ROUGE-L. Empty hypothesis or reference gives (0, 0, 0).
Prf rouge_l(std::span<const std::string> hyp, std::span<const std::string> ref, double beta = 1.0);

/// Greedy-matching BERTScore over already-embedded tokens. Rows are
/// normalized here; no IDF weighting, no baseline rescaling. Cosines and F1
/// are clamped to [-1, 1].
Prf bertscore_vectors(std::span<const Vector> hyp, std::span<const Vector> ref);

/// Embeds both sides with `embedder.embed_tokens` and scores them.
/// Throws Error(Usage) if either side is empty.
Prf bertscore(std::span<const std::string> hyp, std::span<const std::string> ref, Embedder& embedder);

struct MetricSelection {
  bool bleu = true;
  bool rouge = true;
  bool bertscore = true;
};

struct MetricReport {
  std::optional<double> bleu;
  std::optional<Prf> rouge_l;
  std::optional<Prf> bertscore;  // f holds F1
  std::size_t n_sentences = 0;
};

/// Tokenizes each line pair and aggregates the selected metrics. ROUGE-L and
/// BERTScore are means of the sentence scores; BLEU is corpus level. A pair
/// with an empty hypothesis scores 0 on BERTScore.
///
/// Throws Error(Validation) when the lists differ in length or are empty, and
/// Error(Usage) if BERTScore is selected without an embedder.
MetricReport evaluate_set(std::span<const std::string> hyps, std::span<const std::string> refs,
                          TokenizationPolicy policy, Embedder* token_embedder,
                          const MetricSelection& selection = {});

}  // namespace lexrag
