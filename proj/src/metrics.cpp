#include "lexrag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lexrag/error.hpp"
#include "lexrag/unicode.hpp"
#include "lexrag/vector_index.hpp"

namespace lexrag {

namespace {

// Unambiguous n-gram key: each token length-prefixed.
std::string ngram_key(std::span<const std::string> tokens, std::size_t begin, std::size_t n) {
  std::string key;
  for (std::size_t i = begin; i < begin + n; ++i) {
    key += std::to_string(tokens[i].size());
    key += ':';
    key += tokens[i];
  }
  return key;
}

std::unordered_map<std::string, std::size_t> count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[ngram_key(tokens, i, n)];
  return counts;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double f_score(double p, double r, double beta) {
  const double b2 = beta * beta;
  const double denom = r + b2 * p;
  return denom > 0.0 ? (1.0 + b2) * (p * r) / denom : 0.0;
}

Vector unit(const Vector& v) {
  Vector out = v;
  normalize_in_place(out);
  return out;
}

}  // namespace

std::string_view to_string(TokenizationPolicy policy) {
  return policy == TokenizationPolicy::Whitespace ? "whitespace" : "codepoint";
}

std::optional<TokenizationPolicy> parse_tokenization_policy(std::string_view text) {
  if (text == "whitespace") return TokenizationPolicy::Whitespace;
  if (text == "codepoint") return TokenizationPolicy::Codepoint;
  return std::nullopt;
}

Tokens tokenize(std::string_view text, TokenizationPolicy policy) {
  return policy == TokenizationPolicy::Whitespace ? unicode::split_whitespace(text) : unicode::split_codepoints(text);
}

double bleu(std::span<const TokenPair> pairs, std::size_t max_order) {
  if (max_order == 0) fail(ErrorKind::Usage, "BLEU max_order must be positive");
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (const TokenPair& p : pairs) {
    if (p.ref.empty()) fail(ErrorKind::Validation, "BLEU reference is empty");
    hyp_len += p.hyp.size();
    ref_len += p.ref.size();
  }
  if (hyp_len == 0) return 0.0;

  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    std::size_t matched = 0;
    std::size_t candidates = 0;
    for (const TokenPair& p : pairs) {
      const auto hyp_counts = count_ngrams(p.hyp, n);
      const auto ref_counts = count_ngrams(p.ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        candidates += count;
        if (auto it = ref_counts.find(gram); it != ref_counts.end()) matched += std::min(count, it->second);
      }
    }
    if (candidates == 0) continue;
    const double precision =
        matched > 0 ? static_cast<double>(matched) / static_cast<double>(candidates) : kBleuZeroPrecision;
    log_sum += std::log(precision);
    ++orders;
  }

  const double c = static_cast<double>(hyp_len);
  const double r = static_cast<double>(ref_len);
  const double brevity = hyp_len > ref_len ? 1.0 : std::exp(1.0 - r / c);
  return brevity * std::exp(log_sum / static_cast<double>(orders));
}

Prf rouge_l(std::span<const std::string> hyp, std::span<const std::string> ref, double beta) {
  if (hyp.empty() || ref.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  Prf out;
  out.p = lcs / static_cast<double>(hyp.size());
  out.r = lcs / static_cast<double>(ref.size());
  out.f = f_score(out.p, out.r, beta);
  return out;
}

Prf bertscore_vectors(std::span<const Vector> hyp, std::span<const Vector> ref) {
  if (hyp.empty() || ref.empty()) fail(ErrorKind::Usage, "BERTScore needs non-empty hypothesis and reference");
  std::vector<Vector> h;
  std::vector<Vector> r;
  h.reserve(hyp.size());
  r.reserve(ref.size());
  for (const Vector& v : hyp) h.push_back(unit(v));
  for (const Vector& v : ref) r.push_back(unit(v));
  for (const Vector& v : r) {
    if (v.size() != h.front().size()) fail(ErrorKind::Backend, "token embeddings differ in dimension");
  }

  std::vector<double> best_h(h.size(), -1.0);
  std::vector<double> best_r(r.size(), -1.0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].size() != h.front().size()) fail(ErrorKind::Backend, "token embeddings differ in dimension");
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double sim = std::clamp(dot(h[i], r[j]), -1.0, 1.0);
      best_h[i] = std::max(best_h[i], sim);
      best_r[j] = std::max(best_r[j], sim);
    }
  }
  Prf out;
  for (double s : best_h) out.p += s;
  for (double s : best_r) out.r += s;
  out.p /= static_cast<double>(h.size());
  out.r /= static_cast<double>(r.size());
  out.f = out.p + out.r != 0.0 ? 2.0 * (out.p * out.r) / (out.p + out.r) : 0.0;
  // P and R of opposite sign can push the harmonic mean outside [-1, 1].
  out.f = std::clamp(out.f, -1.0, 1.0);
  return out;
}

Prf bertscore(std::span<const std::string> hyp, std::span<const std::string> ref, Embedder& embedder) {
  if (hyp.empty() || ref.empty()) fail(ErrorKind::Usage, "BERTScore needs non-empty hypothesis and reference");
  const std::vector<Vector> hv = embedder.embed_tokens(hyp);
  const std::vector<Vector> rv = embedder.embed_tokens(ref);
  if (hv.size() != hyp.size() || rv.size() != ref.size()) {
    fail(ErrorKind::Backend, "token embedder returned the wrong number of vectors");
  }
  return bertscore_vectors(hv, rv);
}

MetricReport evaluate_set(std::span<const std::string> hyps, std::span<const std::string> refs,
                          TokenizationPolicy policy, Embedder* token_embedder, const MetricSelection& selection) {
  if (hyps.size() != refs.size()) {
    fail(ErrorKind::Validation, "hypothesis count " + std::to_string(hyps.size()) + " != reference count " +
                                    std::to_string(refs.size()));
  }
  if (hyps.empty()) fail(ErrorKind::Validation, "nothing to evaluate");
  if (selection.bertscore && token_embedder == nullptr) fail(ErrorKind::Usage, "BERTScore requires a token embedder");

  std::vector<TokenPair> pairs;
  pairs.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    TokenPair pair{tokenize(hyps[i], policy), tokenize(refs[i], policy)};
    if (pair.ref.empty()) fail(ErrorKind::Validation, "reference " + std::to_string(i + 1) + " is empty");
    pairs.push_back(std::move(pair));
  }

  MetricReport report;
  report.n_sentences = pairs.size();
  const double n = static_cast<double>(pairs.size());

  if (selection.bleu) report.bleu = bleu(pairs);

  if (selection.rouge) {
    Prf mean;
    for (const TokenPair& p : pairs) {
      const Prf s = rouge_l(p.hyp, p.ref);
      mean.p += s.p;
      mean.r += s.r;
      mean.f += s.f;
    }
    report.rouge_l = Prf{mean.p / n, mean.r / n, mean.f / n};
  }

  if (selection.bertscore) {
    // Embed each distinct token once.
    std::vector<std::string> vocab;
    std::unordered_map<std::string, std::size_t> slot;
    for (const TokenPair& p : pairs) {
      for (const Tokens* side : {&p.hyp, &p.ref}) {
        for (const std::string& t : *side) {
          if (slot.emplace(t, vocab.size()).second) vocab.push_back(t);
        }
      }
    }
    std::vector<Vector> table;
    table.reserve(vocab.size());
    constexpr std::size_t kBatch = 256;
    for (std::size_t begin = 0; begin < vocab.size(); begin += kBatch) {
      const std::size_t end = std::min(vocab.size(), begin + kBatch);
      std::vector<Vector> batch =
          token_embedder->embed_tokens(std::span<const std::string>(vocab).subspan(begin, end - begin));
      if (batch.size() != end - begin) fail(ErrorKind::Backend, "token embedder returned the wrong number of vectors");
      for (Vector& v : batch) table.push_back(std::move(v));
    }

    Prf mean;
    for (const TokenPair& p : pairs) {
      if (p.hyp.empty()) continue;
      std::vector<Vector> hv;
      std::vector<Vector> rv;
      for (const std::string& t : p.hyp) hv.push_back(table[slot.at(t)]);
      for (const std::string& t : p.ref) rv.push_back(table[slot.at(t)]);
      const Prf s = bertscore_vectors(hv, rv);
      mean.p += s.p;
      mean.r += s.r;
      mean.f += s.f;
    }
    report.bertscore = Prf{mean.p / n, mean.r / n, mean.f / n};
  }
  return report;
}

}  // namespace lexrag
