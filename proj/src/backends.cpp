#include "lexrag/backends.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "lexrag/error.hpp"
#include "lexrag/hashing.hpp"

namespace lexrag {

void BackendConfig::validate() const {
  if (provider != "http" && provider != "mock") fail(ErrorKind::Format, "backend.provider must be 'http' or 'mock'");
  if (max_in_flight < 1) fail(ErrorKind::Format, "backend.max_in_flight must be >= 1");
  if (retry.max_attempts < 1) fail(ErrorKind::Format, "backend.retry.max_attempts must be >= 1");
  if (retry.initial_backoff_ms < 0) fail(ErrorKind::Format, "backend.retry.initial_backoff_ms must be >= 0");
  if (retry.multiplier < 1.0) fail(ErrorKind::Format, "backend.retry.multiplier must be >= 1");
  if (timeout_s <= 0.0) fail(ErrorKind::Format, "backend.timeout_s must be positive");
  if (mock_dim == 0) fail(ErrorKind::Format, "backend.mock_dim must be positive");
}

void normalize_in_place(Vector& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (!(sq > 0.0) || !std::isfinite(sq)) fail(ErrorKind::Backend, "embedding backend returned a zero or non-finite vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
}

// MockEmbedder ---------------------------------------------------------------

MockEmbedder::MockEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) fail(ErrorKind::Usage, "mock embedder dimension must be positive");
}

std::string MockEmbedder::id() const { return "mock-sha256-d" + std::to_string(dim_); }

Vector MockEmbedder::embed_one(std::string_view text, std::size_t dim) {
  const Sha256Digest digest = sha256(text);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = (std::uint32_t{digest[4 * i]} << 24) | (std::uint32_t{digest[4 * i + 1]} << 16) |
               (std::uint32_t{digest[4 * i + 2]} << 8) | std::uint32_t{digest[4 * i + 3]};
  }
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 engine(seq);
  std::vector<double> raw(dim);
  double sq = 0.0;
  for (double& x : raw) {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    x = 2.0 * unit - 1.0;
    sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(sq);
  Vector out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(raw[i] * inv);
  return out;
}

std::vector<Vector> MockEmbedder::embed_texts(std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorKind::Usage, "embed request with no texts");
  ++calls_;
  texts_ += texts.size();
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(embed_one(t, dim_));
  return out;
}

// MockGenerator --------------------------------------------------------------

MockGenerator::MockGenerator(std::string glossary_header, std::string separator)
    : header_(std::move(glossary_header)), separator_(std::move(separator)) {}

GenerationResult MockGenerator::generate(std::string_view prompt) {
  if (prompt.empty()) fail(ErrorKind::Usage, "empty prompt");
  ++calls_;
  const auto started = std::chrono::steady_clock::now();

  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= prompt.size();) {
    std::size_t nl = prompt.find('\n', pos);
    if (nl == std::string_view::npos) nl = prompt.size();
    lines.push_back(prompt.substr(pos, nl - pos));
    pos = nl + 1;
  }

  std::string text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] != header_) continue;
    for (std::size_t j = i + 1; j < lines.size() && !lines[j].empty(); ++j) {
      const std::size_t sep = lines[j].find(separator_);
      if (sep == std::string_view::npos) continue;
      if (!text.empty()) text += ' ';
      text += lines[j].substr(sep + separator_.size());
    }
    break;
  }
  if (text.empty()) text = kNoEntries;

  GenerationResult result;
  result.text = std::move(text);
  result.model_id = model_id();
  result.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// InFlightLimiter ------------------------------------------------------------

InFlightLimiter::InFlightLimiter(int limit) : available_(limit) {
  if (limit < 1) fail(ErrorKind::Usage, "in-flight limit must be >= 1");
}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return available_ > 0; });
  --available_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

Backends make_backends(const BackendConfig& config, const std::string& glossary_header,
                       const std::string& separator) {
  config.validate();
  if (config.provider == "mock") {
    return {std::make_shared<MockEmbedder>(config.mock_dim),
            std::make_shared<MockGenerator>(glossary_header, separator)};
  }
  auto http = std::make_shared<HttpBackend>(config);
  return {http, http};
}

}  // namespace lexrag
