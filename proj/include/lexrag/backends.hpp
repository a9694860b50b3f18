#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexrag {

using Vector = std::vector<float>;

struct RetryPolicy {
  int max_attempts = 3;
  int initial_backoff_ms = 500;
  double multiplier = 2.0;
};

struct BackendConfig {
  std::string provider = "http";  // "http" or "mock"
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "LRL_API_KEY";
  std::string embed_model_id = "text-embedding-ada-002";
  std::string chat_model_id = "gpt-4o";
  int max_in_flight = 4;
  double timeout_s = 60.0;
  RetryPolicy retry;
  std::size_t mock_dim = 64;

  /// Throws Error(Format) when an invariant (max_in_flight >= 1, ...) fails.
  void validate() const;
};

struct GenerationResult {
  std::string text;
  std::string model_id;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  double latency_ms = 0.0;
};

/// Text embedding provider. Implementations must be safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;

  /// Identifies the model that produced the vectors; part of the cache key.
  virtual std::string id() const = 0;

  /// One vector per text, same order. Throws Error(Usage) on an empty list
  /// and Error(Backend) on provider failure.
  virtual std::vector<Vector> embed_texts(std::span<const std::string> texts) = 0;

  /// Token vectors for BERTScore. Defaults to embedding each token as a text.
  virtual std::vector<Vector> embed_tokens(std::span<const std::string> tokens) { return embed_texts(tokens); }
};

/// Chat completion provider. Implementations must be safe for concurrent calls.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string model_id() const = 0;
  virtual GenerationResult generate(std::string_view prompt) = 0;
};

/// Deterministic offline embedder. The SHA-256 digest of the text seeds a
/// Mersenne Twister whose output is mapped to [-1, 1] per component; the
/// result is scaled to unit length.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dim = 64);

  std::string id() const override;
  std::vector<Vector> embed_texts(std::span<const std::string> texts) override;

  std::size_t dim() const noexcept { return dim_; }
  /// Number of embed_texts/embed_tokens invocations so far.
  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t texts_embedded() const noexcept { return texts_.load(); }

  static Vector embed_one(std::string_view text, std::size_t dim);

 private:
  std::size_t dim_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> texts_{0};
};

/// Offline generator that echoes the glossary targets found in the prompt.
///
/// Reads the lines following `glossary_header` up to the first blank line,
/// takes the text after `separator` on each, and joins them with single
/// spaces. Returns `⟨no-entries⟩` when there is no glossary section.
class MockGenerator final : public Generator {
 public:
  static constexpr std::string_view kNoEntries = "⟨no-entries⟩";

  MockGenerator(std::string glossary_header, std::string separator);

  std::string model_id() const override { return "mock-glossary-echo"; }
  GenerationResult generate(std::string_view prompt) override;

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::string header_;
  std::string separator_;
  std::atomic<std::size_t> calls_{0};
};

/// Counting semaphore with a runtime bound.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit);

  void acquire();
  void release();

  class Slot {
   public:
    explicit Slot(InFlightLimiter& owner) : owner_(owner) { owner_.acquire(); }
    ~Slot() { owner_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& owner_;
  };

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

/// Client for OpenAI-style `/embeddings` and `/chat/completions` endpoints.
///
/// Retries transport errors, HTTP 429 and 5xx with exponential backoff; any
/// other 4xx fails at once. At most `max_in_flight` requests are outstanding
/// across all threads. The bearer token is read from the environment variable
/// named by `api_key_env` when the client is constructed.
class HttpBackend final : public Embedder, public Generator {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  std::string id() const override { return config_.embed_model_id; }
  std::vector<Vector> embed_texts(std::span<const std::string> texts) override;

  std::string model_id() const override { return config_.chat_model_id; }
  GenerationResult generate(std::string_view prompt) override;

  /// HTTP requests issued so far, retries included.
  std::size_t requests() const noexcept { return requests_.load(); }

 private:
  struct Response {
    int status;
    std::string body;
  };
  Response post_with_retry(const std::string& path, const std::string& body);

  BackendConfig config_;
  std::string origin_;
  std::string path_prefix_;
  std::string api_key_;
  InFlightLimiter limiter_;
  std::atomic<std::size_t> requests_{0};
  std::mutex dim_mu_;
  std::optional<std::size_t> dim_;
};

/// The embedder/generator pair a command runs against.
struct Backends {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<Generator> generator;
};

/// `glossary_header`/`separator` configure the mock generator; they come from
/// the prompt template in use.
Backends make_backends(const BackendConfig& config, const std::string& glossary_header,
                       const std::string& separator);

/// Scales v to unit Euclidean norm. Throws Error(Backend) for a zero vector.
void normalize_in_place(Vector& v);

}  // namespace lexrag
