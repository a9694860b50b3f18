#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "lexrag/backends.hpp"
#include "lexrag/metrics.hpp"
#include "lexrag/pipeline.hpp"
#include "lexrag/report.hpp"
#include "lexrag/retrieval.hpp"

namespace lexrag {

inline constexpr const char* kDefaultConfigPath = "lexrag.json";

/// Settings shared by every CLI command.
///
/// The JSON file mirrors this struct:
///
///     {
///       "backend":   {"provider", "base_url", "api_key_env", "embed_model_id",
///                     "chat_model_id", "max_in_flight", "timeout_s", "mock_dim",
///                     "retry": {"max_attempts", "initial_backoff_ms", "multiplier"}},
///       "retrieval": {"k_vector", "k_total", "policy", "max_phrase_len"},
///       "languages": {"source", "target"},
///       "template", "tokenize", "index_dir", "cache_dir", "report_format",
///       "batch_size"
///     }
///
/// Every key is optional; unknown keys anywhere are rejected. Relative paths
/// are resolved against the directory holding the config file.
struct AppConfig {
  BackendConfig backend;
  RetrievalConfig retrieval;
  Languages languages;
  std::optional<std::filesystem::path> template_path;
  TokenizationPolicy tokenize = TokenizationPolicy::Whitespace;
  std::optional<std::filesystem::path> index_dir;
  std::optional<std::filesystem::path> cache_dir;
  ReportFormat report_format = ReportFormat::Json;
  std::size_t batch_size = 64;

  /// Loads the template file when one is configured, else the default.
  PromptTemplate prompt_template() const;
};

/// Throws Error(Io) if the file is missing and Error(Format) for malformed
/// JSON, unknown keys, wrong types, or values that break an invariant.
AppConfig load_config(const std::filesystem::path& file);

/// An explicitly given path must exist. Without one, `./lexrag.json` is used
/// when present and built-in defaults otherwise.
AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace lexrag
