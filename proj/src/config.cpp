#include "lexrag/config.hpp"

#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>

#include "lexrag/error.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& j, std::string name, std::initializer_list<const char*> allowed) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) fail(ErrorKind::Format, "config: '" + name_ + "' must be an object");
    for (const auto& [key, value] : j_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(ErrorKind::Format, "config: unknown key '" + qualified(key) + "'");
    }
  }

  const json* find(const char* key) const {
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const char* key, T& out) const {
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Format, "config: '" + qualified(key) + "' has the wrong type");
    }
  }

  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

PromptTemplate AppConfig::prompt_template() const {
  if (template_path) return PromptTemplate::load(*template_path);
  return PromptTemplate{};
}

AppConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::Io, "config file not found: " + file.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, file.string() + ": malformed JSON: " + e.what());
  }
  const std::filesystem::path base = file.parent_path();

  AppConfig cfg;
  const Section top(root, "",
                    {"backend", "retrieval", "languages", "template", "tokenize", "index_dir", "cache_dir",
                     "report_format", "batch_size"});

  if (const json* b = top.find("backend")) {
    const Section s(*b, "backend",
                    {"provider", "base_url", "api_key_env", "embed_model_id", "chat_model_id", "max_in_flight",
                     "timeout_s", "retry", "mock_dim"});
    BackendConfig& bc = cfg.backend;
    s.read("provider", bc.provider);
    s.read("base_url", bc.base_url);
    s.read("api_key_env", bc.api_key_env);
    s.read("embed_model_id", bc.embed_model_id);
    s.read("chat_model_id", bc.chat_model_id);
    s.read("max_in_flight", bc.max_in_flight);
    s.read("timeout_s", bc.timeout_s);
    s.read("mock_dim", bc.mock_dim);
    if (const json* r = s.find("retry")) {
      const Section rs(*r, "backend.retry", {"max_attempts", "initial_backoff_ms", "multiplier"});
      rs.read("max_attempts", bc.retry.max_attempts);
      rs.read("initial_backoff_ms", bc.retry.initial_backoff_ms);
      rs.read("multiplier", bc.retry.multiplier);
    }
  }

  if (const json* r = top.find("retrieval")) {
    const Section s(*r, "retrieval", {"k_vector", "k_total", "policy", "max_phrase_len"});
    s.read("k_vector", cfg.retrieval.k_vector);
    s.read("k_total", cfg.retrieval.k_total);
    s.read("max_phrase_len", cfg.retrieval.max_phrase_len);
    std::string policy(to_string(cfg.retrieval.policy));
    s.read("policy", policy);
    auto parsed = parse_fallback_policy(policy);
    if (!parsed) fail(ErrorKind::Format, "config: retrieval.policy must be 'strict_fallback' or 'fill'");
    cfg.retrieval.policy = *parsed;
  }

  if (const json* l = top.find("languages")) {
    const Section s(*l, "languages", {"source", "target"});
    s.read("source", cfg.languages.source);
    s.read("target", cfg.languages.target);
  }

  std::string text;
  if (top.find("template")) {
    top.read("template", text);
    cfg.template_path = resolve(base, text);
    if (!std::filesystem::exists(*cfg.template_path)) {
      fail(ErrorKind::Io, "config: template not found: " + cfg.template_path->string());
    }
  }
  if (top.find("index_dir")) {
    top.read("index_dir", text);
    cfg.index_dir = resolve(base, text);
  }
  if (top.find("cache_dir")) {
    top.read("cache_dir", text);
    cfg.cache_dir = resolve(base, text);
  }
  if (top.find("tokenize")) {
    top.read("tokenize", text);
    auto policy = parse_tokenization_policy(text);
    if (!policy) fail(ErrorKind::Format, "config: tokenize must be 'whitespace' or 'codepoint'");
    cfg.tokenize = *policy;
  }
  if (top.find("report_format")) {
    top.read("report_format", text);
    auto format = parse_report_format(text);
    if (!format) fail(ErrorKind::Format, "config: report_format must be json, csv or markdown");
    cfg.report_format = *format;
  }
  top.read("batch_size", cfg.batch_size);
  if (cfg.batch_size == 0) fail(ErrorKind::Format, "config: batch_size must be positive");

  cfg.backend.validate();
  cfg.retrieval.validate();
  return cfg;
}

AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (std::filesystem::exists(kDefaultConfigPath)) return load_config(kDefaultConfigPath);
  return AppConfig{};
}

}  // namespace lexrag
