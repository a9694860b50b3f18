#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "lexrag/backends.hpp"
#include "lexrag/error.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

json parse_payload(const std::string& body) {
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::parse_error&) {
    fail(ErrorKind::Backend, "provider returned non-JSON payload: " + excerpt(body));
  }
  if (payload.is_object() && payload.contains("error")) {
    fail(ErrorKind::Backend, "provider error: " + payload["error"].dump());
  }
  return payload;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)), limiter_(config_.max_in_flight) {
  config_.validate();
  const std::string& url = config_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::Format, "backend.base_url must include a scheme: " + url);
  const std::size_t path_begin = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_begin);
  if (path_begin != std::string::npos) path_prefix_ = url.substr(path_begin);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr) api_key_ = key;
}

HttpBackend::~HttpBackend() = default;

HttpBackend::Response HttpBackend::post_with_retry(const std::string& path, const std::string& body) {
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  double backoff_ms = config_.retry.initial_backoff_ms;
  std::string last_failure;

  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    {
      InFlightLimiter::Slot slot(limiter_);
      httplib::Client client(origin_);
      client.set_connection_timeout(timeout_us);
      client.set_read_timeout(timeout_us);
      client.set_write_timeout(timeout_us);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      ++requests_;
      auto res = client.Post(path_prefix_ + path, headers, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
      } else if (res->status >= 200 && res->status < 300) {
        return {res->status, res->body};
      } else if (retryable(res->status)) {
        last_failure = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
      } else {
        fail(ErrorKind::Backend, "HTTP " + std::to_string(res->status) + " from " + path + ": " + excerpt(res->body));
      }
    }
    if (attempt < config_.retry.max_attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(backoff_ms));
      backoff_ms *= config_.retry.multiplier;
    }
  }
  fail(ErrorKind::Backend,
       path + " failed after " + std::to_string(config_.retry.max_attempts) + " attempts; last: " + last_failure);
}

std::vector<Vector> HttpBackend::embed_texts(std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorKind::Usage, "embed request with no texts");
  const json request{{"model", config_.embed_model_id}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
  const Response response = post_with_retry("/embeddings", request.dump());
  const json payload = parse_payload(response.body);

  std::vector<Vector> out(texts.size());
  try {
    const json& data = payload.at("data");
    if (!data.is_array() || data.size() != texts.size()) {
      fail(ErrorKind::Backend, "provider returned " + std::to_string(data.size()) + " embeddings for " +
                                   std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
      if (slot >= out.size() || !out[slot].empty()) fail(ErrorKind::Backend, "provider returned a bad embedding index");
      out[slot] = data[i].at("embedding").get<Vector>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Backend, std::string("unexpected embeddings payload: ") + e.what());
  }

  std::lock_guard lock(dim_mu_);
  for (const Vector& v : out) {
    if (v.empty()) fail(ErrorKind::Backend, "provider returned an empty embedding");
    if (!dim_) dim_ = v.size();
    if (v.size() != *dim_) {
      fail(ErrorKind::Backend, "embedding dimension drifted from " + std::to_string(*dim_) + " to " +
                                   std::to_string(v.size()));
    }
  }
  return out;
}

GenerationResult HttpBackend::generate(std::string_view prompt) {
  if (prompt.empty()) fail(ErrorKind::Usage, "empty prompt");
  const auto started = std::chrono::steady_clock::now();
  const json request{{"model", config_.chat_model_id},
                     {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})}};
  const Response response = post_with_retry("/chat/completions", request.dump());
  const json payload = parse_payload(response.body);

  GenerationResult result;
  try {
    result.text = payload.at("choices").at(0).at("message").at("content").get<std::string>();
    result.model_id = payload.value("model", config_.chat_model_id);
    if (auto usage = payload.find("usage"); usage != payload.end() && usage->is_object()) {
      if (usage->contains("prompt_tokens")) result.prompt_tokens = (*usage)["prompt_tokens"].get<std::int64_t>();
      if (usage->contains("completion_tokens")) {
        result.completion_tokens = (*usage)["completion_tokens"].get<std::int64_t>();
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Backend, std::string("unexpected chat payload: ") + e.what());
  }
  while (!result.text.empty() && std::isspace(static_cast<unsigned char>(result.text.back()))) result.text.pop_back();
  result.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace lexrag
