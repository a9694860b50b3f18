#include "lexrag/embedding_cache.hpp"

#include <nlohmann/json.hpp>

#include "lexrag/error.hpp"
#include "lexrag/hashing.hpp"

namespace lexrag {

using nlohmann::json;

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) {
  std::error_code ec;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path(), ec);
  if (ec) fail(ErrorKind::Io, "cannot create cache directory " + file_.parent_path().string() + ": " + ec.message());

  if (std::ifstream in(file_); in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json obj = json::parse(line);
        Vector v = obj.at("vector").get<Vector>();
        if (v.size() != obj.at("dim").get<std::size_t>()) throw std::runtime_error("dim does not match vector length");
        entries_[obj.at("key").get<std::string>()] = std::move(v);
      } catch (const std::exception& e) {
        fail(ErrorKind::Format, file_.string() + ":" + std::to_string(line_no) + ": bad cache line: " + e.what());
      }
    }
  }
  out_.open(file_, std::ios::app | std::ios::binary);
  if (!out_) fail(ErrorKind::Io, "cannot open cache file " + file_.string());
}

std::string EmbeddingCache::key(std::string_view embedder_id, std::string_view text) {
  std::string material;
  material.reserve(embedder_id.size() + 1 + text.size());
  material.append(embedder_id);
  material.push_back('\0');
  material.append(text);
  return to_hex(sha256(material));
}

std::optional<Vector> EmbeddingCache::get(std::string_view embedder_id, std::string_view text) const {
  const std::string k = key(embedder_id, text);
  std::shared_lock lock(mu_);
  auto it = entries_.find(k);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(std::string_view embedder_id, std::string_view text, const Vector& v) {
  std::string k = key(embedder_id, text);
  const json line{{"key", k}, {"dim", v.size()}, {"vector", v}};
  std::unique_lock lock(mu_);
  out_ << line.dump() << '\n';
  out_.flush();
  if (!out_) fail(ErrorKind::Io, "cannot append to cache file " + file_.string());
  entries_[std::move(k)] = v;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

}  // namespace lexrag
