#include "lexrag/index_store.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "lexrag/error.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'L', 'R', 'X', 'V'};
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kKeywordFile = "keyword_index.json";
constexpr const char* kDocsFile = "docs.jsonl";
constexpr const char* kVectorsFile = "vectors.bin";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::filesystem::path& file) : bytes_(bytes), file_(file) {}

  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) fail(ErrorKind::Format, file_.string() + ": truncated file while reading " + what);
  }

  const std::string& bytes_;
  const std::filesystem::path& file_;
  std::size_t pos_ = 0;
};

std::string read_all(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_all(const std::filesystem::path& file, const std::string& bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + file.string());
}

json read_json(const std::filesystem::path& file) {
  const std::string text = read_all(file);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, file.string() + ": malformed JSON: " + e.what());
  }
}

IndexManifest manifest_from_json(const json& j, const std::filesystem::path& file) {
  try {
    IndexManifest m;
    m.version = j.at("version").get<std::uint32_t>();
    m.dim = j.at("dim").get<std::size_t>();
    m.count = j.at("count").get<std::size_t>();
    m.embedder_id = j.at("embedder_id").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.max_phrase_len = j.at("max_phrase_len").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, file.string() + ": bad manifest: " + e.what());
  }
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

IndexManifest make_manifest(const KeywordIndex& keywords, const VectorIndex& vectors) {
  IndexManifest m;
  m.dim = vectors.dim();
  m.count = vectors.count();
  m.embedder_id = vectors.embedder_id();
  m.created_at = utc_timestamp();
  m.max_phrase_len = keywords.max_phrase_len();
  return m;
}

void write_vectors_file(const std::filesystem::path& file, const VectorIndex& vectors) {
  std::string bytes(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(bytes, kIndexVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(vectors.dim()));
  put_le<std::uint64_t>(bytes, vectors.count());
  for (std::size_t i = 0; i < vectors.count(); ++i) {
    const std::string id = vectors.ids()[i].str();
    put_le<std::uint16_t>(bytes, static_cast<std::uint16_t>(id.size()));
    bytes += id;
    for (float x : vectors.row(i)) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(x));
  }
  write_all(file, bytes);
}

VectorIndex read_vectors_file(const std::filesystem::path& file, const std::string& embedder_id) {
  const std::string bytes = read_all(file);
  Reader r(bytes, file);
  if (r.remaining() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    fail(ErrorKind::Format, file.string() + ": bad magic bytes (expected LRXV)");
  }
  r.take(sizeof kMagic, "magic");
  const auto version = r.get_le<std::uint32_t>("version");
  if (version != kIndexVersion) {
    fail(ErrorKind::Format, file.string() + ": unsupported version " + std::to_string(version));
  }
  const auto dim = r.get_le<std::uint32_t>("dim");
  const auto count = r.get_le<std::uint64_t>("count");
  if (count > 0 && dim == 0) fail(ErrorKind::Format, file.string() + ": zero dimension with non-empty payload");

  VectorIndex index(dim, embedder_id);
  std::vector<float> row(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto id_len = r.get_le<std::uint16_t>("id length");
    const std::string_view id_text = r.take(id_len, "id");
    const auto id = DocId::parse(id_text);
    if (!id) fail(ErrorKind::Format, file.string() + ": malformed id in record " + std::to_string(i));
    for (float& x : row) x = std::bit_cast<float>(r.get_le<std::uint32_t>("vector"));
    try {
      index.add(*id, row);
    } catch (const Error& e) {
      fail(ErrorKind::Format, file.string() + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    fail(ErrorKind::Format, file.string() + ": " + std::to_string(r.remaining()) +
                                " trailing bytes; header count/dim inconsistent with payload length");
  }
  return index;
}

void save_index(const std::filesystem::path& dir, const DocumentStore& docs, const KeywordIndex& keywords,
                const VectorIndex& vectors, const IndexManifest& manifest) {
  if (manifest.count != vectors.count() || manifest.dim != vectors.dim()) {
    fail(ErrorKind::Validation, "manifest count/dim do not match the vector index");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  json mj{{"version", manifest.version},         {"dim", manifest.dim},
          {"count", manifest.count},             {"embedder_id", manifest.embedder_id},
          {"created_at", manifest.created_at},   {"max_phrase_len", manifest.max_phrase_len}};
  write_all(dir / kManifestFile, mj.dump(2) + "\n");

  json kj = json::object();
  for (const auto& [phrase, ids] : keywords.entries()) {
    json arr = json::array();
    for (const DocId& id : ids) arr.push_back(id.str());
    kj[phrase] = std::move(arr);
  }
  write_all(dir / kKeywordFile, kj.dump() + "\n");

  write_documents(dir / kDocsFile, docs.documents());
  write_vectors_file(dir / kVectorsFile, vectors);
}

IndexSet load_index(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "index directory not found: " + dir.string());

  const IndexManifest manifest = manifest_from_json(read_json(dir / kManifestFile), dir / kManifestFile);
  if (manifest.version != kIndexVersion) {
    fail(ErrorKind::Format, "manifest version " + std::to_string(manifest.version) + " is not supported");
  }

  VectorIndex vectors = read_vectors_file(dir / kVectorsFile, manifest.embedder_id);
  if (vectors.count() != manifest.count) {
    fail(ErrorKind::Format, "manifest count " + std::to_string(manifest.count) + " but vectors.bin holds " +
                                std::to_string(vectors.count()) + " rows");
  }
  if (vectors.dim() != manifest.dim) {
    fail(ErrorKind::Format, "manifest dim " + std::to_string(manifest.dim) + " but vectors.bin has dim " +
                                std::to_string(vectors.dim()));
  }

  DocumentStore docs(read_documents(dir / kDocsFile));

  const std::filesystem::path kw_file = dir / kKeywordFile;
  const json kj = read_json(kw_file);
  if (!kj.is_object()) fail(ErrorKind::Format, kw_file.string() + ": expected a JSON object");
  std::map<std::string, KeywordIndex::Postings> entries;
  for (const auto& [phrase, ids] : kj.items()) {
    if (!ids.is_array()) fail(ErrorKind::Format, kw_file.string() + ": postings for '" + phrase + "' not an array");
    auto& postings = entries[phrase];
    for (const json& raw : ids) {
      const auto id = raw.is_string() ? DocId::parse(raw.get<std::string>()) : std::nullopt;
      if (!id) fail(ErrorKind::Format, kw_file.string() + ": malformed id under '" + phrase + "'");
      if (!docs.contains(*id)) fail(ErrorKind::Format, "keyword index references unknown document " + id->str());
      postings.push_back(*id);
    }
  }
  for (const DocId& id : vectors.ids()) {
    if (!docs.contains(id)) fail(ErrorKind::Format, "vectors.bin references unknown document " + id.str());
  }

  KeywordIndex keywords(std::move(entries), manifest.max_phrase_len);
  return IndexSet{std::move(docs), std::move(keywords), std::move(vectors), manifest};
}

}  // namespace lexrag
