#include "lexrag/corpus.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "lexrag/error.hpp"
#include "lexrag/keyword_index.hpp"
#include "lexrag/unicode.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

constexpr std::string_view kDash = " — ";
constexpr std::string_view kImplies = " ⇒ ";

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

bool is_blank(std::string_view line) { return unicode::split_whitespace(line).empty(); }

// Invokes fn(line, line_no) for every non-blank line; handles BOM and CRLF.
// Returns the number of lines visited.
template <typename Fn>
std::size_t for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t visited = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!unicode::is_valid_utf8(line)) fail(ErrorKind::Format, where(path, line_no) + "invalid UTF-8");
    if (is_blank(line)) continue;
    ++visited;
    fn(line, line_no);
  }
  return visited;
}

json parse_object(const std::string& line, const std::filesystem::path& path, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, where(path, line_no) + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) fail(ErrorKind::Format, where(path, line_no) + "expected a JSON object");
  return obj;
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::filesystem::path& path,
                                           std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ErrorKind::Format, where(path, line_no) + "field '" + key + "' must be a string");
  return unicode::nfc(it->get<std::string>());
}

std::string required_string(const json& obj, const char* key, const std::filesystem::path& path,
                            std::size_t line_no) {
  auto value = optional_string(obj, key, path, line_no);
  if (!value) fail(ErrorKind::Validation, where(path, line_no) + "missing required field '" + key + "'");
  return *value;
}

void require_non_empty(const std::string& value, const char* field, const std::filesystem::path& path,
                       std::size_t line_no) {
  if (unicode::split_whitespace(value).empty()) {
    fail(ErrorKind::Validation, where(path, line_no) + "invariant violated: " + field + " must be non-empty");
  }
}

void warn_if_empty(std::size_t count, const std::filesystem::path& path) {
  if (count == 0) spdlog::warn("{} contains no entries", path.string());
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', begin);
    cols.push_back(line.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return cols;
}

ParallelExample validated(ParallelExample ex, const std::filesystem::path& path, std::size_t line_no) {
  require_non_empty(ex.source_text, "source_text", path, line_no);
  require_non_empty(ex.target_text, "target_text", path, line_no);
  require_non_empty(ex.source_lang, "source_lang", path, line_no);
  require_non_empty(ex.target_lang, "target_lang", path, line_no);
  return ex;
}

}  // namespace

std::vector<DictionaryEntry> load_dictionary(const std::filesystem::path& path, std::size_t max_phrase_len) {
  std::vector<DictionaryEntry> entries;
  const std::size_t lines = for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    const json obj = parse_object(line, path, line_no);
    DictionaryEntry entry;
    entry.headword = required_string(obj, "headword", path, line_no);
    const std::string normalized = normalize_keyword(entry.headword);
    if (normalized.empty()) {
      fail(ErrorKind::Validation,
           where(path, line_no) + "invariant violated: headword must be non-empty after normalization");
    }
    const std::size_t words = unicode::split_whitespace(normalized).size();
    if (words > max_phrase_len) {
      fail(ErrorKind::Validation, where(path, line_no) + "invariant violated: headword has " +
                                      std::to_string(words) + " words, max_phrase_len is " +
                                      std::to_string(max_phrase_len));
    }
    entry.target = required_string(obj, "target", path, line_no);
    require_non_empty(entry.target, "target", path, line_no);
    entry.definition = optional_string(obj, "definition", path, line_no);
    entry.part_of_speech = optional_string(obj, "part_of_speech", path, line_no);
    if (auto it = obj.find("examples"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) fail(ErrorKind::Format, where(path, line_no) + "field 'examples' must be an array");
      for (const json& pair : *it) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          fail(ErrorKind::Format, where(path, line_no) + "each example must be a [source, target] string pair");
        }
        entry.examples.emplace_back(unicode::nfc(pair[0].get<std::string>()),
                                    unicode::nfc(pair[1].get<std::string>()));
      }
    }
    entries.push_back(std::move(entry));
  });
  warn_if_empty(lines, path);
  return entries;
}

std::vector<ParallelExample> load_parallel(const std::filesystem::path& path, ParallelFormat format) {
  std::vector<ParallelExample> examples;
  const std::size_t lines = for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    ParallelExample ex;
    if (format == ParallelFormat::Tsv) {
      const auto cols = split_tabs(line);
      if (cols.size() != 4 && cols.size() != 5) {
        fail(ErrorKind::Format, where(path, line_no) + "expected 5 tab-separated columns, found " +
                                    std::to_string(cols.size()));
      }
      ex.source_text = unicode::nfc(cols[0]);
      ex.target_text = unicode::nfc(cols[1]);
      ex.source_lang = unicode::nfc(cols[2]);
      ex.target_lang = unicode::nfc(cols[3]);
      if (cols.size() == 5) ex.provenance = unicode::nfc(cols[4]);
    } else {
      const json obj = parse_object(line, path, line_no);
      ex.source_text = required_string(obj, "source_text", path, line_no);
      ex.target_text = required_string(obj, "target_text", path, line_no);
      ex.source_lang = required_string(obj, "source_lang", path, line_no);
      ex.target_lang = required_string(obj, "target_lang", path, line_no);
      ex.provenance = optional_string(obj, "provenance", path, line_no).value_or("");
    }
    examples.push_back(validated(std::move(ex), path, line_no));
  });
  warn_if_empty(lines, path);
  return examples;
}

ParallelFormat parallel_format_for(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? ParallelFormat::Tsv : ParallelFormat::Jsonl;
}

std::string render_document_text(DocumentKind kind, const std::string& source_text, const std::string& target_text,
                                 const std::map<std::string, std::string>& metadata) {
  if (kind == DocumentKind::Example) {
    return source_text + std::string(kImplies) + target_text;
  }
  std::string out = source_text;
  if (!target_text.empty()) out += std::string(kDash) + target_text;
  if (auto it = metadata.find("definition"); it != metadata.end() && !it->second.empty()) {
    out += std::string(kDash) + it->second;
  }
  return out;
}

std::vector<Document> to_documents(std::span<const DictionaryEntry> entries,
                                   std::span<const ParallelExample> examples) {
  if (entries.empty() && examples.empty()) fail(ErrorKind::Usage, "no dictionary entries or parallel examples");

  std::vector<Document> docs;
  docs.reserve(entries.size() + examples.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const DictionaryEntry& e = entries[i];
    std::map<std::string, std::string> meta;
    if (e.definition) meta["definition"] = *e.definition;
    if (e.part_of_speech) meta["part_of_speech"] = *e.part_of_speech;
    if (!e.examples.empty()) meta["examples"] = json(e.examples).dump();
    std::string render = render_document_text(DocumentKind::Dictionary, e.headword, e.target, meta);
    docs.push_back(Document{DocId(DocumentKind::Dictionary, i), DocumentKind::Dictionary, e.headword, e.target,
                            std::move(render), std::move(meta)});
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const ParallelExample& x = examples[i];
    std::map<std::string, std::string> meta{
        {"source_lang", x.source_lang}, {"target_lang", x.target_lang}, {"provenance", x.provenance}};
    std::string render = render_document_text(DocumentKind::Example, x.source_text, x.target_text, meta);
    docs.push_back(Document{DocId(DocumentKind::Example, i), DocumentKind::Example, x.source_text, x.target_text,
                            std::move(render), std::move(meta)});
  }
  return docs;
}

void write_documents(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  for (const Document& d : docs) {
    json obj{{"id", d.id.str()},
             {"kind", to_string(d.kind)},
             {"source_text", d.source_text},
             {"target_text", d.target_text},
             {"render_text", d.render_text},
             {"metadata", d.metadata}};
    out << obj.dump() << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<Document> read_documents(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<DocId> seen;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    const json obj = parse_object(line, path, line_no);
    try {
      auto id = DocId::parse(obj.at("id").get<std::string>());
      if (!id) fail(ErrorKind::Format, where(path, line_no) + "malformed document id");
      auto kind = parse_document_kind(obj.at("kind").get<std::string>());
      if (!kind || *kind != id->kind()) fail(ErrorKind::Format, where(path, line_no) + "kind does not match id");
      if (!seen.insert(*id).second) fail(ErrorKind::Format, where(path, line_no) + "duplicate id " + id->str());
      Document d{*id,
                 *kind,
                 obj.at("source_text").get<std::string>(),
                 obj.at("target_text").get<std::string>(),
                 obj.at("render_text").get<std::string>(),
                 obj.value("metadata", std::map<std::string, std::string>{})};
      if (d.render_text != render_document_text(d.kind, d.source_text, d.target_text, d.metadata)) {
        fail(ErrorKind::Format, where(path, line_no) + "render_text does not match document fields");
      }
      docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      fail(ErrorKind::Format, where(path, line_no) + e.what());
    }
  });
  return docs;
}

DocumentStore::DocumentStore(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!by_id_.emplace(docs_[i].id, i).second) {
      fail(ErrorKind::Validation, "duplicate document id " + docs_[i].id.str());
    }
  }
}

const Document* DocumentStore::find(const DocId& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& DocumentStore::at(const DocId& id) const {
  const Document* d = find(id);
  if (d == nullptr) fail(ErrorKind::Validation, "unknown document id " + id.str());
  return *d;
}

}  // namespace lexrag
