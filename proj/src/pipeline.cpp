#include "lexrag/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <regex>
#include <set>
#include <thread>

#include "lexrag/error.hpp"
#include "lexrag/unicode.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

using Bindings = std::vector<std::pair<std::string_view, std::string_view>>;

const std::regex& placeholder_pattern() {
  static const std::regex re(R"(\{([A-Za-z_]+)\})");
  return re;
}

void check_placeholders(const std::string& field_name, const std::string& text,
                        const std::set<std::string>& allowed) {
  for (std::sregex_iterator it(text.begin(), text.end(), placeholder_pattern()), end; it != end; ++it) {
    const std::string name = (*it)[1].str();
    if (!allowed.contains(name)) {
      fail(ErrorKind::Format, "prompt template field '" + field_name + "' uses unknown placeholder {" + name + "}");
    }
  }
}

// Single left-to-right pass; substituted values are not re-expanded.
std::string expand(const std::string& text, const Bindings& bindings) {
  std::string out;
  std::size_t last = 0;
  for (std::sregex_iterator it(text.begin(), text.end(), placeholder_pattern()), end; it != end; ++it) {
    const auto& m = *it;
    out.append(text, last, static_cast<std::size_t>(m.position(0)) - last);
    const std::string name = m[1].str();
    auto b = std::find_if(bindings.begin(), bindings.end(), [&](const auto& kv) { return kv.first == name; });
    if (b != bindings.end()) {
      out.append(b->second);
    } else {
      out.append(m.str(0));
    }
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text, last, std::string::npos);
  return out;
}

// Newlines and carriage returns become spaces.
std::string single_line(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string between(const std::string& format, std::string_view first, std::string_view second,
                    const char* field) {
  const std::size_t a = format.find(first);
  const std::size_t b = format.find(second);
  if (a == std::string::npos || b == std::string::npos || b < a + first.size()) {
    fail(ErrorKind::Format, std::string("prompt template field '") + field + "' must contain " + std::string(first) +
                                " followed by " + std::string(second));
  }
  return format.substr(a + first.size(), b - a - first.size());
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void PromptTemplate::validate() const {
  const std::set<std::string> langs{"source_lang", "target_lang"};
  check_placeholders("preamble", preamble, langs);
  check_placeholders("glossary_header", glossary_header, langs);
  check_placeholders("example_header", example_header, langs);
  check_placeholders("directive", directive, langs);
  check_placeholders("glossary_line_format", glossary_line_format, {"headword", "target"});
  check_placeholders("example_line_format", example_line_format, {"source", "target"});
  if (glossary_separator().empty()) {
    fail(ErrorKind::Format, "glossary_line_format needs literal text between {headword} and {target}");
  }
  between(example_line_format, "{source}", "{target}", "example_line_format");
  for (const std::string* header : {&glossary_header, &example_header}) {
    if (header->empty() || header->find('\n') != std::string::npos) {
      fail(ErrorKind::Format, "prompt section headers must be single non-empty lines");
    }
  }
}

std::string PromptTemplate::glossary_separator() const {
  return between(glossary_line_format, "{headword}", "{target}", "glossary_line_format");
}

std::string PromptTemplate::render_glossary_header(const Languages& langs) const {
  return expand(glossary_header, {{"source_lang", langs.source}, {"target_lang", langs.target}});
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::Io, "cannot open prompt template " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, file.string() + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Format, file.string() + ": expected a JSON object");

  PromptTemplate t;
  const std::pair<const char*, std::string*> fields[] = {
      {"preamble", &t.preamble},
      {"glossary_header", &t.glossary_header},
      {"example_header", &t.example_header},
      {"glossary_line_format", &t.glossary_line_format},
      {"example_line_format", &t.example_line_format},
      {"directive", &t.directive},
  };
  for (const auto& [key, value] : j.items()) {
    auto f = std::find_if(std::begin(fields), std::end(fields), [&](const auto& kv) { return key == kv.first; });
    if (f == std::end(fields)) fail(ErrorKind::Format, file.string() + ": unknown template key '" + key + "'");
    if (!value.is_string()) fail(ErrorKind::Format, file.string() + ": template key '" + key + "' must be a string");
    *f->second = unicode::nfc(value.get<std::string>());
  }
  t.validate();
  return t;
}

std::string assemble_prompt(std::string_view query, std::span<const RetrievalResult> results,
                            const PromptTemplate& prompt_template, const Languages& langs) {
  const Bindings lang_bindings{{"source_lang", langs.source}, {"target_lang", langs.target}};

  std::vector<std::string> glossary;
  std::vector<std::string> examples;
  for (const RetrievalResult& r : results) {
    const std::string source = single_line(r.doc.source_text);
    const std::string target = single_line(r.doc.target_text);
    if (r.doc.kind == DocumentKind::Dictionary) {
      glossary.push_back(expand(prompt_template.glossary_line_format, {{"headword", source}, {"target", target}}));
    } else {
      examples.push_back(expand(prompt_template.example_line_format, {{"source", source}, {"target", target}}));
    }
  }

  std::string prompt = expand(prompt_template.preamble, lang_bindings);
  prompt += "\n\n";
  auto section = [&](const std::string& header, const std::vector<std::string>& lines) {
    if (lines.empty()) return;
    prompt += expand(header, lang_bindings);
    prompt += '\n';
    for (const std::string& line : lines) {
      prompt += line;
      prompt += '\n';
    }
    prompt += '\n';
  };
  section(prompt_template.glossary_header, glossary);
  section(prompt_template.example_header, examples);
  prompt += expand(prompt_template.directive, lang_bindings);
  prompt += '\n';
  prompt += query;
  prompt += '\n';
  return prompt;
}

json to_json(const TranslationRecord& record, bool include_prompt) {
  json results = json::array();
  for (const RetrievalResult& r : record.results) {
    json item{{"doc_id", r.doc.id.str()},
              {"kind", to_string(r.doc.kind)},
              {"score", r.score},
              {"provenance", to_string(r.provenance)}};
    if (r.matched_phrase) item["matched_phrase"] = *r.matched_phrase;
    results.push_back(std::move(item));
  }
  json j{{"id", record.id},
         {"query", record.query},
         {"results", std::move(results)},
         {"output", record.output},
         {"model_id", record.model_id}};
  if (record.prompt_tokens) j["prompt_tokens"] = *record.prompt_tokens;
  if (record.completion_tokens) j["completion_tokens"] = *record.completion_tokens;
  if (record.error) j["error"] = *record.error;
  if (include_prompt) j["prompt"] = record.prompt;
  j["timings"] = {{"retrieval_ms", record.retrieval_ms}, {"generation_ms", record.generation_ms}};
  return j;
}

void TranslationSettings::validate() const {
  retrieval.validate();
  prompt_template.validate();
}

TranslationRecord translate(std::string_view query, const IndexSet& index, Embedder& embedder, Generator& generator,
                            const TranslationSettings& settings) {
  TranslationRecord record;
  record.query = unicode::nfc(query);
  record.model_id = generator.model_id();

  auto started = std::chrono::steady_clock::now();
  record.results = retrieve(record.query, index, embedder, settings.retrieval);
  record.retrieval_ms = ms_since(started);

  record.prompt = assemble_prompt(record.query, record.results, settings.prompt_template, settings.langs);

  started = std::chrono::steady_clock::now();
  GenerationResult generated = generator.generate(record.prompt);
  record.generation_ms = ms_since(started);
  record.output = std::move(generated.text);
  if (!generated.model_id.empty()) record.model_id = std::move(generated.model_id);
  record.prompt_tokens = generated.prompt_tokens;
  record.completion_tokens = generated.completion_tokens;
  return record;
}

std::vector<TranslationRecord> batch_translate(std::span<const BatchItem> items, const IndexSet& index,
                                               Embedder& embedder, Generator& generator,
                                               const TranslationSettings& settings, std::size_t parallelism) {
  if (items.empty()) fail(ErrorKind::Usage, "batch has no items");
  settings.validate();

  std::vector<TranslationRecord> records(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      const BatchItem& item = items[i];
      try {
        records[i] = translate(item.source, index, embedder, generator, settings);
      } catch (const std::exception& e) {
        records[i] = TranslationRecord{};
        records[i].query = unicode::nfc(item.source);
        records[i].model_id = generator.model_id();
        records[i].error = e.what();
      }
      records[i].id = item.id;
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, items.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

std::vector<BatchItem> read_batch_input(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());
  const bool jsonl = file.extension() == ".jsonl";
  std::vector<BatchItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = file.string() + ":" + std::to_string(line_no) + ": ";
    if (!unicode::is_valid_utf8(line)) fail(ErrorKind::Format, where + "invalid UTF-8");
    if (unicode::split_whitespace(line).empty()) continue;
    if (!jsonl) {
      items.push_back({std::to_string(line_no), line});
      continue;
    }
    try {
      const json obj = json::parse(line);
      const json& id = obj.at("id");
      items.push_back({id.is_string() ? id.get<std::string>() : id.dump(), obj.at("source").get<std::string>()});
    } catch (const json::exception& e) {
      fail(ErrorKind::Format, where + e.what());
    }
  }
  return items;
}

}  // namespace lexrag
