#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lexrag/cli.hpp"
#include "test_support.hpp"

using namespace lexrag;
using lexrag::testing::data_dir;
using lexrag::testing::read_file;
using lexrag::testing::TempDir;
using lexrag::testing::write_file;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string e2e(const std::string& name) { return (data_dir() / "e2e" / name).string(); }

std::string mock_config() { return e2e("mock_config.json"); }

/// Builds the e2e index into `dir` and returns its path.
std::string build_index(const TempDir& dir) {
  const std::string out = (dir / "index").string();
  const auto r = run({"index", "build", "--dict", e2e("dictionary.jsonl"), "--out", out, "--config", mock_config()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return out;
}

std::vector<nlohmann::json> jsonl(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(ErrorKind::Io) == 1);
  CHECK(cli::exit_code_for(ErrorKind::Format) == 1);
  CHECK(cli::exit_code_for(ErrorKind::Backend) == 2);
  CHECK(cli::exit_code_for(ErrorKind::Usage) == 64);
  CHECK(cli::exit_code_for(ErrorKind::Validation) == 65);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 64);
  CHECK(run({"frobnicate"}).code == 64);
  CHECK(run({"index", "build", "--out", "x"}).code == 64);
  CHECK(run({"index", "build", "--dict", e2e("dictionary.jsonl")}).code == 64);
  CHECK(run({"evaluate", "--hyp", "a"}).code == 64);
  CHECK(run({"translate", "--index", "x"}).code == 64);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("index build writes a directory and reuses the cache") {
  TempDir dir;
  write_file(dir / "d.jsonl", "{\"headword\":\"water\",\"target\":\"ᎠᎹ\"}\n{\"headword\":\"sun\",\"target\":\"ᏅᏓ\"}\n");
  const std::string out = (dir / "idx").string();
  const auto first = run({"index", "build", "--dict", (dir / "d.jsonl").string(), "--out", out, "--config",
                          mock_config()});
  REQUIRE(first.code == 0);
  CHECK(first.out.find("documents: 2\n") != std::string::npos);
  CHECK(first.out.find("cache hits: 0\n") != std::string::npos);
  const auto manifest = nlohmann::json::parse(read_file(dir / "idx" / "manifest.json"));
  CHECK(manifest["count"] == 2);
  CHECK(manifest["dim"] == 32);
  const std::string vectors = read_file(dir / "idx" / "vectors.bin");

  const auto second = run({"index", "build", "--dict", (dir / "d.jsonl").string(), "--out", out, "--config",
                           mock_config()});
  REQUIRE(second.code == 0);
  CHECK(second.out.find("cache hits: 2\n") != std::string::npos);
  CHECK(second.out.find("embedded: 0\n") != std::string::npos);
  CHECK(read_file(dir / "idx" / "vectors.bin") == vectors);
}

TEST_CASE("index build ingestion errors exit 1 and leave nothing behind") {
  TempDir dir;
  write_file(dir / "d.jsonl", "{\"headword\":\"\"}\n");
  const auto r = run({"index", "build", "--dict", (dir / "d.jsonl").string(), "--out", (dir / "idx").string(),
                      "--config", mock_config()});
  CHECK(r.code == 1);
  CHECK(r.err.find(":1:") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "idx"));
  CHECK(run({"index", "build", "--dict", (dir / "missing.jsonl").string(), "--out", (dir / "idx").string(),
             "--config", mock_config()})
            .code == 1);
}

TEST_CASE("index build backend failure exits 2 and removes the output") {
  TempDir dir;
  write_file(dir / "c.json",
             R"({"backend": {"base_url": "http://127.0.0.1:1/v1", "timeout_s": 1,
                 "retry": {"max_attempts": 1, "initial_backoff_ms": 0, "multiplier": 1}}})");
  const auto r = run({"index", "build", "--dict", e2e("dictionary.jsonl"), "--out", (dir / "idx").string(),
                      "--config", (dir / "c.json").string()});
  CHECK(r.code == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "idx"));
}

TEST_CASE("translate single sentence") {
  TempDir dir;
  const std::string index = build_index(dir);
  const auto r = run({"translate", "--index", index, "--text", "water", "--config", mock_config()});
  CHECK(r.code == 0);
  CHECK(r.out == "ᎠᎹ\n");
}

TEST_CASE("translate batch writes records in order") {
  TempDir dir;
  const std::string index = build_index(dir);
  write_file(dir / "in.txt", "The dog drinks water.\nThe sun shines.\nA fish swims.\n");
  const auto r = run({"translate", "--index", index, "--input", (dir / "in.txt").string(), "--output",
                      (dir / "out.jsonl").string(), "--config", mock_config()});
  REQUIRE(r.code == 0);
  const auto records = jsonl(read_file(dir / "out.jsonl"));
  REQUIRE(records.size() == 3);
  CHECK(records[0]["id"] == "1");
  CHECK(records[0]["output"] == "ᎩᏟ ᎠᎹ");
  CHECK(records[1]["output"] == "ᏅᏓ");
  CHECK(records[2]["output"] == "ᎠᏣᏗ");
  CHECK_FALSE(records[0].contains("prompt"));

  const auto traced = run({"translate", "--index", index, "--input", (dir / "in.txt").string(), "--trace",
                           "--config", mock_config()});
  REQUIRE(traced.code == 0);
  CHECK(jsonl(traced.out)[0].contains("prompt"));
}

TEST_CASE("translate against a broken index exits 1") {
  TempDir dir;
  const std::string index = build_index(dir);
  std::string bytes = read_file(dir / "index" / "vectors.bin");
  bytes[0] = 'X';
  write_file(dir / "index" / "vectors.bin", bytes);
  const auto r = run({"translate", "--index", index, "--text", "water", "--config", mock_config()});
  CHECK(r.code == 1);
  CHECK(r.err.find("magic") != std::string::npos);

  CHECK(run({"translate", "--index", (dir / "absent").string(), "--text", "x", "--config", mock_config()}).code ==
        1);
}

TEST_CASE("translate with an unknown config key exits 1") {
  TempDir dir;
  write_file(dir / "c.json", R"({"retreival": {}})");
  CHECK(run({"translate", "--index", "x", "--text", "water", "--config", (dir / "c.json").string()}).code == 1);
}

TEST_CASE("evaluate identical files") {
  TempDir dir;
  write_file(dir / "a.txt", "ᎩᏟ ᎠᎹ\nᏅᏓ\n");
  const auto r = run({"evaluate", "--hyp", (dir / "a.txt").string(), "--ref", (dir / "a.txt").string(), "--format",
                      "json", "--config", mock_config()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["bleu"] == 1.0);
  CHECK(j["rouge_l_f"] == 1.0);
  CHECK(j["bert_f1"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["n_sentences"] == 2);
}

TEST_CASE("evaluate the fixture against the oracle values") {
  const auto fixture = data_dir() / "metrics_fixture";
  const auto r = run({"evaluate", "--hyp", (fixture / "hyp.txt").string(), "--ref", (fixture / "ref.txt").string(),
                      "--metrics", "bleu,rouge", "--format", "json", "--language", "fixture", "--model", "oracle",
                      "--config", mock_config()});
  REQUIRE(r.code == 0);
  const auto got = nlohmann::json::parse(r.out);
  const auto expected = nlohmann::json::parse(read_file(fixture / "expected.json"));
  for (const char* key : {"bleu", "rouge_l_p", "rouge_l_r", "rouge_l_f"}) {
    CAPTURE(key);
    CHECK(std::abs(got[key].get<double>() - expected[key].get<double>()) < 1e-6);
  }
  CHECK(got["model"] == "oracle");
  CHECK_FALSE(got.contains("bert_f1"));
}

TEST_CASE("evaluate markdown output") {
  TempDir dir;
  write_file(dir / "a.txt", "a b c d e\n");
  write_file(dir / "b.txt", "a b c d f\n");
  const auto r = run({"evaluate", "--hyp", (dir / "a.txt").string(), "--ref", (dir / "b.txt").string(), "--metrics",
                      "bleu", "--format", "markdown", "--config", mock_config()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("| 0.669 | - |") != std::string::npos);
}

TEST_CASE("evaluate errors") {
  TempDir dir;
  write_file(dir / "a.txt", "one\ntwo\n");
  write_file(dir / "b.txt", "one\n");
  CHECK(run({"evaluate", "--hyp", (dir / "a.txt").string(), "--ref", (dir / "b.txt").string(), "--config",
             mock_config()})
            .code == 65);
  CHECK(run({"evaluate", "--hyp", (dir / "a.txt").string(), "--ref", (dir / "a.txt").string(), "--metrics", "chrf",
             "--config", mock_config()})
            .code == 64);
  CHECK(run({"evaluate", "--hyp", (dir / "none.txt").string(), "--ref", (dir / "a.txt").string(), "--config",
             mock_config()})
            .code == 1);
}

TEST_CASE("humaneval reproduces the Tibetan cells") {
  const auto r = run({"humaneval", "--scores", (data_dir() / "human_scores" / "tibetan.csv").string(), "--per-model",
                      "--config", mock_config()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "llama-3.1-405b\t0.067\ngpt-4o\t0.147\ngpt-4o+rag\t0.293\n");
}

TEST_CASE("humaneval single row and json output") {
  TempDir dir;
  write_file(dir / "s.csv", "sentence_id,model_id,fluency,grammaticality,faithfulness\n1,m,5,5,5\n");
  const auto text = run({"humaneval", "--scores", (dir / "s.csv").string(), "--config", mock_config()});
  CHECK(text.code == 0);
  CHECK(text.out == "1.000\n");

  const auto json_out = run({"humaneval", "--scores", (data_dir() / "human_scores" / "manchu.csv").string(),
                             "--per-model", "--format", "json", "--language", "Manchu", "--config", mock_config()});
  REQUIRE(json_out.code == 0);
  const auto rows = nlohmann::json::parse(json_out.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2]["model"] == "gpt-4o+rag");
  CHECK(rows[2]["language"] == "Manchu");
  CHECK(rows[2]["human_eval"].get<double>() == doctest::Approx(29.0 / 75).epsilon(1e-12));
}

TEST_CASE("humaneval rejects out-of-range scores") {
  TempDir dir;
  write_file(dir / "s.csv", "sentence_id,model_id,fluency,grammaticality,faithfulness\n1,m,7,0,0\n");
  const auto r = run({"humaneval", "--scores", (dir / "s.csv").string(), "--config", mock_config()});
  CHECK(r.code == 65);
  CHECK(r.err.find(":2:") != std::string::npos);
}

TEST_CASE("report merges files into the golden table") {
  const auto report_dir = data_dir() / "report";
  const auto r = run({"report", "--metrics", (report_dir / "machine.json").string(),
                      (report_dir / "human.json").string(), "--config", mock_config()});
  REQUIRE(r.code == 0);
  CHECK(r.out == read_file(data_dir() / "golden" / "report.md"));
}

TEST_CASE("report with two per-model files") {
  TempDir dir;
  write_file(dir / "a.json", R"({"language": "Cherokee", "model": "a", "bleu": 0.1})");
  write_file(dir / "b.json", R"({"language": "Cherokee", "model": "b", "bleu": 0.2})");
  const auto r = run({"report", "--metrics", (dir / "a.json").string(), (dir / "b.json").string(), "--config",
                      mock_config()});
  REQUIRE(r.code == 0);
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 4);
}

TEST_CASE("report rejects conflicting rows") {
  const auto report_dir = data_dir() / "report";
  const auto r = run({"report", "--metrics", (report_dir / "machine.json").string(),
                      (report_dir / "conflict.json").string(), "--config", mock_config()});
  CHECK(r.code == 65);
  CHECK(run({"report", "--metrics", (report_dir / "absent.json").string(), "--config", mock_config()}).code == 1);
}
