#include <doctest.h>

#include <algorithm>

#include "lexrag/retrieval.hpp"
#include "test_support.hpp"

using namespace lexrag;
using lexrag::testing::dict_doc;
using lexrag::testing::example_doc;
using lexrag::testing::TableEmbedder;

namespace {

DocId d(std::uint64_t n) { return DocId(DocumentKind::Dictionary, n); }

IndexSet assemble(std::vector<Document> docs, VectorIndex vectors) {
  KeywordIndex keywords = build_keyword_index(docs);
  IndexManifest manifest = make_manifest(keywords, vectors);
  return IndexSet{DocumentStore(std::move(docs)), std::move(keywords), std::move(vectors), std::move(manifest)};
}

/// Three headwords laid out on the unit circle: d:1 (1,0), d:2 (0,1), d:3 diagonal.
IndexSet plane_index(const std::string& embedder_id) {
  VectorIndex vectors(2, embedder_id);
  const std::vector<float> a{1.0f, 0.0f}, b{0.0f, 1.0f}, c{0.70710678f, 0.70710678f};
  vectors.add(d(1), a);
  vectors.add(d(2), b);
  vectors.add(d(3), c);
  return assemble({dict_doc(1, "east", "e"), dict_doc(2, "north", "n"), dict_doc(3, "northeast", "ne")},
                  std::move(vectors));
}

RetrievalConfig config(std::size_t k_vector, std::size_t k_total, FallbackPolicy policy) {
  RetrievalConfig c;
  c.k_vector = k_vector;
  c.k_total = k_total;
  c.policy = policy;
  return c;
}

}  // namespace

TEST_CASE("extract_query_terms enumerates n-grams longest first") {
  CHECK(extract_query_terms("The cat sat", 2) ==
        std::vector<std::string>{"the cat", "cat sat", "the", "cat", "sat"});
  CHECK(extract_query_terms("Water.", 1) == std::vector<std::string>{"water"});
  CHECK(extract_query_terms("", 3).empty());
  CHECK(extract_query_terms("a b", 4) == std::vector<std::string>{"a b", "a", "b"});
  CHECK(extract_query_terms("the the", 1) == std::vector<std::string>{"the"});
}

TEST_CASE("keyword hit under strict fallback never embeds") {
  MockEmbedder embedder(8);
  const IndexSet index =
      lexrag::testing::make_index_set({dict_doc(0, "water", "ᎠᎹ"), dict_doc(1, "sun", "ᏅᏓ")}, embedder);
  MockEmbedder query_embedder(8);
  const auto results = retrieve("water is good", index, query_embedder, RetrievalConfig{});
  REQUIRE(results.size() == 1);
  CHECK(results[0].doc.id == d(0));
  CHECK(results[0].score == 1.0);
  CHECK(results[0].provenance == Provenance::Keyword);
  CHECK(results[0].matched_phrase == "water");
  CHECK(query_embedder.calls() == 0);
}

TEST_CASE("multi-word headwords match before their parts") {
  MockEmbedder embedder(8);
  const IndexSet index = lexrag::testing::make_index_set(
      {dict_doc(0, "lion", "x"), dict_doc(1, "mountain lion", "ᏢᏓᏥ"), dict_doc(2, "mountain", "y")}, embedder);
  const auto results = retrieve("A mountain lion sleeps", index, embedder, RetrievalConfig{});
  REQUIRE(results.size() == 3);
  CHECK(results[0].doc.id == d(1));
  CHECK(results[0].matched_phrase == "mountain lion");
  CHECK(results[1].doc.id == d(2));
  CHECK(results[2].doc.id == d(0));
}

TEST_CASE("config max_phrase_len limits phrase matching") {
  MockEmbedder embedder(8);
  const IndexSet index = lexrag::testing::make_index_set({dict_doc(0, "mountain lion", "ᏢᏓᏥ")}, embedder);
  auto c = config(2, 8, FallbackPolicy::StrictFallback);
  c.max_phrase_len = 1;
  const auto results = retrieve("mountain lion", index, embedder, c);
  REQUIRE(results.size() == 1);
  CHECK(results[0].provenance == Provenance::Vector);
}

TEST_CASE("no keyword hit falls back to cosine ranking") {
  const IndexSet index = plane_index(MockEmbedder(2).id());
  MockEmbedder embedder(2);
  const std::string query = "a sentence with no headword";
  const auto results = retrieve(query, index, embedder, config(2, 8, FallbackPolicy::StrictFallback));
  CHECK(embedder.calls() == 1);

  const Vector q = MockEmbedder::embed_one(query, 2);
  std::vector<std::pair<double, DocId>> oracle;
  for (std::size_t i = 0; i < index.vectors.count(); ++i) {
    oracle.emplace_back(-dot(index.vectors.row(i), q), index.vectors.ids()[i]);
  }
  std::sort(oracle.begin(), oracle.end());

  REQUIRE(results.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(results[i].doc.id == oracle[i].second);
    CHECK(results[i].score == doctest::Approx(-oracle[i].first).epsilon(1e-6));
    CHECK(results[i].provenance == Provenance::Vector);
    CHECK_FALSE(results[i].matched_phrase.has_value());
  }
}

TEST_CASE("fill policy merges without duplicates") {
  VectorIndex vectors(2, "table");
  const std::vector<float> e0{1.0f, 0.0f}, e1{0.0f, 1.0f}, e2{-1.0f, 0.0f}, e3{0.8f, 0.6f};
  vectors.add(d(0), e0);
  vectors.add(d(1), e1);
  vectors.add(d(2), e2);
  vectors.add(d(3), e3);
  const IndexSet index = assemble(
      {dict_doc(0, "water", "ᎠᎹ"), dict_doc(1, "sun", "ᏅᏓ"), dict_doc(2, "fire", "ᎠᏥᎳ"), dict_doc(3, "rain", "r")},
      std::move(vectors));
  TableEmbedder embedder({{"cold water", {1.0f, 0.0f}}});

  const auto top = index.vectors.topk(std::vector<float>{1.0f, 0.0f}, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].id == d(0));
  CHECK(top[1].id == d(3));

  const auto results = retrieve("cold water", index, embedder, config(2, 8, FallbackPolicy::Fill));
  REQUIRE(results.size() == 2);
  CHECK(results[0].doc.id == d(0));
  CHECK(results[0].provenance == Provenance::Keyword);
  CHECK(results[1].doc.id == d(3));
  CHECK(results[1].provenance == Provenance::Vector);
  CHECK(results[1].score == doctest::Approx(0.8));
  CHECK(embedder.calls() == 1);

  const auto strict = retrieve("cold water", index, embedder, config(2, 8, FallbackPolicy::StrictFallback));
  CHECK(strict.size() == 1);
  CHECK(embedder.calls() == 1);
}

TEST_CASE("k_total caps keyword hits and skips the fill") {
  MockEmbedder embedder(8);
  std::vector<Document> docs;
  for (std::uint64_t i = 0; i < 4; ++i) docs.push_back(example_doc(i, "water number " + std::to_string(i), "x"));
  const IndexSet index = lexrag::testing::make_index_set(docs, embedder);
  MockEmbedder query_embedder(8);
  const auto results = retrieve("water", index, query_embedder, config(1, 3, FallbackPolicy::Fill));
  REQUIRE(results.size() == 3);
  CHECK(results[0].doc.id == DocId(DocumentKind::Example, 0));
  CHECK(results[2].doc.id == DocId(DocumentKind::Example, 2));
  CHECK(query_embedder.calls() == 0);
}

TEST_CASE("blank query returns nothing") {
  MockEmbedder embedder(2);
  const IndexSet index = plane_index(embedder.id());
  CHECK(retrieve("   ", index, embedder, RetrievalConfig{}).empty());
  CHECK(embedder.calls() == 0);
}

TEST_CASE("embedder mismatch is rejected") {
  const IndexSet index = plane_index("some-other-model");
  MockEmbedder embedder(2);
  try {
    retrieve("nothing matches", index, embedder, RetrievalConfig{});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("empty vector index skips the vector phase") {
  const IndexSet index = assemble({dict_doc(0, "water", "ᎠᎹ")}, VectorIndex(0, "none"));
  MockEmbedder embedder(4);
  CHECK(retrieve("nothing", index, embedder, RetrievalConfig{}).empty());
  CHECK(embedder.calls() == 0);
}

TEST_CASE("retrieval config validation") {
  RetrievalConfig c;
  c.k_vector = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.k_vector = 9;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_phrase_len = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_fallback_policy("fill") == FallbackPolicy::Fill);
  CHECK_FALSE(parse_fallback_policy("FILL").has_value());
}
