// corpus_test.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include "doctest.h"
#include "ncdoc/corpus.h"
#include "ncdoc/error.h"

namespace ncdoc {
namespace {

std::vector<Document> parse(const std::string& text) {
  std::istringstream in(text);
  return read_document_corpus(in);
}

TEST_CASE("document corpus: empty input gives no documents") {
  CHECK(parse("").empty());
}

TEST_CASE("document corpus: blank line separates documents") {
  auto docs = parse("a b\n\nc");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].sentences == std::vector<Sentence>{{"a", "b"}});
  CHECK(docs[1].sentences == std::vector<Sentence>{{"c"}});
  CHECK(docs[0].id == "doc0");
  CHECK(docs[1].id == "doc1");
}

TEST_CASE("document corpus: consecutive blank lines are an empty document") {
  CHECK_THROWS_AS(parse("a\n\n\nb"), DataError);
}

TEST_CASE("document corpus: explicit ids round-trip") {
  auto docs = parse("# alpha\nx y\nz\n\n# beta\nq\n");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "alpha");
  CHECK(docs[1].id == "beta");
  std::ostringstream out;
  write_document_corpus(out, docs);
  CHECK(parse(out.str()) == docs);
}

TEST_CASE("document corpus: duplicate ids are rejected") {
  CHECK_THROWS_AS(parse("# a\nx\n\n# a\ny\n"), DataError);
}

TEST_CASE("parallel sentences: aligned lines pair up in order") {
  std::istringstream src("a\nb c\nd\n"), tgt("A\nB C\nD\n");
  auto corpus = read_parallel_sentences(src, tgt);
  REQUIRE(corpus.pairs.size() == 3);
  CHECK(corpus.pairs[1].source == Sentence{"b", "c"});
  CHECK(corpus.pairs[2].target == Sentence{"D"});
}

TEST_CASE("parallel sentences: line-count mismatch") {
  std::istringstream src("a\nb\nc\n"), tgt("A\nB\nC\nD\n");
  CHECK_THROWS_AS(read_parallel_sentences(src, tgt), DataError);
}

TEST_CASE("parallel sentences: empty source line") {
  std::istringstream src("a\n\nc\n"), tgt("A\nB\nC\n");
  CHECK_THROWS_AS(read_parallel_sentences(src, tgt), DataError);
}

TEST_CASE("zip documents") {
  Document s{"d", {{"a"}, {"b"}}}, t{"d", {{"A"}, {"B"}}};
  auto corpus = zip_parallel_documents({s}, {t});
  CHECK(corpus.docs.size() == 1);
  CHECK(flatten(corpus).pairs.size() == 2);
  CHECK(zip_parallel_documents({}, {}).docs.empty());
  Document t3{"d", {{"A"}, {"B"}, {"C"}}};
  CHECK_THROWS_AS(zip_parallel_documents({s}, {t3}), DataError);
}

TEST_CASE("token helpers") {
  CHECK(split_tokens("  a\tb  c ") == Sentence{"a", "b", "c"});
  CHECK(join_tokens({"a", "b"}) == "a b");
  CHECK(token_count(Document{"d", {{"a", "b"}, {"c"}}}) == 3);
}

}  // namespace
}  // namespace ncdoc
