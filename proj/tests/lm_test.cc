// lm_test.cc
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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kn_oracle.h"
#include "ncdoc/error.h"
#include "ncdoc/lm.h"

namespace ncdoc {
namespace {

using testing::KnOracle;

const std::vector<Document> kTiny{{"d", {{"a", "b"}, {"a", "b"}}}};

double floored(double p, double v) { return (1.0 - v * 1e-10) * p + 1e-10; }

NGramLM train(const std::vector<Document>& docs, int order, bool reset = false) {
  NGramOptions o;
  o.order = order;
  o.sentence_reset = reset;
  return NGramLM::train(docs, o);
}

// Uniform model over a closed vocabulary.
class UniformLM final : public LanguageModel {
 public:
  explicit UniformLM(double v) : lp_(-std::log(v)) {}
  LMState initial_state() const override { return {}; }
  SentenceScore score_sentence(const LMState& s, const Sentence& x) const override {
    return {lp_ * static_cast<double>(x.size() + 1), s};
  }
  double stop_logprob(const LMState&) const override { return lp_; }

 private:
  double lp_;
};

TEST_CASE("lm: unigram model is normalized") {
  NGramLM lm = train({{"d", {{"a"}}}}, 1);
  double sum = 0;
  for (const char* w : {"a", "</s>", "<stop>", "<unk>"}) {
    sum += std::exp(lm.token_logprob(lm.initial_state(), w));
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lm.vocabulary().size() == 4);
}

TEST_CASE("lm: order 0 is rejected") {
  CHECK_THROWS_AS(train(kTiny, 0), DataError);
}

TEST_CASE("lm: hand-derived Kneser-Ney values on the tiny corpus") {
  NGramLM lm = train(kTiny, 2);
  const double v = 5;
  LMState s = lm.initial_state();
  LMState after_a = lm.advance(s, "a");
  // Lowest order (continuation counts): a=0.37, b=</s>=<stop>=0.17, <unk>=0.12.
  const LMState empty;
  CHECK(std::exp(lm.token_logprob(empty, "a")) == doctest::Approx(floored(0.37, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(empty, "b")) == doctest::Approx(floored(0.17, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(empty, "</s>")) == doctest::Approx(floored(0.17, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(empty, "<stop>")) == doctest::Approx(floored(0.17, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(empty, "zzz")) == doctest::Approx(floored(0.12, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(after_a, "b")) == doctest::Approx(floored(0.68875, v)).epsilon(1e-12));
  CHECK(std::exp(lm.token_logprob(s, "a")) == doctest::Approx(floored(0.5275, v)).epsilon(1e-12));
  LMState after_b = lm.advance(after_a, "b");
  CHECK(std::exp(lm.token_logprob(after_b, "</s>")) == doctest::Approx(floored(0.68875, v)).epsilon(1e-12));
  LMState after_eos = lm.advance(after_b, "</s>");
  CHECK(std::exp(lm.stop_logprob(after_eos)) == doctest::Approx(floored(0.2525, v)).epsilon(1e-12));

  double best = -1e9;
  std::string arg;
  for (const Token& w : lm.vocabulary()) {
    double lp = lm.token_logprob(after_a, w);
    if (lp > best) best = lp, arg = w;
  }
  CHECK(arg == "b");

  const double expected = std::log(floored(0.5275, v)) + 2 * std::log(floored(0.68875, v));
  CHECK(lm.score_sentence(s, {"a", "b"}).logprob == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lm: matches the direct Kneser-Ney recursion") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> w(0, 6), len(1, 4), ns(1, 4);
  std::vector<Document> docs;
  for (int d = 0; d < 6; ++d) {
    Document doc{"d" + std::to_string(d), {}};
    for (int s = ns(rng); s > 0; --s) {
      Sentence x;
      for (int i = len(rng); i > 0; --i) x.push_back("w" + std::to_string(w(rng)));
      doc.sentences.push_back(x);
    }
    docs.push_back(doc);
  }
  for (int order = 1; order <= 4; ++order) {
    for (bool reset : {false, true}) {
      NGramLM lm = train(docs, order, reset);
      KnOracle oracle(docs, order, 0.75, reset);
      for (const Document& d : docs) {
        CHECK(document_logprob(lm, d) ==
              doctest::Approx(oracle.document_logprob(d)).epsilon(1e-10));
      }
      Document unseen{"u", {{"w1", "zz", "w2"}, {"w3"}}};
      CHECK(document_logprob(lm, unseen) ==
            doctest::Approx(oracle.document_logprob(unseen)).epsilon(1e-10));
    }
  }
}

TEST_CASE("lm: certainty gives logprob 0") {
  UniformLM certain(1.0);
  CHECK(certain.score_sentence({}, {"x", "y"}).logprob == 0.0);
  CHECK(certain.stop_logprob({}) == 0.0);
}

TEST_CASE("lm: unigram stop and sentence scores ignore the state") {
  NGramLM lm = train(kTiny, 1);
  LMState a = lm.initial_state();
  LMState b = lm.score_sentence(a, {"a", "b", "b"}).next;
  CHECK(lm.stop_logprob(a) == lm.stop_logprob(b));
  CHECK(lm.score_sentence(a, {"b", "a"}).logprob == lm.score_sentence(b, {"b", "a"}).logprob);
}

TEST_CASE("lm: sentence reset forgets previous sentences") {
  std::vector<Document> docs{{"d", {{"x", "y"}, {"y", "z"}, {"x", "z"}}}};
  NGramLM lm = train(docs, 3, true);
  LMState s0 = lm.initial_state();
  LMState s1 = lm.score_sentence(s0, {"x", "y"}).next;
  CHECK(s0 == s1);
}

TEST_CASE("lm: empty sentence is an error") {
  NGramLM lm = train(kTiny, 2);
  CHECK_THROWS_AS(lm.score_sentence(lm.initial_state(), {}), DataError);
}

TEST_CASE("perplexity: uniform model gives the vocabulary size") {
  UniformLM lm(7.0);
  auto r = perplexity_per_word(lm, {{"d", {{"a", "b"}, {"c"}}}});
  CHECK(r.perplexity == doctest::Approx(7.0));
  CHECK(r.events == 3 + 2 + 1);
}

TEST_CASE("perplexity: memorized training data beats the vocabulary size") {
  std::vector<Document> docs{{"d", {{"p", "q", "r"}, {"q", "r", "s"}, {"p", "s"}}}};
  NGramLM lm = train(docs, 4);
  auto r = perplexity_per_word(lm, docs);
  CHECK(r.perplexity < static_cast<double>(lm.vocabulary().size()));
}

TEST_CASE("lm: save-load-save is byte identical and scores match") {
  std::vector<Document> docs{{"d", {{"p", "q", "r"}, {"q", "r", "s"}}},
                             {"e", {{"s", "p"}}}};
  NGramLM lm = train(docs, 3);
  std::ostringstream arpa, header;
  lm.write_arpa(arpa);
  lm.write_header(header);
  std::istringstream ia(arpa.str()), ih(header.str());
  NGramLM back = NGramLM::read(ia, ih);
  std::ostringstream arpa2, header2;
  back.write_arpa(arpa2);
  back.write_header(header2);
  CHECK(arpa.str() == arpa2.str());
  CHECK(header.str() == header2.str());
  for (const Document& d : docs) {
    CHECK(std::abs(document_logprob(lm, d) - document_logprob(back, d)) < 1e-12);
  }
}

TEST_CASE("lm: truncated file is malformed") {
  NGramLM lm = train(kTiny, 2);
  std::ostringstream arpa, header;
  lm.write_arpa(arpa);
  lm.write_header(header);
  std::string text = arpa.str();
  std::istringstream ia(text.substr(0, text.size() / 2)), ih(header.str());
  CHECK_THROWS_AS(NGramLM::read(ia, ih), DataError);
}

TEST_CASE("lm: conditional distributions sum to one") {
  std::vector<Document> docs{{"d", {{"a", "b", "c"}, {"b", "c", "a", "a"}}},
                             {"e", {{"c", "b"}}}};
  for (int order = 1; order <= 4; ++order) {
    NGramLM lm = train(docs, order);
    std::mt19937_64 rng(order);
    auto vocab = lm.vocabulary();
    for (int trial = 0; trial < 20; ++trial) {
      LMState s = lm.initial_state();
      for (int i = 0; i < trial % 5; ++i) {
        s = lm.advance(s, vocab[rng() % vocab.size()]);
      }
      double sum = 0;
      for (const Token& w : vocab) sum += std::exp(lm.token_logprob(s, w));
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

}  // namespace
}  // namespace ncdoc
