// synth_test.cc
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
#include <set>

#include "doctest.h"
#include "ncdoc/decoder.h"
#include "ncdoc/error.h"
#include "ncdoc/eval.h"
#include "ncdoc/lm.h"
#include "ncdoc/synth.h"
#include "test_util.h"

namespace ncdoc {
namespace {

// Flips every two-form token of one sentence.
Document flip_sentence(Document doc, std::size_t index) {
  for (Token& t : doc.sentences[index]) {
    if (auto other = opposite_form(t)) t = *other;
  }
  return doc;
}

TEST_CASE("synth: deterministic under the seed") {
  SynthConfig cfg;
  cfg.num_docs = 10;
  SynthCorpus a = generate_corpus(cfg), b = generate_corpus(cfg);
  CHECK(targets(a.corpus) == targets(b.corpus));
  CHECK(sources(a.corpus) == sources(b.corpus));
  CHECK(a.annotations == b.annotations);
  cfg.seed = 2;
  CHECK_FALSE(targets(generate_corpus(cfg).corpus) == targets(a.corpus));
}

TEST_CASE("synth: invalid configurations") {
  SynthConfig cfg;
  cfg.mix = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(generate_corpus(cfg), DataError);
  cfg = SynthConfig{};
  cfg.num_docs = 0;
  CHECK_THROWS_AS(generate_corpus(cfg), DataError);
  cfg = SynthConfig{};
  cfg.ambiguity_rate = 1.5;
  CHECK_THROWS_AS(generate_corpus(cfg), DataError);
}

TEST_CASE("synth: annotation count under the default seed") {
  SynthConfig cfg;
  SynthCorpus s = generate_corpus(cfg);
  CHECK(s.corpus.docs.size() == 100);
  // Mirrored pairs share their plan: 50 x 4 draws at 0.625, doubled.
  CHECK(s.annotations.size() == 222);
}

TEST_CASE("synth: annotations point at the head of an ambiguous sentence") {
  SynthConfig cfg;
  cfg.num_docs = 30;
  SynthCorpus s = generate_corpus(cfg);
  std::map<std::string, const Document*> tgt;
  for (const auto& p : s.corpus.docs) tgt[p.target.id] = &p.target;
  for (const Annotation& a : s.annotations) {
    const Document& d = *tgt.at(a.doc_id);
    CHECK(a.sent_index >= 1);
    CHECK(d.sentences[a.sent_index][a.token_index] == a.consistent_form);
    CHECK(opposite_form(a.consistent_form) == a.inconsistent_form);
  }
}

TEST_CASE("synth: ambiguity rate zero leaves nothing to resolve") {
  SynthConfig cfg;
  cfg.num_docs = 10;
  cfg.ambiguity_rate = 0.0;
  SynthCorpus s = generate_corpus(cfg);
  CHECK(s.annotations.empty());
  NGramOptions o;
  o.order = 3;
  NGramLM lm = NGramLM::train(targets(s.corpus), o);
  testing::TableChannel ch;
  std::vector<Lattice> ls;
  for (const auto& p : s.corpus.docs) ls.push_back(make_ambiguous_lattice(p, s.annotations, 5, 1));
  auto doc = decode_corpus(ls, lm, ch, Weights{}, DecodeMode::kDocument, 5, 1);
  auto sent = decode_corpus(ls, lm, ch, Weights{}, DecodeMode::kSentence, 5, 1);
  CHECK(consistency_accuracy(outputs(doc), s.annotations) == 1.0);
  CHECK(consistency_accuracy(outputs(sent), s.annotations) == 1.0);
}

TEST_CASE("synth: ambiguous lattices") {
  SynthConfig cfg;
  cfg.num_docs = 20;
  SynthCorpus s = generate_corpus(cfg);
  CHECK_THROWS_AS(make_ambiguous_lattice(s.corpus.docs[0], s.annotations, 1, 1), DataError);
  std::size_t annotated_slots = 0;
  for (const auto& pair : s.corpus.docs) {
    Lattice l = make_ambiguous_lattice(pair, s.annotations, 6, 4);
    Lattice again = make_ambiguous_lattice(pair, s.annotations, 6, 4);
    std::set<std::size_t> ambiguous;
    for (const Annotation& a : s.annotations) {
      if (a.doc_id == pair.target.id) ambiguous.insert(a.sent_index);
    }
    for (std::size_t i = 0; i < l.slots.size(); ++i) {
      const CandidateSet& slot = l.slots[i];
      CHECK(slot.size() == 6);
      CHECK(slot.size() == again.slots[i].size());
      auto ref = find_candidate(slot, pair.target.sentences[i]);
      REQUIRE(ref);
      if (ambiguous.count(i)) {
        ++annotated_slots;
        auto flipped = find_candidate(slot, flip_sentence(pair.target, i).sentences[i]);
        REQUIRE(flipped);
        CHECK(std::abs(slot[*ref].proposal_logprob - slot[*flipped].proposal_logprob) < 1e-6);
      } else {
        CHECK(*ref == 0);
        for (std::size_t j = 1; j < slot.size(); ++j) {
          CHECK(slot[j].proposal_logprob < slot[0].proposal_logprob);
        }
      }
    }
  }
  CHECK(annotated_slots > 0);
}

TEST_CASE("synth: document context separates the variants") {
  SynthConfig cfg;
  cfg.num_docs = 40;
  SynthCorpus s = generate_corpus(cfg);
  auto tgt = targets(s.corpus);
  std::map<std::string, const Document*> by_id;
  for (const Document& d : tgt) by_id[d.id] = &d;
  NGramOptions o;
  o.order = 3;
  NGramLM doc_lm = NGramLM::train(tgt, o);
  o.sentence_reset = true;
  NGramLM sent_lm = NGramLM::train(tgt, o);
  for (const Annotation& a : s.annotations) {
    const Document& good = *by_id.at(a.doc_id);
    Document bad = flip_sentence(good, a.sent_index);
    CHECK(document_logprob(doc_lm, good) > document_logprob(doc_lm, bad));
    const double g = sent_lm.score_sentence(sent_lm.initial_state(), good.sentences[a.sent_index]).logprob;
    const double b = sent_lm.score_sentence(sent_lm.initial_state(), bad.sentences[a.sent_index]).logprob;
    CHECK(std::abs(g - b) < 1e-9);
  }
}

TEST_CASE("synth: toy dictionary covers the source vocabulary") {
  SynthConfig cfg;
  cfg.num_docs = 10;
  SynthCorpus s = generate_corpus(cfg);
  Dictionary dict = toy_dictionary(cfg);
  for (const Document& d : sources(s.corpus)) {
    for (const Sentence& x : d.sentences) {
      for (const Token& t : x) {
        REQUIRE(dict.entries.count(t));
        double sum = 0;
        for (const auto& [w, p] : dict.entries.at(t)) sum += p;
        CHECK(sum == doctest::Approx(1.0));
      }
    }
  }
}

}  // namespace
}  // namespace ncdoc
