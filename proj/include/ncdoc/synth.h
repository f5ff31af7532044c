// synth.h
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
//
// Synthetic parallel documents with planted cross-sentence dependencies.
//
// Every document carries one phenomenon (number, tense, lexical choice or a
// dropped pronoun) in one of two modes. Target sentences have the shape
//
//   [marker] head content... tail
//
// where head and tail are realized in the document's mode. Sentences with a
// marker ("many", "yesterday", ...) are unambiguous on their own; sentences
// without one have a source side that is identical in both modes, so the
// correct head can only be inferred from earlier sentences. The tail of the
// previous sentence sits right before the head across the sentence boundary,
// which lets a document n-gram model of order >= 3 carry the mode forward.
//
// Documents come in mirrored pairs (same content, opposite mode), so the
// target side is symmetric under swapping modes.

#ifndef NCDOC_SYNTH_H_
#define NCDOC_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncdoc/corpus.h"
#include "ncdoc/eval.h"
#include "ncdoc/proposal.h"

namespace ncdoc {

struct PhenomenonMix {
  double number = 0.25;
  double tense = 0.25;
  double lexical = 0.25;
  double pronoun = 0.25;
};

struct SynthConfig {
  std::size_t num_docs = 100;
  std::size_t sentences_per_doc = 5;
  std::size_t content_vocab = 40;          // plain content words
  std::size_t lemmas_per_phenomenon = 3;   // distinct ambiguous heads
  std::size_t min_content = 2;             // content words per sentence
  std::size_t max_content = 4;
  PhenomenonMix mix;
  // Expected fraction of all sentences that are ambiguous. The first
  // sentence always carries a marker, and no ambiguous sentence is more than
  // four sentences past the last marker.
  double ambiguity_rate = 0.5;
  std::uint64_t seed = 1;
};

// Throws DataError on invalid fractions or counts.
void validate_config(const SynthConfig& config);

struct SynthCorpus {
  ParallelDocumentCorpus corpus;
  std::vector<Annotation> annotations;  // one per ambiguous head
};

SynthCorpus generate_corpus(const SynthConfig& config);

// The other mode's realization of a mode-bearing target token.
std::optional<std::string> opposite_form(const std::string& target_token);

// Candidates for one document: the reference sentence, its mode-flipped
// variant for annotated sentences (proposal scores within 1e-6 of the
// reference, the higher one chosen at random), and single-word distractors
// up to k.
Lattice make_ambiguous_lattice(const DocumentPair& pair,
                               const std::vector<Annotation>& annotations,
                               std::size_t k, std::uint64_t seed);

struct ToyDictionaryOptions {
  // Probability of the correct translation of a content word; the remainder
  // is split over `confusions` neighbouring words.
  double content_correct = 0.5;
  std::size_t confusions = 2;
};

// Token translation table for the toy proposal model: content words with
// confusable alternatives, ambiguous heads and tails split evenly over both
// modes, markers translated deterministically.
Dictionary toy_dictionary(const SynthConfig& config,
                          const ToyDictionaryOptions& options = {});

}  // namespace ncdoc

#endif  // NCDOC_SYNTH_H_
