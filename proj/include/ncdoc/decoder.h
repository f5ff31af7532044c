// decoder.h
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
// Document decoding over a lattice of per-sentence candidates. A partial
// document is scored left to right by the linear objective
//
//   O_i = O_{i-1} + lambda1 * log q(y_i | x) + lambda_lm * log p_LM(y_i | y_<i)
//                 + lambda2 * log p_TM(x_i | y_i) + lambda3 * |y_i|
//
// with O_0 = 0. After the last sentence the document-end LM event is added
// once, weighted by lambda_lm.

#ifndef NCDOC_DECODER_H_
#define NCDOC_DECODER_H_

#include <cstddef>
#include <string>
#include <vector>

#include "ncdoc/channel.h"
#include "ncdoc/corpus.h"
#include "ncdoc/lm.h"
#include "ncdoc/proposal.h"

namespace ncdoc {

struct Weights {
  double lambda1 = 1.0;    // proposal
  double lambda2 = 1.0;    // channel
  double lambda3 = 0.0;    // length (per token)
  double lambda_lm = 1.0;  // language model, including the stop event

  bool operator==(const Weights&) const = default;
};

// Parses "l1,l2,l3" or "l1,l2,l3,llm". Throws UsageError.
Weights parse_weights(const std::string& text);
std::string format_weights(const Weights& w);

struct ScoreBreakdown {
  double proposal = 0.0;
  double lm = 0.0;
  double channel = 0.0;
  int length = 0;
  double total = 0.0;
};

struct Hypothesis {
  std::vector<std::size_t> chosen;  // candidate index per decoded slot
  double cumulative = 0.0;
  LMState lm_state;
  std::vector<ScoreBreakdown> breakdowns;
};

struct BeamStats {
  std::size_t expansions = 0;
  std::size_t pruned = 0;
};

struct DecodeResult {
  std::string doc_id;
  Document output;
  std::vector<std::size_t> chosen;
  double cumulative = 0.0;
  double stop_logprob = 0.0;  // raw log p(<stop> | output); 0 if not applied
  bool stop_applied = false;
  double final_score = 0.0;   // cumulative + lambda_lm * stop_logprob
  std::vector<ScoreBreakdown> breakdowns;
  BeamStats stats;
};

struct Extension {
  ScoreBreakdown breakdown;
  LMState next;
};

Extension score_extension(const Weights& weights, const LanguageModel& lm,
                          const ChannelModel& channel, const Hypothesis& hyp,
                          const Sentence& slot_source, const Candidate& cand);

// Left-to-right beam search keeping the `beam` best prefixes per slot. In
// the last slot every expansion receives the stop event before selection.
// Ties go to the lexicographically smaller candidate-index vector.
DecodeResult doc_decode(const Lattice& lattice, const LanguageModel& lm,
                        const ChannelModel& channel, const Weights& weights,
                        std::size_t beam);

// Scores every path; throws DataError if there are more than max_paths.
DecodeResult exhaustive_decode(const Lattice& lattice, const LanguageModel& lm,
                               const ChannelModel& channel,
                               const Weights& weights,
                               std::size_t max_paths = 1000000);

// Independent per-slot argmax, each sentence scored from the LM's initial
// state; no stop event.
DecodeResult sent_rerank(const Lattice& lattice, const LanguageModel& sentence_lm,
                         const ChannelModel& channel, const Weights& weights);

enum class DecodeMode { kDocument, kSentence, kExhaustive };

// Decodes every lattice, `threads` documents at a time; output order
// follows the input.
std::vector<DecodeResult> decode_corpus(const std::vector<Lattice>& lattices,
                                        const LanguageModel& lm,
                                        const ChannelModel& channel,
                                        const Weights& weights, DecodeMode mode,
                                        std::size_t beam, unsigned threads);

std::vector<Document> outputs(const std::vector<DecodeResult>& results);

// One JSON object per document: doc_id, output, chosen, final_score,
// cumulative, stop_logprob, stop_weighted, breakdowns, stats.
std::string decode_result_record(const DecodeResult& result,
                                 const Weights& weights);

struct DependencyReport {
  std::size_t watch_slot = 1;
  std::size_t base_choice = 0;
  std::size_t variant_choice = 0;
  Sentence base_tokens;
  Sentence variant_tokens;
  bool changed = false;
};

// Decodes `base` and `variant`, which must agree on every slot except
// `vary_slot`, and reports whether the choice at `watch_slot` moved.
DependencyReport posterior_dependency_probe(
    const Lattice& base, const Lattice& variant, const LanguageModel& lm,
    const ChannelModel& channel, const Weights& weights, std::size_t beam,
    std::size_t vary_slot = 0, std::size_t watch_slot = 1);

}  // namespace ncdoc

#endif  // NCDOC_DECODER_H_
