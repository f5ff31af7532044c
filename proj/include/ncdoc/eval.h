// eval.h
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
// Translation metrics. BLEU follows the multi-bleu.perl conventions:
// tokenized input, clipped n-gram precision up to order 4, corpus-level
// brevity penalty against the closest reference length (shorter wins ties),
// and a score of zero whenever some precision is zero.

#ifndef NCDOC_EVAL_H_
#define NCDOC_EVAL_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncdoc/corpus.h"
#include "ncdoc/proposal.h"

namespace ncdoc {

constexpr int kBleuOrder = 4;

struct BleuOptions {
  bool lowercase = false;
  // Add-one smoothing of the n > 1 precisions, for very short segments.
  bool smooth = false;
};

struct BleuReport {
  double bleu = 0.0;  // 0..100
  std::array<double, kBleuOrder> precisions{};
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

// refs[r] is the r-th reference set, aligned document by document and
// sentence by sentence with hyps.
BleuReport corpus_bleu(const std::vector<Document>& hyps,
                       const std::vector<std::vector<Document>>& refs,
                       const BleuOptions& options = {});

BleuReport sentence_bleu(const Sentence& hyp, const std::vector<Sentence>& refs,
                         const BleuOptions& options = {});

// bleu recomputed from the stored precisions and brevity penalty.
double recompute_bleu(const BleuReport& report);

std::string bleu_report_record(const BleuReport& report);

// Mean BLEU over ordered pairs (i, j), i != j, with pool[j] as the single
// reference for pool[i]. Lower means more diverse. Needs >= 2 entries.
double pairwise_bleu(const std::vector<Sentence>& pool,
                     const BleuOptions& options = {});
double pairwise_bleu(const CandidateSet& pool, const BleuOptions& options = {});
// Each pool member is a whole translated corpus, compared with corpus BLEU.
double pairwise_bleu(const std::vector<std::vector<Document>>& systems,
                     const BleuOptions& options = {});

// Mean pairwise BLEU over every slot holding at least two candidates.
double lattice_pairwise_bleu(const std::vector<Lattice>& lattices,
                             const BleuOptions& options = {});

// Fraction of slots whose chosen candidate equals the reference sentence.
// Every slot must contain its reference.
double oracle_pick_ratio(const std::vector<Lattice>& lattices,
                         const std::vector<Document>& references,
                         const std::vector<std::vector<std::size_t>>& choices);

struct Annotation {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::size_t token_index = 0;
  std::string consistent_form;
  std::string inconsistent_form;

  bool operator==(const Annotation&) const = default;
};

// Fraction of annotated positions realized with the consistent form; 1 when
// there are no annotations.
double consistency_accuracy(const std::vector<Document>& outputs,
                            const std::vector<Annotation>& annotations);

std::vector<Annotation> read_annotations(std::istream& in);
std::vector<Annotation> load_annotations(const std::string& path);
void write_annotations(std::ostream& out, const std::vector<Annotation>& annotations);

}  // namespace ncdoc

#endif  // NCDOC_EVAL_H_
