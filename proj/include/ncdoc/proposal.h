// proposal.h
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
// Per-sentence candidate translations. A Lattice holds, for every source
// sentence of one document, a deduplicated candidate set sorted by
// descending proposal log-probability.
//
// n-best records are JSON objects, one per line:
//   {"doc_id": "d1", "sent_index": 0, "tokens": "a b", "logprob": -1.5,
//    "expert_id": "e0"}
// expert_id is optional and defaults to "e0".

#ifndef NCDOC_PROPOSAL_H_
#define NCDOC_PROPOSAL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncdoc/corpus.h"

namespace ncdoc {

struct Candidate {
  Sentence tokens;
  double proposal_logprob = 0.0;
  std::string expert_id = "e0";
};

using CandidateSet = std::vector<Candidate>;

struct Lattice {
  std::string doc_id;
  Document source;
  std::vector<CandidateSet> slots;
};

// Throws DataError unless every slot is non-empty, duplicate-free, finite,
// and there is one slot per source sentence.
void validate_lattice(const Lattice& lattice);

// Removes repeated token sequences, keeping the highest log-probability
// (ties: lowest expert_id, then earliest), and sorts by descending
// log-probability (ties: lowest expert_id, then input order).
CandidateSet normalize_slot(CandidateSet slot);

std::optional<std::size_t> find_candidate(const CandidateSet& slot,
                                          const Sentence& tokens);

// Keeps the first k candidates of every slot.
Lattice truncate_lattice(Lattice lattice, std::size_t k);

// One lattice per source document, in source order.
std::vector<Lattice> read_nbest(std::istream& in,
                                const std::vector<Document>& source_docs);
std::vector<Lattice> load_nbest(const std::string& path,
                                const std::vector<Document>& source_docs);
void write_nbest(std::ostream& out, const std::vector<Lattice>& lattices);
void save_nbest(const std::string& path, const std::vector<Lattice>& lattices);

// Source token -> weighted target translations (probabilities, not logs).
struct Dictionary {
  std::map<Token, std::vector<std::pair<Token, double>>> entries;
};

struct ToyProposalOptions {
  std::size_t k = 50;
  std::uint64_t seed = 0;
  // Standard deviation of Gaussian noise added to every dictionary
  // log-probability; zero reproduces the dictionary exactly.
  double noise = 0.0;
  std::string expert_id = "e0";
};

// K-best token-by-token translations of each sentence under the dictionary.
// Tokens without an entry are copied through with probability one.
Lattice toy_propose(const Document& source, const Dictionary& dictionary,
                    const ToyProposalOptions& options);

// Log-probability of a same-length token-by-token translation under the
// dictionary; absent pairs contribute log(floor).
double dictionary_logprob(const Dictionary& dictionary, const Sentence& source,
                          const Sentence& target, double floor = 1e-6);

// Union of several experts' pools for one document, truncated to k by taking
// each expert's best remaining candidate in turn (experts in id order).
Lattice merge_expert_pools(const std::vector<Lattice>& lattices, std::size_t k);

using ReferenceScorer =
    std::function<double(const Sentence& source, const Sentence& reference)>;

// Ensures each slot contains the reference sentence (expert "ref"). A missing
// reference replaces the worst candidate once the slot holds k entries.
Lattice inject_references(const Lattice& lattice, const Document& references,
                          const ReferenceScorer& scorer, std::size_t k);

}  // namespace ncdoc

#endif  // NCDOC_PROPOSAL_H_
