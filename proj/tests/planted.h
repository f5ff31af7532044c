// planted.h
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
// A tuning fixture whose references win every slot only at one grid point.
// The unit-weight LM anchors the scale; each distractor trades one weighted
// feature against an LM difference, bounding that weight from one side:
//
//   lambda1 in (1.25, 1.75), lambda2 in (1.75, 2.1), lambda3 in (0.35, 0.65)
//
// which on the default grid leaves only (1.5, 2.0, 0.5).

#ifndef NCDOC_TESTS_PLANTED_H_
#define NCDOC_TESTS_PLANTED_H_

#include <string>
#include <vector>

#include "ncdoc/corpus.h"
#include "ncdoc/decoder.h"
#include "ncdoc/proposal.h"
#include "test_util.h"

namespace ncdoc::testing {

struct PlantedFixture {
  ParallelDocumentCorpus dev;
  std::vector<Lattice> lattices;
  TableLM lm;
  TableChannel channel;
  Weights planted{1.5, 2.0, 0.5, 1.0};
};

inline PlantedFixture planted_fixture(std::size_t num_docs) {
  PlantedFixture f;
  auto words = [](const std::string& stem, int n) {
    Sentence s;
    for (int i = 0; i < n; ++i) s.push_back(stem + std::to_string(i));
    return s;
  };
  for (std::size_t d = 0; d < num_docs; ++d) {
    const std::string id = "p" + std::to_string(d);
    DocumentPair pair{{id, {}}, {id, {}}};
    Lattice lattice{id, {id, {}}, {}};
    for (int slot = 0; slot < 2; ++slot) {
      const std::string tag = id + "s" + std::to_string(slot);
      Sentence src = words(tag + "x", 4);
      Sentence ref = words(tag + "r", 4);
      pair.source.sentences.push_back(src);
      pair.target.sentences.push_back(ref);
      lattice.source.sentences.push_back(src);
      // name, length, proposal, channel, lm
      struct Row {
        const char* name;
        int length;
        double proposal, channel, lm;
      };
      const Row rows[] = {
          {"r", 4, 0.0, 0.0, 0.0},
          {"a", 4, -1.0, 0.0, 1.25},   // lambda1 > 1.25
          {"b", 4, 1.0, 0.0, -1.75},   // lambda1 < 1.75
          {"c", 4, 0.0, -1.0, 1.75},   // lambda2 > 1.75
          {"d", 4, 0.0, 1.0, -2.1},    // lambda2 < 2.1
          {"e", 3, 0.0, 0.0, 0.35},    // lambda3 > 0.35
          {"f", 5, 0.0, 0.0, -0.65},   // lambda3 < 0.65
      };
      CandidateSet cands;
      for (const Row& row : rows) {
        Sentence tokens = row.name == std::string("r") ? ref
                                                       : words(tag + row.name, row.length);
        const std::string key = join_tokens(tokens);
        f.lm.sentence[key] = row.lm;
        f.channel.target[key] = row.channel;
        cands.push_back({tokens, row.proposal, "e0"});
      }
      lattice.slots.push_back(normalize_slot(cands));
    }
    f.dev.docs.push_back(pair);
    f.lattices.push_back(lattice);
  }
  return f;
}

}  // namespace ncdoc::testing

#endif  // NCDOC_TESTS_PLANTED_H_
