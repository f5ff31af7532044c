// tuning.h
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
// Joint grid search over the interpolation weights on a development set.

#ifndef NCDOC_TUNING_H_
#define NCDOC_TUNING_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ncdoc/channel.h"
#include "ncdoc/corpus.h"
#include "ncdoc/decoder.h"
#include "ncdoc/eval.h"
#include "ncdoc/lm.h"
#include "ncdoc/proposal.h"

namespace ncdoc {

struct GridSpec {
  std::vector<double> lambda1_values{0.8, 1.0, 1.5, 2.0, 2.2, 2.5, 3.0};
  std::vector<double> lambda2_values{0.8, 1.0, 1.5, 2.0, 2.2, 2.5, 3.0};
  std::vector<double> lambda3_values{0.2, 0.5, 0.8, 1.0};
  double lambda_lm = 1.0;

  std::size_t size() const {
    return lambda1_values.size() * lambda2_values.size() * lambda3_values.size();
  }
};

// Higher is better. Receives decoded documents and their references.
using DevMetric = std::function<double(const std::vector<Document>& hyps,
                                       const std::vector<Document>& refs)>;

// Corpus BLEU with the given options.
DevMetric bleu_metric(const BleuOptions& options = {});

struct GridRow {
  Weights weights;
  double metric = 0.0;
};

struct TuningResult {
  Weights best;
  double metric = 0.0;
  std::vector<GridRow> table;  // lambda1 outer, lambda2 middle, lambda3 inner
};

struct TuningOptions {
  std::size_t beam = 5;
  unsigned threads = 1;
  DevMetric metric = bleu_metric();
};

// Decodes the dev set at every grid point and returns the best point; ties
// go to the earliest point in table order. Lattices are matched to dev
// documents by doc_id.
TuningResult grid_search(const ParallelDocumentCorpus& dev,
                         const std::vector<Lattice>& lattices,
                         const LanguageModel& lm, const ChannelModel& channel,
                         const GridSpec& grid, const TuningOptions& options = {});

// Tab-separated: lambda1, lambda2, lambda3, bleu (header line first).
void write_grid_table(std::ostream& out, const TuningResult& result);

}  // namespace ncdoc

#endif  // NCDOC_TUNING_H_
