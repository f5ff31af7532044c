// tuning.cc
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

#include "ncdoc/tuning.h"

#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "ncdoc/error.h"
#include "ncdoc/parallel.h"

namespace ncdoc {

DevMetric bleu_metric(const BleuOptions& options) {
  return [options](const std::vector<Document>& hyps,
                   const std::vector<Document>& refs) {
    return corpus_bleu(hyps, {refs}, options).bleu;
  };
}

TuningResult grid_search(const ParallelDocumentCorpus& dev,
                         const std::vector<Lattice>& lattices,
                         const LanguageModel& lm, const ChannelModel& channel,
                         const GridSpec& grid, const TuningOptions& options) {
  if (grid.lambda1_values.empty() || grid.lambda2_values.empty() ||
      grid.lambda3_values.empty()) {
    throw DataError("grid_search: empty grid");
  }
  if (!options.metric) throw DataError("grid_search: no metric");

  std::unordered_map<std::string, const Lattice*> by_id;
  for (const Lattice& l : lattices) by_id.emplace(l.doc_id, &l);
  std::vector<const Lattice*> ordered;
  std::vector<Document> refs;
  for (const DocumentPair& pair : dev.docs) {
    auto it = by_id.find(pair.source.id);
    if (it == by_id.end()) {
      throw DataError("grid_search: no lattice for dev document '" +
                      pair.source.id + "'");
    }
    ordered.push_back(it->second);
    refs.push_back(pair.target);
  }

  TuningResult result;
  for (double l1 : grid.lambda1_values) {
    for (double l2 : grid.lambda2_values) {
      for (double l3 : grid.lambda3_values) {
        result.table.push_back({Weights{l1, l2, l3, grid.lambda_lm}, 0.0});
      }
    }
  }

  parallel_for(result.table.size(), options.threads, [&](std::size_t g) {
    std::vector<Document> hyps;
    hyps.reserve(ordered.size());
    for (const Lattice* l : ordered) {
      Document out = doc_decode(*l, lm, channel, result.table[g].weights,
                                options.beam).output;
      out.id = l->doc_id;
      hyps.push_back(std::move(out));
    }
    result.table[g].metric = options.metric(hyps, refs);
  });

  std::size_t best = 0;
  for (std::size_t g = 1; g < result.table.size(); ++g) {
    if (result.table[g].metric > result.table[best].metric) best = g;
  }
  result.best = result.table[best].weights;
  result.metric = result.table[best].metric;
  return result;
}

void write_grid_table(std::ostream& out, const TuningResult& result) {
  out << "lambda1\tlambda2\tlambda3\tbleu\n";
  char buf[160];
  for (const GridRow& row : result.table) {
    std::snprintf(buf, sizeof(buf), "%g\t%g\t%g\t%.6f\n", row.weights.lambda1,
                  row.weights.lambda2, row.weights.lambda3, row.metric);
    out << buf;
  }
}

}  // namespace ncdoc
