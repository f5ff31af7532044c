// channel.h
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
// Channel models p(source sentence | target sentence), scored independently
// per sentence pair, and an IBM Model 1 implementation trained with EM.

#ifndef NCDOC_CHANNEL_H_
#define NCDOC_CHANNEL_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ncdoc/corpus.h"

namespace ncdoc {

class ChannelModel {
 public:
  virtual ~ChannelModel() = default;

  // log p(source | target), natural log. Throws DataError on empty input.
  virtual double logprob(const Sentence& source,
                         const Sentence& target) const = 0;
};

struct ChannelLoadReport {
  // Target words whose distributions did not sum to one and were rescaled.
  std::vector<std::string> renormalized;
};

class IBM1Model final : public ChannelModel {
 public:
  static constexpr std::string_view kNull = "<NULL>";
  static constexpr double kFloor = 1e-10;

  // EM in the channel direction: target words (plus NULL) generate source
  // words. Uniform initialization over co-occurring word pairs.
  static IBM1Model train(const ParallelSentenceCorpus& corpus, int iterations);

  static IBM1Model load(const std::string& path,
                        ChannelLoadReport* report = nullptr);
  static IBM1Model read(std::istream& in, ChannelLoadReport* report = nullptr);
  void save(const std::string& path) const;
  void write(std::ostream& out) const;

  // sum_m log( 1/(N+1) * sum_{n=0..N} t(x_m | y_n) ), y_0 = NULL; a source
  // word with no translation mass gets kFloor in place of the inner sum.
  double logprob(const Sentence& source, const Sentence& target) const override;

  // t(source | target); 0 when the pair has no entry. Pass kNull for NULL.
  double translation_prob(std::string_view source,
                          std::string_view target) const;

  // Corpus log-likelihood of the initial parameters followed by one value
  // per EM iteration (iterations + 1 entries). Empty for loaded models.
  const std::vector<double>& log_likelihood() const { return log_likelihood_; }

  // Every target word with a distribution, NULL included.
  std::vector<std::string> target_vocabulary() const;
  std::vector<std::pair<std::string, double>> distribution(
      std::string_view target) const;

 private:
  using Row = std::unordered_map<int, double>;  // source id -> prob

  int source_id(std::string_view word) const;
  int target_id(std::string_view word) const;
  int intern_source(const std::string& word);
  int intern_target(const std::string& word);

  std::vector<std::string> source_words_;
  std::vector<std::string> target_words_;  // id 0 is NULL
  std::unordered_map<std::string, int> source_ids_;
  std::unordered_map<std::string, int> target_ids_;
  std::vector<Row> table_;  // indexed by target id
  std::vector<double> log_likelihood_;
};

}  // namespace ncdoc

#endif  // NCDOC_CHANNEL_H_
