// lm.h
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
// Document language models. A model scores a document left to right: each
// sentence is followed by a sentence-boundary event and the document by a
// single document-end event. All scores are natural-log probabilities.

#ifndef NCDOC_LM_H_
#define NCDOC_LM_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ncdoc/corpus.h"

namespace ncdoc {

using WordId = std::int32_t;

// Opaque document-prefix state. For n-gram models it holds the last
// order-1 word ids of the prefix, boundary markers included. Other models
// may use the ids however they like, as long as equal states score equally.
struct LMState {
  std::vector<WordId> context;

  bool operator==(const LMState&) const = default;
};

struct SentenceScore {
  double logprob = 0.0;
  LMState next;
};

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual LMState initial_state() const = 0;

  // log p(sentence </s> | prefix). Throws DataError on an empty sentence.
  virtual SentenceScore score_sentence(const LMState& state,
                                       const Sentence& sentence) const = 0;

  // log p(<stop> | prefix).
  virtual double stop_logprob(const LMState& state) const = 0;
};

// Full-document log-probability, including the document-end event.
double document_logprob(const LanguageModel& lm, const Document& doc);

struct PerplexityReport {
  double perplexity = 0.0;
  double logprob = 0.0;           // natural log, summed over all events
  std::size_t words = 0;
  std::size_t sentence_ends = 0;  // one </s> per sentence
  std::size_t document_ends = 0;  // one <stop> per document
  std::size_t events = 0;         // words + sentence_ends + document_ends
  std::string convention;
};

// exp(-logprob / events). Throws DataError on an empty evaluation set.
PerplexityReport perplexity_per_word(const LanguageModel& lm,
                                     const std::vector<Document>& docs);

struct NGramOptions {
  int order = 4;
  double discount = 0.75;
  // Resets the context to <s> after every </s>, giving a sentence-level
  // model whose scores ignore the preceding sentences.
  bool sentence_reset = false;
  double floor = 1e-10;
};

// Interpolated Kneser-Ney model with a single fixed discount. Parameters are
// held in ARPA backoff form (log10 probabilities and backoff weights), which
// represents the interpolated model exactly; a uniform floor is mixed in at
// query time so every event has strictly positive probability.
class NGramLM final : public LanguageModel {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kStop = "<stop>";
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr int kFormatVersion = 1;

  static NGramLM train(const std::vector<Document>& docs,
                       const NGramOptions& options);

  // Reads "<path>" (ARPA) and "<path>.header" (order, discount, markers).
  static NGramLM load(const std::string& path);
  static NGramLM read(std::istream& arpa, std::istream& header);
  void save(const std::string& path) const;
  void write_arpa(std::ostream& out) const;
  void write_header(std::ostream& out) const;

  LMState initial_state() const override;
  SentenceScore score_sentence(const LMState& state,
                               const Sentence& sentence) const override;
  double stop_logprob(const LMState& state) const override;

  // log p(token | state); unknown tokens are scored as <unk>.
  double token_logprob(const LMState& state, std::string_view token) const;
  LMState advance(const LMState& state, std::string_view token) const;

  // Every predictable token: training words, </s>, <stop> and <unk>.
  std::vector<Token> vocabulary() const;

  int order() const { return options_.order; }
  double discount() const { return options_.discount; }
  bool sentence_reset() const { return options_.sentence_reset; }
  double floor() const { return options_.floor; }
  std::size_t ngram_count(int n) const;

 private:
  struct Entry {
    double log10_prob = 0.0;
    double log10_bow = 0.0;
    bool has_bow = false;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<WordId>& key) const noexcept;
  };
  using Table = std::unordered_map<std::vector<WordId>, Entry, KeyHash>;

  NGramLM() = default;

  WordId intern(std::string_view word);
  WordId lookup(std::string_view word) const;
  double log10_backoff(const std::vector<WordId>& context, WordId word) const;
  double logprob_id(const LMState& state, WordId word) const;
  void push(LMState& state, WordId word) const;
  void finalize_vocabulary();

  NGramOptions options_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  WordId bos_ = -1, eos_ = -1, stop_ = -1, unk_ = -1;
  std::size_t vocab_size_ = 0;  // predictable events (excludes <s>)
  Table table_;                 // all orders, keyed by the full n-gram
};

}  // namespace ncdoc

#endif  // NCDOC_LM_H_
