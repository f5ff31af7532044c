// kn_oracle.h
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
// Direct recursive interpolated Kneser-Ney, written independently of the
// ARPA backoff tables, used to check the trained models.

#ifndef NCDOC_TESTS_KN_ORACLE_H_
#define NCDOC_TESTS_KN_ORACLE_H_

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ncdoc/corpus.h"

namespace ncdoc::testing {

class KnOracle {
 public:
  using Gram = std::vector<std::string>;

  KnOracle(const std::vector<Document>& docs, int order, double discount,
           bool reset, double floor = 1e-10)
      : order_(order), d_(discount), reset_(reset), floor_(floor) {
    std::vector<Gram> streams;
    std::map<std::string, int> freq;
    for (const Document& doc : docs) {
      Gram cur{"<s>"};
      for (const Sentence& s : doc.sentences) {
        for (const Token& t : s) {
          cur.push_back(t);
          ++freq[t];
          vocab_.insert(t);
        }
        cur.push_back("</s>");
        if (reset) {
          streams.push_back(cur);
          cur = {"<s>"};
        }
      }
      cur.push_back("<stop>");
      streams.push_back(cur);
    }
    vocab_.insert("</s>");
    vocab_.insert("<stop>");
    vocab_.insert("<unk>");
    std::map<Gram, std::set<std::string>> lefts;
    for (const Gram& s : streams) {
      for (std::size_t end = 1; end < s.size(); ++end) {
        for (int n = 1; n <= order && static_cast<int>(end) + 1 >= n; ++n) {
          Gram g(s.begin() + (end + 1 - n), s.begin() + end + 1);
          if (n == order || g.front() == "<s>") {
            count_[g] += 1;
          } else {
            lefts[g].insert(s[end - n]);
          }
        }
      }
    }
    for (const auto& [g, l] : lefts) count_[g] = static_cast<double>(l.size());
    for (const auto& [w, c] : freq) {
      if (c == 1) count_[{"<unk>"}] += 1;
    }
  }

  const std::set<std::string>& vocabulary() const { return vocab_; }

  // Probability before the floor mix.
  double raw(Gram context, const std::string& word) const {
    const std::string w = vocab_.count(word) ? word : "<unk>";
    while (static_cast<int>(context.size()) > order_ - 1) context.erase(context.begin());
    return interp(context, w);
  }

  double prob(const Gram& context, const std::string& word) const {
    const double v = static_cast<double>(vocab_.size());
    return (1.0 - v * floor_) * raw(context, word) + floor_;
  }

  // Natural-log score of a document, mirroring the decoder's event order.
  double document_logprob(const Document& doc) const {
    Gram ctx{"<s>"};
    double total = 0.0;
    auto emit = [&](const std::string& w) {
      total += std::log(prob(ctx, w));
      ctx.push_back(w);
      if (reset_ && w == "</s>") ctx = {"<s>"};
    };
    for (const Sentence& s : doc.sentences) {
      for (const Token& t : s) emit(vocab_.count(t) ? t : "<unk>");
      emit("</s>");
    }
    emit("<stop>");
    return total;
  }

 private:
  double interp(const Gram& h, const std::string& w) const {
    const int n = static_cast<int>(h.size()) + 1;
    double total = 0.0, types = 0.0, a = 0.0;
    for (const auto& [g, c] : count_) {
      if (static_cast<int>(g.size()) != n) continue;
      if (!std::equal(h.begin(), h.end(), g.begin())) continue;
      total += c;
      types += 1;
      if (g.back() == w) a = c;
    }
    if (n == 1) {
      return (a > 0 ? (a - d_) / total : 0.0) +
             d_ * types / total / static_cast<double>(vocab_.size());
    }
    const Gram shorter(h.begin() + 1, h.end());
    const double lower = interp(shorter, w);
    if (total == 0.0) return lower;
    return (a > 0 ? (a - d_) / total : 0.0) + d_ * types / total * lower;
  }

  int order_;
  double d_;
  bool reset_;
  double floor_;
  std::set<std::string> vocab_;
  std::map<Gram, double> count_;
};

}  // namespace ncdoc::testing

#endif  // NCDOC_TESTS_KN_ORACLE_H_
