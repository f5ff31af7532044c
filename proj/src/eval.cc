// eval.cc
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

#include "ncdoc/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "ncdoc/error.h"

namespace ncdoc {
namespace {

using NGramCounts = std::map<std::vector<std::string>, std::size_t>;

Sentence lower(const Sentence& s) {
  Sentence out = s;
  for (Token& t : out) {
    for (char& c : t) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return out;
}

NGramCounts count_ngrams(const Sentence& s, int n) {
  NGramCounts counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  }
  return counts;
}

struct BleuStats {
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  void add(const Sentence& hyp_in, const std::vector<Sentence>& refs_in,
           const BleuOptions& options) {
    Sentence hyp = options.lowercase ? lower(hyp_in) : hyp_in;
    std::vector<Sentence> refs;
    for (const Sentence& r : refs_in) refs.push_back(options.lowercase ? lower(r) : r);

    hyp_len += hyp.size();
    std::size_t closest_len = 0;
    std::size_t closest_diff = 0;
    bool first = true;
    for (const Sentence& r : refs) {
      std::size_t diff = r.size() > hyp.size() ? r.size() - hyp.size()
                                               : hyp.size() - r.size();
      if (first || diff < closest_diff ||
          (diff == closest_diff && r.size() < closest_len)) {
        closest_diff = diff;
        closest_len = r.size();
        first = false;
      }
    }
    ref_len += closest_len;

    for (int n = 1; n <= kBleuOrder; ++n) {
      NGramCounts hyp_counts = count_ngrams(hyp, n);
      NGramCounts max_ref;
      for (const Sentence& r : refs) {
        for (const auto& [gram, c] : count_ngrams(r, n)) {
          std::size_t& m = max_ref[gram];
          m = std::max(m, c);
        }
      }
      for (const auto& [gram, c] : hyp_counts) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) matches[n - 1] += std::min(c, it->second);
      }
      if (hyp.size() >= static_cast<std::size_t>(n)) {
        totals[n - 1] += hyp.size() - n + 1;
      }
    }
  }

  BleuReport report(const BleuOptions& options) const {
    BleuReport r;
    r.matches = matches;
    r.totals = totals;
    r.hypothesis_length = hyp_len;
    r.reference_length = ref_len;
    for (int n = 0; n < kBleuOrder; ++n) {
      if (options.smooth && n > 0) {
        r.precisions[n] = (matches[n] + 1.0) / (totals[n] + 1.0);
      } else {
        r.precisions[n] =
            totals[n] > 0 ? static_cast<double>(matches[n]) / totals[n] : 0.0;
      }
    }
    if (hyp_len == 0) {
      r.brevity_penalty = 0.0;
    } else if (hyp_len < ref_len) {
      r.brevity_penalty = std::exp(1.0 - static_cast<double>(ref_len) / hyp_len);
    } else {
      r.brevity_penalty = 1.0;
    }
    r.bleu = recompute_bleu(r);
    return r;
  }
};

}  // namespace

double recompute_bleu(const BleuReport& report) {
  double log_sum = 0.0;
  for (double p : report.precisions) {
    if (!(p > 0.0)) return 0.0;
    log_sum += std::log(p);
  }
  return 100.0 * report.brevity_penalty * std::exp(log_sum / kBleuOrder);
}

BleuReport corpus_bleu(const std::vector<Document>& hyps,
                       const std::vector<std::vector<Document>>& refs,
                       const BleuOptions& options) {
  if (refs.empty()) throw DataError("corpus_bleu: no reference sets");
  for (const auto& set : refs) {
    if (set.size() != hyps.size()) {
      throw DataError("corpus_bleu: reference set has " + std::to_string(set.size()) +
                      " documents, hypotheses have " + std::to_string(hyps.size()));
    }
    for (std::size_t d = 0; d < hyps.size(); ++d) {
      if (set[d].sentences.size() != hyps[d].sentences.size()) {
        throw DataError("corpus_bleu: sentence-count mismatch in document '" +
                        hyps[d].id + "'");
      }
    }
  }
  BleuStats stats;
  std::vector<Sentence> sentence_refs;
  for (std::size_t d = 0; d < hyps.size(); ++d) {
    for (std::size_t i = 0; i < hyps[d].sentences.size(); ++i) {
      sentence_refs.clear();
      for (const auto& set : refs) sentence_refs.push_back(set[d].sentences[i]);
      stats.add(hyps[d].sentences[i], sentence_refs, options);
    }
  }
  return stats.report(options);
}

BleuReport sentence_bleu(const Sentence& hyp, const std::vector<Sentence>& refs,
                         const BleuOptions& options) {
  if (refs.empty()) throw DataError("sentence_bleu: no references");
  BleuStats stats;
  stats.add(hyp, refs, options);
  return stats.report(options);
}

std::string bleu_report_record(const BleuReport& report) {
  nlohmann::ordered_json j;
  j["bleu"] = report.bleu;
  j["precisions"] = report.precisions;
  j["matches"] = report.matches;
  j["totals"] = report.totals;
  j["brevity_penalty"] = report.brevity_penalty;
  j["hypothesis_length"] = report.hypothesis_length;
  j["reference_length"] = report.reference_length;
  return j.dump();
}

double pairwise_bleu(const std::vector<Sentence>& pool, const BleuOptions& options) {
  if (pool.size() < 2) throw DataError("pairwise_bleu: pool needs >= 2 entries");
  double sum = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (i != j) sum += sentence_bleu(pool[i], {pool[j]}, options).bleu;
    }
  }
  return sum / static_cast<double>(pool.size() * (pool.size() - 1));
}

double pairwise_bleu(const CandidateSet& pool, const BleuOptions& options) {
  std::vector<Sentence> sentences;
  for (const Candidate& c : pool) sentences.push_back(c.tokens);
  return pairwise_bleu(sentences, options);
}

double pairwise_bleu(const std::vector<std::vector<Document>>& systems,
                     const BleuOptions& options) {
  if (systems.size() < 2) throw DataError("pairwise_bleu: pool needs >= 2 entries");
  double sum = 0.0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    for (std::size_t j = 0; j < systems.size(); ++j) {
      if (i != j) sum += corpus_bleu(systems[i], {systems[j]}, options).bleu;
    }
  }
  return sum / static_cast<double>(systems.size() * (systems.size() - 1));
}

double lattice_pairwise_bleu(const std::vector<Lattice>& lattices,
                             const BleuOptions& options) {
  double sum = 0.0;
  std::size_t slots = 0;
  for (const Lattice& l : lattices) {
    for (const CandidateSet& slot : l.slots) {
      if (slot.size() < 2) continue;
      sum += pairwise_bleu(slot, options);
      ++slots;
    }
  }
  if (slots == 0) throw DataError("lattice_pairwise_bleu: no slot with >= 2 candidates");
  return sum / static_cast<double>(slots);
}

double oracle_pick_ratio(const std::vector<Lattice>& lattices,
                         const std::vector<Document>& references,
                         const std::vector<std::vector<std::size_t>>& choices) {
  if (lattices.size() != references.size() || lattices.size() != choices.size()) {
    throw DataError("oracle_pick_ratio: lattices, references and choices disagree");
  }
  std::size_t slots = 0, hits = 0;
  for (std::size_t d = 0; d < lattices.size(); ++d) {
    const Lattice& l = lattices[d];
    if (references[d].sentences.size() != l.slots.size() ||
        choices[d].size() != l.slots.size()) {
      throw DataError("oracle_pick_ratio: document '" + l.doc_id + "' is misaligned");
    }
    for (std::size_t i = 0; i < l.slots.size(); ++i) {
      if (!find_candidate(l.slots[i], references[d].sentences[i])) {
        throw DataError("oracle_pick_ratio: slot " + std::to_string(i) + " of '" +
                        l.doc_id + "' holds no reference candidate");
      }
      if (choices[d][i] >= l.slots[i].size()) {
        throw DataError("oracle_pick_ratio: choice out of range");
      }
      ++slots;
      if (l.slots[i][choices[d][i]].tokens == references[d].sentences[i]) ++hits;
    }
  }
  if (slots == 0) throw DataError("oracle_pick_ratio: no slots");
  return static_cast<double>(hits) / static_cast<double>(slots);
}

double consistency_accuracy(const std::vector<Document>& outputs,
                            const std::vector<Annotation>& annotations) {
  if (annotations.empty()) return 1.0;
  std::unordered_map<std::string, const Document*> by_id;
  for (const Document& d : outputs) by_id.emplace(d.id, &d);
  std::size_t good = 0;
  for (const Annotation& a : annotations) {
    auto it = by_id.find(a.doc_id);
    if (it == by_id.end()) {
      throw DataError("consistency_accuracy: no output for document '" + a.doc_id + "'");
    }
    const Document& doc = *it->second;
    if (a.sent_index >= doc.sentences.size() ||
        a.token_index >= doc.sentences[a.sent_index].size()) {
      throw DataError("consistency_accuracy: annotation position " +
                      std::to_string(a.sent_index) + ":" +
                      std::to_string(a.token_index) + " missing in '" +
                      a.doc_id + "'");
    }
    if (doc.sentences[a.sent_index][a.token_index] == a.consistent_form) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(annotations.size());
}

std::vector<Annotation> read_annotations(std::istream& in) {
  std::vector<Annotation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      Annotation a;
      a.doc_id = j.at("doc_id").get<std::string>();
      a.sent_index = j.at("sent_index").get<std::size_t>();
      a.token_index = j.at("token_index").get<std::size_t>();
      a.consistent_form = j.at("consistent_form").get<std::string>();
      a.inconsistent_form = j.at("inconsistent_form").get<std::string>();
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("annotation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Annotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations '" + path + "'");
  return read_annotations(in);
}

void write_annotations(std::ostream& out, const std::vector<Annotation>& annotations) {
  for (const Annotation& a : annotations) {
    nlohmann::ordered_json j;
    j["doc_id"] = a.doc_id;
    j["sent_index"] = a.sent_index;
    j["token_index"] = a.token_index;
    j["consistent_form"] = a.consistent_form;
    j["inconsistent_form"] = a.inconsistent_form;
    out << j.dump() << '\n';
  }
}

}  // namespace ncdoc
