// proposal.cc
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

#include "ncdoc/proposal.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "ncdoc/error.h"

namespace ncdoc {
namespace {

using ordered_json = nlohmann::ordered_json;

bool better_duplicate(const Candidate& a, const Candidate& b) {
  if (a.proposal_logprob != b.proposal_logprob) {
    return a.proposal_logprob > b.proposal_logprob;
  }
  return a.expert_id < b.expert_id;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  x ^= x >> 31;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 29;
  return x;
}

}  // namespace

void validate_lattice(const Lattice& lattice) {
  if (lattice.slots.size() != lattice.source.sentences.size()) {
    throw DataError("lattice '" + lattice.doc_id + "' has " +
                    std::to_string(lattice.slots.size()) + " slots for " +
                    std::to_string(lattice.source.sentences.size()) +
                    " source sentences");
  }
  for (std::size_t i = 0; i < lattice.slots.size(); ++i) {
    const CandidateSet& slot = lattice.slots[i];
    if (slot.empty()) {
      throw DataError("lattice '" + lattice.doc_id + "' slot " +
                      std::to_string(i) + " is empty");
    }
    std::set<Sentence> seen;
    for (const Candidate& c : slot) {
      if (c.tokens.empty()) {
        throw DataError("empty candidate in '" + lattice.doc_id + "'");
      }
      if (!std::isfinite(c.proposal_logprob)) {
        throw DataError("non-finite proposal logprob in '" + lattice.doc_id + "'");
      }
      if (!seen.insert(c.tokens).second) {
        throw DataError("duplicate candidate in '" + lattice.doc_id + "' slot " +
                        std::to_string(i));
      }
    }
  }
}

CandidateSet normalize_slot(CandidateSet slot) {
  CandidateSet unique;
  std::map<Sentence, std::size_t> index;
  for (Candidate& c : slot) {
    auto [it, inserted] = index.try_emplace(c.tokens, unique.size());
    if (inserted) {
      unique.push_back(std::move(c));
    } else if (better_duplicate(c, unique[it->second])) {
      unique[it->second] = std::move(c);
    }
  }
  std::stable_sort(unique.begin(), unique.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.proposal_logprob != b.proposal_logprob) {
                       return a.proposal_logprob > b.proposal_logprob;
                     }
                     return a.expert_id < b.expert_id;
                   });
  return unique;
}

std::optional<std::size_t> find_candidate(const CandidateSet& slot,
                                          const Sentence& tokens) {
  for (std::size_t i = 0; i < slot.size(); ++i) {
    if (slot[i].tokens == tokens) return i;
  }
  return std::nullopt;
}

Lattice truncate_lattice(Lattice lattice, std::size_t k) {
  for (CandidateSet& slot : lattice.slots) {
    if (slot.size() > k) slot.resize(k);
  }
  return lattice;
}

std::vector<Lattice> read_nbest(std::istream& in,
                                const std::vector<Document>& source_docs) {
  std::vector<Lattice> lattices;
  std::unordered_map<std::string, std::size_t> by_id;
  for (const Document& doc : source_docs) {
    by_id.emplace(doc.id, lattices.size());
    lattices.push_back({doc.id, doc, std::vector<CandidateSet>(doc.sentences.size())});
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "n-best line " + std::to_string(line_no);
    ordered_json record;
    try {
      record = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("doc_id") ||
        !record.contains("sent_index") || !record.contains("tokens") ||
        !record.contains("logprob")) {
      throw DataError(where + ": missing required field");
    }
    if (!record["doc_id"].is_string() || !record["tokens"].is_string() ||
        !record["sent_index"].is_number_integer() ||
        !record["logprob"].is_number()) {
      throw DataError(where + ": field has the wrong type");
    }
    auto doc = by_id.find(record["doc_id"].get<std::string>());
    if (doc == by_id.end()) {
      throw DataError(where + ": unknown doc_id '" +
                      record["doc_id"].get<std::string>() + "'");
    }
    Lattice& lattice = lattices[doc->second];
    const long long sent = record["sent_index"].get<long long>();
    if (sent < 0 || sent >= static_cast<long long>(lattice.slots.size())) {
      throw DataError(where + ": sent_index " + std::to_string(sent) +
                      " out of range for '" + lattice.doc_id + "'");
    }
    Candidate c;
    c.tokens = split_tokens(record["tokens"].get<std::string>());
    c.proposal_logprob = record["logprob"].get<double>();
    if (record.contains("expert_id")) {
      if (!record["expert_id"].is_string()) {
        throw DataError(where + ": expert_id must be a string");
      }
      c.expert_id = record["expert_id"].get<std::string>();
    }
    if (c.tokens.empty()) throw DataError(where + ": empty candidate");
    if (!std::isfinite(c.proposal_logprob)) {
      throw DataError(where + ": non-finite logprob");
    }
    lattice.slots[static_cast<std::size_t>(sent)].push_back(std::move(c));
  }

  for (Lattice& lattice : lattices) {
    for (CandidateSet& slot : lattice.slots) slot = normalize_slot(std::move(slot));
    validate_lattice(lattice);
  }
  return lattices;
}

std::vector<Lattice> load_nbest(const std::string& path,
                                const std::vector<Document>& source_docs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open n-best file '" + path + "'");
  try {
    return read_nbest(in, source_docs);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_nbest(std::ostream& out, const std::vector<Lattice>& lattices) {
  for (const Lattice& lattice : lattices) {
    for (std::size_t i = 0; i < lattice.slots.size(); ++i) {
      for (const Candidate& c : lattice.slots[i]) {
        ordered_json record;
        record["doc_id"] = lattice.doc_id;
        record["sent_index"] = i;
        record["tokens"] = join_tokens(c.tokens);
        record["logprob"] = c.proposal_logprob;
        record["expert_id"] = c.expert_id;
        out << record.dump() << '\n';
      }
    }
  }
}

void save_nbest(const std::string& path, const std::vector<Lattice>& lattices) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_nbest(out, lattices);
}

Lattice toy_propose(const Document& source, const Dictionary& dictionary,
                    const ToyProposalOptions& options) {
  if (options.k < 1) throw DataError("toy_propose: K must be >= 1");
  Lattice lattice{source.id, source, {}};

  struct Partial {
    double logprob;
    std::vector<std::size_t> choice;
  };
  auto ranks_before = [](const Partial& a, const Partial& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.choice < b.choice;
  };

  for (std::size_t si = 0; si < source.sentences.size(); ++si) {
    const Sentence& sentence = source.sentences[si];
    std::mt19937_64 rng(mix_seed(options.seed, si));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Options per position, best first.
    std::vector<std::vector<std::pair<Token, double>>> columns;
    for (const Token& tok : sentence) {
      std::vector<std::pair<Token, double>> column;
      auto it = dictionary.entries.find(tok);
      if (it == dictionary.entries.end() || it->second.empty()) {
        column.emplace_back(tok, 0.0);
      } else {
        for (const auto& [target, p] : it->second) {
          if (!(p > 0.0)) {
            throw DataError("toy_propose: non-positive dictionary probability for '" +
                            tok + "'");
          }
          double lp = std::log(p);
          if (options.noise > 0.0) lp += options.noise * gauss(rng);
          column.emplace_back(target, lp);
        }
      }
      std::stable_sort(column.begin(), column.end(), [](const auto& a, const auto& b) {
        return a.second > b.second;
      });
      columns.push_back(std::move(column));
    }

    std::vector<Partial> beam{{0.0, {}}};
    for (const auto& column : columns) {
      std::vector<Partial> next;
      next.reserve(beam.size() * column.size());
      for (const Partial& p : beam) {
        for (std::size_t j = 0; j < column.size(); ++j) {
          Partial q{p.logprob + column[j].second, p.choice};
          q.choice.push_back(j);
          next.push_back(std::move(q));
        }
      }
      std::sort(next.begin(), next.end(), ranks_before);
      if (next.size() > options.k) next.resize(options.k);
      beam = std::move(next);
    }

    CandidateSet slot;
    for (const Partial& p : beam) {
      Candidate c;
      for (std::size_t pos = 0; pos < p.choice.size(); ++pos) {
        c.tokens.push_back(columns[pos][p.choice[pos]].first);
      }
      c.proposal_logprob = p.logprob;
      c.expert_id = options.expert_id;
      slot.push_back(std::move(c));
    }
    lattice.slots.push_back(normalize_slot(std::move(slot)));
  }
  return lattice;
}

double dictionary_logprob(const Dictionary& dictionary, const Sentence& source,
                          const Sentence& target, double floor) {
  double total = 0.0;
  const std::size_t n = std::max(source.size(), target.size());
  for (std::size_t i = 0; i < n; ++i) {
    double p = 0.0;
    if (i < source.size() && i < target.size()) {
      auto it = dictionary.entries.find(source[i]);
      if (it == dictionary.entries.end()) {
        p = source[i] == target[i] ? 1.0 : 0.0;
      } else {
        for (const auto& [t, q] : it->second) {
          if (t == target[i]) p += q;
        }
      }
    }
    total += std::log(std::max(p, floor));
  }
  return total;
}

Lattice merge_expert_pools(const std::vector<Lattice>& lattices, std::size_t k) {
  if (lattices.empty()) throw DataError("merge_expert_pools: no lattices");
  if (k < 1) throw DataError("merge_expert_pools: K must be >= 1");
  const Lattice& first = lattices.front();
  for (const Lattice& l : lattices) {
    if (l.doc_id != first.doc_id || l.slots.size() != first.slots.size()) {
      throw DataError("merge_expert_pools: lattices disagree on doc_id or slot count");
    }
  }
  Lattice merged{first.doc_id, first.source, {}};
  for (std::size_t i = 0; i < first.slots.size(); ++i) {
    CandidateSet pool;
    for (const Lattice& l : lattices) {
      pool.insert(pool.end(), l.slots[i].begin(), l.slots[i].end());
    }
    pool = normalize_slot(std::move(pool));

    std::map<std::string, std::vector<const Candidate*>> by_expert;
    for (const Candidate& c : pool) by_expert[c.expert_id].push_back(&c);
    CandidateSet kept;
    for (std::size_t round = 0; kept.size() < k; ++round) {
      bool any = false;
      for (const auto& [expert, list] : by_expert) {
        if (round < list.size() && kept.size() < k) {
          kept.push_back(*list[round]);
          any = true;
        }
      }
      if (!any) break;
    }
    merged.slots.push_back(normalize_slot(std::move(kept)));
  }
  return merged;
}

Lattice inject_references(const Lattice& lattice, const Document& references,
                          const ReferenceScorer& scorer, std::size_t k) {
  if (references.sentences.size() != lattice.slots.size()) {
    throw DataError("inject_references: reference '" + references.id +
                    "' does not match lattice '" + lattice.doc_id + "'");
  }
  Lattice out = lattice;
  for (std::size_t i = 0; i < out.slots.size(); ++i) {
    const Sentence& ref = references.sentences[i];
    CandidateSet& slot = out.slots[i];
    if (find_candidate(slot, ref)) continue;
    if (k > 0 && slot.size() >= k) slot.resize(k - 1);
    Candidate c;
    c.tokens = ref;
    c.proposal_logprob = scorer(lattice.source.sentences[i], ref);
    c.expert_id = "ref";
    slot.push_back(std::move(c));
    slot = normalize_slot(std::move(slot));
  }
  return out;
}

}  // namespace ncdoc
