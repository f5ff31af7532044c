// channel.cc
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

#include "ncdoc/channel.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "ncdoc/error.h"

namespace ncdoc {

int IBM1Model::intern_source(const std::string& word) {
  auto [it, inserted] =
      source_ids_.try_emplace(word, static_cast<int>(source_words_.size()));
  if (inserted) source_words_.push_back(word);
  return it->second;
}

int IBM1Model::intern_target(const std::string& word) {
  auto [it, inserted] =
      target_ids_.try_emplace(word, static_cast<int>(target_words_.size()));
  if (inserted) {
    target_words_.push_back(word);
    table_.emplace_back();
  }
  return it->second;
}

int IBM1Model::source_id(std::string_view word) const {
  auto it = source_ids_.find(std::string(word));
  return it == source_ids_.end() ? -1 : it->second;
}

int IBM1Model::target_id(std::string_view word) const {
  auto it = target_ids_.find(std::string(word));
  return it == target_ids_.end() ? -1 : it->second;
}

IBM1Model IBM1Model::train(const ParallelSentenceCorpus& corpus,
                           int iterations) {
  if (corpus.pairs.empty()) throw DataError("train_ibm1: empty corpus");
  if (iterations < 1) throw DataError("train_ibm1: iterations must be >= 1");

  IBM1Model model;
  model.intern_target(std::string(kNull));

  struct Encoded {
    std::vector<int> source;
    std::vector<int> target;  // position 0 is NULL
  };
  std::vector<Encoded> data;
  data.reserve(corpus.pairs.size());
  for (const SentencePair& pair : corpus.pairs) {
    if (pair.source.empty() || pair.target.empty()) {
      throw DataError("train_ibm1: empty sentence in corpus");
    }
    Encoded e;
    for (const Token& s : pair.source) e.source.push_back(model.intern_source(s));
    e.target.push_back(0);
    for (const Token& t : pair.target) e.target.push_back(model.intern_target(t));
    data.push_back(std::move(e));
  }

  for (const Encoded& e : data) {
    for (int t : e.target) {
      for (int s : e.source) model.table_[t][s] = 0.0;
    }
  }
  for (Row& row : model.table_) {
    const double uniform = 1.0 / static_cast<double>(row.size());
    for (auto& [s, p] : row) p = uniform;
  }

  auto e_step = [&](std::vector<Row>* counts) {
    double ll = 0.0;
    std::vector<double> probs;
    for (const Encoded& e : data) {
      const double positions = static_cast<double>(e.target.size());
      for (int s : e.source) {
        probs.clear();
        double z = 0.0;
        for (int t : e.target) {
          auto found = model.table_[t].find(s);
          double p = found == model.table_[t].end() ? 0.0 : found->second;
          probs.push_back(p);
          z += p;
        }
        if (!(z > 0.0)) continue;
        ll += std::log(z / positions);
        if (counts) {
          for (std::size_t n = 0; n < e.target.size(); ++n) {
            (*counts)[e.target[n]][s] += probs[n] / z;
          }
        }
      }
    }
    return ll;
  };

  for (int it = 0; it < iterations; ++it) {
    std::vector<Row> counts(model.table_.size());
    model.log_likelihood_.push_back(e_step(&counts));
    for (std::size_t t = 0; t < counts.size(); ++t) {
      double total = 0.0;
      for (const auto& [s, c] : counts[t]) total += c;
      Row& row = model.table_[t];
      for (auto& [s, p] : row) p = counts[t][s] / total;
      std::erase_if(row, [](const auto& kv) { return !(kv.second > 0.0); });
    }
  }
  model.log_likelihood_.push_back(e_step(nullptr));
  return model;
}

double IBM1Model::logprob(const Sentence& source, const Sentence& target) const {
  if (source.empty() || target.empty()) {
    throw DataError("channel_logprob: empty sentence");
  }
  std::vector<int> tids;
  tids.reserve(target.size() + 1);
  tids.push_back(0);
  for (const Token& t : target) tids.push_back(target_id(t));
  const double log_positions = std::log(static_cast<double>(tids.size()));

  double total = 0.0;
  for (const Token& s : source) {
    const int sid = source_id(s);
    double sum = 0.0;
    if (sid >= 0) {
      for (int t : tids) {
        if (t < 0) continue;
        auto it = table_[t].find(sid);
        if (it != table_[t].end()) sum += it->second;
      }
    }
    total += std::log(std::max(sum, kFloor)) - log_positions;
  }
  return total;
}

double IBM1Model::translation_prob(std::string_view source,
                                   std::string_view target) const {
  const int s = source_id(source);
  const int t = target_id(target);
  if (s < 0 || t < 0) return 0.0;
  auto it = table_[t].find(s);
  return it == table_[t].end() ? 0.0 : it->second;
}

std::vector<std::string> IBM1Model::target_vocabulary() const {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < table_.size(); ++t) {
    if (!table_[t].empty()) out.push_back(target_words_[t]);
  }
  return out;
}

std::vector<std::pair<std::string, double>> IBM1Model::distribution(
    std::string_view target) const {
  std::vector<std::pair<std::string, double>> out;
  const int t = target_id(target);
  if (t < 0) return out;
  for (const auto& [s, p] : table_[t]) out.emplace_back(source_words_[s], p);
  std::sort(out.begin(), out.end());
  return out;
}

void IBM1Model::write(std::ostream& out) const {
  std::vector<std::tuple<const std::string*, const std::string*, double>> rows;
  for (std::size_t t = 0; t < table_.size(); ++t) {
    for (const auto& [s, p] : table_[t]) {
      rows.emplace_back(&target_words_[t], &source_words_[s], p);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(*std::get<0>(a), *std::get<1>(a)) <
           std::tie(*std::get<0>(b), *std::get<1>(b));
  });
  char buf[40];
  for (const auto& [t, s, p] : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    out << *s << '\t' << *t << '\t' << buf << '\n';
  }
}

void IBM1Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write channel model " + path);
  write(out);
}

IBM1Model IBM1Model::read(std::istream& in, ChannelLoadReport* report) {
  IBM1Model model;
  model.intern_target(std::string(kNull));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t a = line.find('\t');
    std::size_t b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
      throw DataError("malformed ttable line " + std::to_string(line_no));
    }
    std::string source = line.substr(0, a);
    std::string target = line.substr(a + 1, b - a - 1);
    std::string prob = line.substr(b + 1);
    char* end = nullptr;
    double p = std::strtod(prob.c_str(), &end);
    if (source.empty() || target.empty() || prob.empty() ||
        end != prob.c_str() + prob.size() || !std::isfinite(p) || p <= 0.0 ||
        p > 1.0) {
      throw DataError("malformed ttable line " + std::to_string(line_no) +
                      ": '" + line + "'");
    }
    int s = model.intern_source(source);
    int t = model.intern_target(target);
    if (!model.table_[t].emplace(s, p).second) {
      throw DataError("duplicate ttable entry at line " + std::to_string(line_no));
    }
  }
  for (std::size_t t = 0; t < model.table_.size(); ++t) {
    Row& row = model.table_[t];
    if (row.empty()) continue;
    std::vector<std::pair<int, double>> sorted(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (const auto& [s, p] : sorted) total += p;
    if (std::abs(total - 1.0) > 1e-9) {
      std::cerr << "warning: ttable distribution for '" << model.target_words_[t]
                << "' sums to " << total << "; renormalizing\n";
      for (auto& [s, p] : row) p /= total;
      if (report) report->renormalized.push_back(model.target_words_[t]);
    }
  }
  return model;
}

IBM1Model IBM1Model::load(const std::string& path, ChannelLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open channel model '" + path + "'");
  try {
    return read(in, report);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace ncdoc
