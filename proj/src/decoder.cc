// decoder.cc
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

#include "ncdoc/decoder.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "ncdoc/error.h"
#include "ncdoc/parallel.h"

namespace ncdoc {
namespace {

ScoreBreakdown combine(const Weights& w, double proposal, double lm,
                       double channel, int length) {
  ScoreBreakdown b;
  b.proposal = proposal;
  b.lm = lm;
  b.channel = channel;
  b.length = length;
  b.total = w.lambda1 * proposal + w.lambda_lm * lm + w.lambda2 * channel +
            w.lambda3 * static_cast<double>(length);
  return b;
}

// Channel scores do not depend on the prefix, so each slot is scored once.
std::vector<std::vector<double>> channel_scores(const Lattice& lattice,
                                                const ChannelModel& channel) {
  std::vector<std::vector<double>> scores(lattice.slots.size());
  for (std::size_t i = 0; i < lattice.slots.size(); ++i) {
    for (const Candidate& c : lattice.slots[i]) {
      scores[i].push_back(channel.logprob(lattice.source.sentences[i], c.tokens));
    }
  }
  return scores;
}

struct Ranked {
  Hypothesis hyp;
  double score;  // cumulative, or cumulative plus the weighted stop event
  double stop = 0.0;
};

bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.hyp.chosen < b.hyp.chosen;
}

DecodeResult make_result(const Lattice& lattice, const Hypothesis& hyp,
                         double final_score, double stop, bool stop_applied,
                         const BeamStats& stats) {
  DecodeResult r;
  r.doc_id = lattice.doc_id;
  r.output.id = lattice.doc_id;
  for (std::size_t i = 0; i < hyp.chosen.size(); ++i) {
    r.output.sentences.push_back(lattice.slots[i][hyp.chosen[i]].tokens);
  }
  r.chosen = hyp.chosen;
  r.cumulative = hyp.cumulative;
  r.stop_logprob = stop;
  r.stop_applied = stop_applied;
  r.final_score = final_score;
  r.breakdowns = hyp.breakdowns;
  r.stats = stats;
  return r;
}

Hypothesis extend(const Hypothesis& hyp, std::size_t index,
                  const ScoreBreakdown& b, LMState next) {
  Hypothesis out;
  out.chosen = hyp.chosen;
  out.chosen.push_back(index);
  out.cumulative = hyp.cumulative + b.total;
  out.lm_state = std::move(next);
  out.breakdowns = hyp.breakdowns;
  out.breakdowns.push_back(b);
  return out;
}

}  // namespace

Weights parse_weights(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(v)) {
      throw UsageError("invalid weight '" + item + "' in '" + text + "'");
    }
    values.push_back(v);
  }
  if (values.size() != 3 && values.size() != 4) {
    throw UsageError("--weights expects l1,l2,l3[,llm], got '" + text + "'");
  }
  Weights w;
  w.lambda1 = values[0];
  w.lambda2 = values[1];
  w.lambda3 = values[2];
  if (values.size() == 4) w.lambda_lm = values[3];
  return w;
}

std::string format_weights(const Weights& w) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%g,%g,%g,%g", w.lambda1, w.lambda2,
                w.lambda3, w.lambda_lm);
  return buf;
}

Extension score_extension(const Weights& weights, const LanguageModel& lm,
                          const ChannelModel& channel, const Hypothesis& hyp,
                          const Sentence& slot_source, const Candidate& cand) {
  SentenceScore lm_score = lm.score_sentence(hyp.lm_state, cand.tokens);
  double ch = channel.logprob(slot_source, cand.tokens);
  return {combine(weights, cand.proposal_logprob, lm_score.logprob, ch,
                  static_cast<int>(cand.tokens.size())),
          std::move(lm_score.next)};
}

DecodeResult doc_decode(const Lattice& lattice, const LanguageModel& lm,
                        const ChannelModel& channel, const Weights& weights,
                        std::size_t beam) {
  if (beam < 1) throw DataError("doc_decode: beam size must be >= 1");
  validate_lattice(lattice);
  const auto ch = channel_scores(lattice, channel);

  BeamStats stats;
  std::vector<Ranked> current;
  current.push_back({Hypothesis{{}, 0.0, lm.initial_state(), {}}, 0.0});
  const std::size_t last = lattice.slots.size() - 1;
  for (std::size_t i = 0; i < lattice.slots.size(); ++i) {
    const CandidateSet& slot = lattice.slots[i];
    std::vector<Ranked> expanded;
    expanded.reserve(current.size() * slot.size());
    for (const Ranked& r : current) {
      for (std::size_t j = 0; j < slot.size(); ++j) {
        SentenceScore s = lm.score_sentence(r.hyp.lm_state, slot[j].tokens);
        ScoreBreakdown b = combine(weights, slot[j].proposal_logprob, s.logprob,
                                   ch[i][j], static_cast<int>(slot[j].tokens.size()));
        Ranked next{extend(r.hyp, j, b, std::move(s.next)), 0.0};
        next.score = next.hyp.cumulative;
        if (i == last) {
          next.stop = lm.stop_logprob(next.hyp.lm_state);
          next.score = next.hyp.cumulative + weights.lambda_lm * next.stop;
        }
        expanded.push_back(std::move(next));
      }
    }
    stats.expansions += expanded.size();
    std::sort(expanded.begin(), expanded.end(), ranks_before);
    if (expanded.size() > beam) {
      stats.pruned += expanded.size() - beam;
      expanded.resize(beam);
    }
    current = std::move(expanded);
  }
  const Ranked& best = current.front();
  return make_result(lattice, best.hyp, best.score, best.stop, true, stats);
}

DecodeResult exhaustive_decode(const Lattice& lattice, const LanguageModel& lm,
                               const ChannelModel& channel,
                               const Weights& weights, std::size_t max_paths) {
  validate_lattice(lattice);
  double paths = 1.0;
  for (const CandidateSet& slot : lattice.slots) {
    paths *= static_cast<double>(slot.size());
  }
  if (paths > static_cast<double>(max_paths)) {
    throw DataError("exhaustive_decode: " + std::to_string(paths) +
                    " paths exceed the cap of " + std::to_string(max_paths));
  }
  const auto ch = channel_scores(lattice, channel);
  const std::size_t n = lattice.slots.size();

  BeamStats stats;
  bool have_best = false;
  Ranked best{Hypothesis{}, 0.0};
  // Depth-first in lexicographic index order, so a later path only wins on
  // a strictly higher score.
  auto visit = [&](auto&& self, const Hypothesis& hyp) -> void {
    const std::size_t i = hyp.chosen.size();
    if (i == n) {
      double stop = lm.stop_logprob(hyp.lm_state);
      double score = hyp.cumulative + weights.lambda_lm * stop;
      if (!have_best || score > best.score) {
        best = {hyp, score, stop};
        have_best = true;
      }
      return;
    }
    const CandidateSet& slot = lattice.slots[i];
    for (std::size_t j = 0; j < slot.size(); ++j) {
      SentenceScore s = lm.score_sentence(hyp.lm_state, slot[j].tokens);
      ScoreBreakdown b = combine(weights, slot[j].proposal_logprob, s.logprob,
                                 ch[i][j], static_cast<int>(slot[j].tokens.size()));
      ++stats.expansions;
      self(self, extend(hyp, j, b, std::move(s.next)));
    }
  };
  visit(visit, Hypothesis{{}, 0.0, lm.initial_state(), {}});
  return make_result(lattice, best.hyp, best.score, best.stop, true, stats);
}

DecodeResult sent_rerank(const Lattice& lattice, const LanguageModel& sentence_lm,
                         const ChannelModel& channel, const Weights& weights) {
  validate_lattice(lattice);
  const auto ch = channel_scores(lattice, channel);
  const LMState start = sentence_lm.initial_state();
  BeamStats stats;
  Hypothesis hyp{{}, 0.0, start, {}};
  for (std::size_t i = 0; i < lattice.slots.size(); ++i) {
    const CandidateSet& slot = lattice.slots[i];
    std::size_t best = 0;
    ScoreBreakdown best_b;
    for (std::size_t j = 0; j < slot.size(); ++j) {
      SentenceScore s = sentence_lm.score_sentence(start, slot[j].tokens);
      ScoreBreakdown b = combine(weights, slot[j].proposal_logprob, s.logprob,
                                 ch[i][j], static_cast<int>(slot[j].tokens.size()));
      if (j == 0 || b.total > best_b.total) {
        best = j;
        best_b = b;
      }
    }
    stats.expansions += slot.size();
    stats.pruned += slot.size() - 1;
    hyp = extend(hyp, best, best_b, start);
  }
  return make_result(lattice, hyp, hyp.cumulative, 0.0, false, stats);
}

std::vector<DecodeResult> decode_corpus(const std::vector<Lattice>& lattices,
                                        const LanguageModel& lm,
                                        const ChannelModel& channel,
                                        const Weights& weights, DecodeMode mode,
                                        std::size_t beam, unsigned threads) {
  std::vector<DecodeResult> results(lattices.size());
  parallel_for(lattices.size(), threads, [&](std::size_t d) {
    switch (mode) {
      case DecodeMode::kDocument:
        results[d] = doc_decode(lattices[d], lm, channel, weights, beam);
        break;
      case DecodeMode::kSentence:
        results[d] = sent_rerank(lattices[d], lm, channel, weights);
        break;
      case DecodeMode::kExhaustive:
        results[d] = exhaustive_decode(lattices[d], lm, channel, weights);
        break;
    }
  });
  return results;
}

std::vector<Document> outputs(const std::vector<DecodeResult>& results) {
  std::vector<Document> docs;
  docs.reserve(results.size());
  for (const DecodeResult& r : results) docs.push_back(r.output);
  return docs;
}

std::string decode_result_record(const DecodeResult& result,
                                 const Weights& weights) {
  nlohmann::ordered_json j;
  j["doc_id"] = result.doc_id;
  auto& out = j["output"] = nlohmann::ordered_json::array();
  for (const Sentence& s : result.output.sentences) out.push_back(join_tokens(s));
  j["chosen"] = result.chosen;
  j["final_score"] = result.final_score;
  j["cumulative"] = result.cumulative;
  j["stop_logprob"] = result.stop_logprob;
  j["stop_weighted"] =
      result.stop_applied ? weights.lambda_lm * result.stop_logprob : 0.0;
  auto& bd = j["breakdowns"] = nlohmann::ordered_json::array();
  for (const ScoreBreakdown& b : result.breakdowns) {
    nlohmann::ordered_json e;
    e["proposal"] = b.proposal;
    e["lm"] = b.lm;
    e["channel"] = b.channel;
    e["length"] = b.length;
    e["total"] = b.total;
    bd.push_back(std::move(e));
  }
  j["stats"]["expansions"] = result.stats.expansions;
  j["stats"]["pruned"] = result.stats.pruned;
  return j.dump();
}

DependencyReport posterior_dependency_probe(
    const Lattice& base, const Lattice& variant, const LanguageModel& lm,
    const ChannelModel& channel, const Weights& weights, std::size_t beam,
    std::size_t vary_slot, std::size_t watch_slot) {
  if (base.slots.size() != variant.slots.size() ||
      watch_slot >= base.slots.size() || vary_slot >= base.slots.size() ||
      watch_slot == vary_slot) {
    throw DataError("posterior_dependency_probe: incompatible lattices or slots");
  }
  for (std::size_t i = 0; i < base.slots.size(); ++i) {
    if (i == vary_slot) continue;
    const CandidateSet& a = base.slots[i];
    const CandidateSet& b = variant.slots[i];
    bool same = a.size() == b.size() &&
                base.source.sentences[i] == variant.source.sentences[i];
    for (std::size_t j = 0; same && j < a.size(); ++j) {
      same = a[j].tokens == b[j].tokens &&
             a[j].proposal_logprob == b[j].proposal_logprob;
    }
    if (!same) {
      throw DataError("posterior_dependency_probe: lattices differ at slot " +
                      std::to_string(i));
    }
  }
  DecodeResult r0 = doc_decode(base, lm, channel, weights, beam);
  DecodeResult r1 = doc_decode(variant, lm, channel, weights, beam);
  DependencyReport report;
  report.watch_slot = watch_slot;
  report.base_choice = r0.chosen[watch_slot];
  report.variant_choice = r1.chosen[watch_slot];
  report.base_tokens = r0.output.sentences[watch_slot];
  report.variant_tokens = r1.output.sentences[watch_slot];
  report.changed = report.base_choice != report.variant_choice;
  return report;
}

}  // namespace ncdoc
