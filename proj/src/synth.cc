// synth.cc
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

#include "ncdoc/synth.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "ncdoc/error.h"

namespace ncdoc {
namespace {

struct Phenomenon {
  std::array<const char*, 2> marker_src;
  std::array<const char*, 2> marker_tgt;
  const char* head_src;
  std::array<const char*, 2> head_tgt;
  const char* tail_src;
  std::array<const char*, 2> tail_tgt;
};

// number, tense, lexical choice, dropped pronoun
constexpr std::array<Phenomenon, 4> kPhenomena{{
    {{"ONE", "MANY"}, {"one", "many"}, "NOUN", {"noun", "nouns"}, "IT",
     {"it", "them"}},
    {{"TODAY", "YESTERDAY"}, {"today", "yesterday"}, "VERB",
     {"verbs", "verbed"}, "TIME", {"now", "then"}},
    {{"FORMAL", "CASUAL"}, {"formally", "casually"}, "THING",
     {"thinga", "thingb"}, "STYLE", {"indeed", "truly"}},
    {{"JOHN", "MARY"}, {"john", "mary"}, "ACT", {"he_acts", "she_acts"},
     "SELF", {"himself", "herself"}},
}};

constexpr std::size_t kMaxMarkerDistance = 4;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  x ^= x >> 31;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 29;
  return x;
}

std::string content_src(std::size_t i) { return "W" + std::to_string(i); }
std::string content_tgt(std::size_t i) { return "w" + std::to_string(i); }

struct SentencePlan {
  bool ambiguous = false;
  std::size_t lemma = 0;
  std::vector<std::size_t> content;
};

void realize(const Phenomenon& ph, int mode, const SentencePlan& plan,
             Sentence* src, Sentence* tgt) {
  const std::string lemma = std::to_string(plan.lemma);
  if (!plan.ambiguous) {
    src->push_back(ph.marker_src[mode]);
    tgt->push_back(ph.marker_tgt[mode]);
  }
  src->push_back(ph.head_src + lemma);
  tgt->push_back(ph.head_tgt[mode] + lemma);
  for (std::size_t c : plan.content) {
    src->push_back(content_src(c));
    tgt->push_back(content_tgt(c));
  }
  src->push_back(ph.tail_src);
  tgt->push_back(ph.tail_tgt[mode]);
}

}  // namespace

void validate_config(const SynthConfig& c) {
  const PhenomenonMix& m = c.mix;
  if (m.number < 0 || m.tense < 0 || m.lexical < 0 || m.pronoun < 0 ||
      std::abs(m.number + m.tense + m.lexical + m.pronoun - 1.0) > 1e-9) {
    throw DataError("synth: phenomenon fractions must be non-negative and sum to 1");
  }
  if (c.num_docs < 1 || c.sentences_per_doc < 1 || c.content_vocab < 1 ||
      c.lemmas_per_phenomenon < 1 || c.min_content < 1 ||
      c.max_content < c.min_content) {
    throw DataError("synth: counts must be >= 1 and min_content <= max_content");
  }
  if (!(c.ambiguity_rate >= 0.0 && c.ambiguity_rate <= 1.0)) {
    throw DataError("synth: ambiguity rate must lie in [0, 1]");
  }
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  validate_config(config);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> lemma_dist(
      0, config.lemmas_per_phenomenon - 1);
  std::uniform_int_distribution<std::size_t> word_dist(0, config.content_vocab - 1);
  std::uniform_int_distribution<std::size_t> length_dist(config.min_content,
                                                         config.max_content);

  const std::size_t n = config.sentences_per_doc;
  // Sentence 0 always has a marker, so the rate is spread over the rest.
  const double p_ambiguous =
      n > 1 ? std::min(1.0, config.ambiguity_rate * n / (n - 1.0)) : 0.0;
  const std::array<double, 4> mix{config.mix.number, config.mix.tense,
                                  config.mix.lexical, config.mix.pronoun};

  SynthCorpus out;
  for (std::size_t base = 0; out.corpus.docs.size() < config.num_docs; ++base) {
    double u = unit(rng);
    std::size_t which = 0;
    for (double acc = mix[0]; which + 1 < mix.size() && u >= acc;) {
      acc += mix[++which];
    }
    const Phenomenon& ph = kPhenomena[which];
    const int mode = unit(rng) < 0.5 ? 0 : 1;

    std::vector<SentencePlan> plans(n);
    std::size_t since_marker = 0;
    for (std::size_t i = 0; i < n; ++i) {
      SentencePlan& p = plans[i];
      bool draw = i > 0 && unit(rng) < p_ambiguous;
      p.ambiguous = draw && since_marker < kMaxMarkerDistance;
      since_marker = p.ambiguous ? since_marker + 1 : 0;
      p.lemma = lemma_dist(rng);
      p.content.resize(length_dist(rng));
      for (std::size_t& c : p.content) c = word_dist(rng);
    }

    for (int mirror = 0; mirror < 2 && out.corpus.docs.size() < config.num_docs;
         ++mirror) {
      const int m = mirror ? 1 - mode : mode;
      DocumentPair pair;
      pair.source.id = pair.target.id =
          "synth" + std::to_string(out.corpus.docs.size());
      for (std::size_t i = 0; i < n; ++i) {
        Sentence src, tgt;
        realize(ph, m, plans[i], &src, &tgt);
        if (plans[i].ambiguous) {
          const std::string lemma = std::to_string(plans[i].lemma);
          out.annotations.push_back({pair.target.id, i, 0,
                                     ph.head_tgt[m] + lemma,
                                     ph.head_tgt[1 - m] + lemma});
        }
        pair.source.sentences.push_back(std::move(src));
        pair.target.sentences.push_back(std::move(tgt));
      }
      out.corpus.docs.push_back(std::move(pair));
    }
  }
  return out;
}

std::optional<std::string> opposite_form(const std::string& token) {
  for (const Phenomenon& ph : kPhenomena) {
    for (int m = 0; m < 2; ++m) {
      if (token == ph.marker_tgt[m]) return std::string(ph.marker_tgt[1 - m]);
      if (token == ph.tail_tgt[m]) return std::string(ph.tail_tgt[1 - m]);
    }
  }
  std::size_t digits = token.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(token[digits - 1]))) {
    --digits;
  }
  if (digits == token.size() || digits == 0) return std::nullopt;
  const std::string stem = token.substr(0, digits);
  for (const Phenomenon& ph : kPhenomena) {
    for (int m = 0; m < 2; ++m) {
      if (stem == ph.head_tgt[m]) return ph.head_tgt[1 - m] + token.substr(digits);
    }
  }
  return std::nullopt;
}

Lattice make_ambiguous_lattice(const DocumentPair& pair,
                               const std::vector<Annotation>& annotations,
                               std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("make_ambiguous_lattice: K must be >= 2");
  if (pair.source.sentences.size() != pair.target.sentences.size()) {
    throw DataError("make_ambiguous_lattice: unaligned document '" +
                    pair.source.id + "'");
  }
  std::set<std::size_t> annotated;
  for (const Annotation& a : annotations) {
    if (a.doc_id == pair.target.id) annotated.insert(a.sent_index);
  }

  std::mt19937_64 rng(mix_seed(seed, fnv1a(pair.target.id)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Replacement words for distractors: the document's own content words.
  std::vector<std::string> content;
  {
    std::set<std::string> seen;
    for (const Sentence& s : pair.target.sentences) {
      for (const Token& t : s) {
        if (!opposite_form(t) && seen.insert(t).second) content.push_back(t);
      }
    }
    if (content.size() < 2) content.push_back("<distractor>");
  }

  Lattice lattice{pair.source.id, pair.source, {}};
  for (std::size_t i = 0; i < pair.target.sentences.size(); ++i) {
    const Sentence& ref = pair.target.sentences[i];
    const double base = -0.5 * static_cast<double>(ref.size());
    CandidateSet slot;
    std::vector<Sentence> seeds{ref};
    if (annotated.count(i)) {
      Sentence variant = ref;
      for (Token& t : variant) {
        if (auto other = opposite_form(t)) t = *other;
      }
      const double delta = 1e-8 + 1.9e-7 * unit(rng);
      const double sign = unit(rng) < 0.5 ? 1.0 : -1.0;
      slot.push_back({ref, base + sign * delta, "e0"});
      slot.push_back({variant, base - sign * delta, "e0"});
      seeds.push_back(std::move(variant));
    } else {
      slot.push_back({ref, base, "e0"});
    }

    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p < ref.size(); ++p) {
      if (!opposite_form(ref[p])) positions.push_back(p);
    }
    std::set<Sentence> present;
    for (const Candidate& c : slot) present.insert(c.tokens);
    for (std::size_t attempt = 0;
         slot.size() < k && !positions.empty() && attempt < 50 * k; ++attempt) {
      Sentence d = seeds[static_cast<std::size_t>(unit(rng) * seeds.size())];
      std::size_t p = positions[static_cast<std::size_t>(unit(rng) * positions.size())];
      d[p] = content[static_cast<std::size_t>(unit(rng) * content.size())];
      if (!present.insert(d).second) continue;
      slot.push_back({std::move(d), base - 0.5 - 2.5 * unit(rng), "e0"});
    }
    lattice.slots.push_back(normalize_slot(std::move(slot)));
  }
  return lattice;
}

Dictionary toy_dictionary(const SynthConfig& config,
                          const ToyDictionaryOptions& options) {
  if (!(options.content_correct > 0.0 && options.content_correct <= 1.0)) {
    throw DataError("toy_dictionary: content_correct must lie in (0, 1]");
  }
  Dictionary dict;
  const std::size_t v = config.content_vocab;
  const std::size_t confusions =
      options.content_correct < 1.0 ? std::min(options.confusions, v - 1) : 0;
  for (std::size_t i = 0; i < v; ++i) {
    auto& entry = dict.entries[content_src(i)];
    entry.emplace_back(content_tgt(i),
                       confusions ? options.content_correct : 1.0);
    for (std::size_t c = 1; c <= confusions; ++c) {
      entry.emplace_back(content_tgt((i + c) % v),
                         (1.0 - options.content_correct) / confusions);
    }
  }
  for (const Phenomenon& ph : kPhenomena) {
    for (int m = 0; m < 2; ++m) {
      dict.entries[ph.marker_src[m]] = {{ph.marker_tgt[m], 1.0}};
    }
    dict.entries[ph.tail_src] = {{ph.tail_tgt[0], 0.5}, {ph.tail_tgt[1], 0.5}};
    for (std::size_t j = 0; j < config.lemmas_per_phenomenon; ++j) {
      const std::string lemma = std::to_string(j);
      dict.entries[ph.head_src + lemma] = {{ph.head_tgt[0] + lemma, 0.5},
                                           {ph.head_tgt[1] + lemma, 0.5}};
    }
  }
  return dict;
}

}  // namespace ncdoc
