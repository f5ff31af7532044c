// lm.cc
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

#include "ncdoc/lm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ncdoc/error.h"

namespace ncdoc {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  if (text.empty()) throw DataError("malformed " + what + ": empty number");
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw DataError("malformed " + what + ": bad number '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

double document_logprob(const LanguageModel& lm, const Document& doc) {
  LMState state = lm.initial_state();
  double total = 0.0;
  for (const Sentence& s : doc.sentences) {
    SentenceScore score = lm.score_sentence(state, s);
    total += score.logprob;
    state = std::move(score.next);
  }
  return total + lm.stop_logprob(state);
}

PerplexityReport perplexity_per_word(const LanguageModel& lm,
                                     const std::vector<Document>& docs) {
  if (docs.empty()) throw DataError("perplexity: empty evaluation set");
  PerplexityReport report;
  for (const Document& doc : docs) {
    report.logprob += document_logprob(lm, doc);
    report.words += token_count(doc);
    report.sentence_ends += doc.sentences.size();
    report.document_ends += 1;
  }
  report.events = report.words + report.sentence_ends + report.document_ends;
  report.perplexity =
      std::exp(-report.logprob / static_cast<double>(report.events));
  report.convention = "events = words + </s> per sentence + <stop> per document";
  return report;
}

std::size_t NGramLM::KeyHash::operator()(
    const std::vector<WordId>& key) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (WordId id : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(id));
    h *= 1099511628211ull;
  }
  return h;
}

WordId NGramLM::intern(std::string_view word) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(word), static_cast<WordId>(words_.size()));
  if (inserted) words_.emplace_back(word);
  return it->second;
}

WordId NGramLM::lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end() || it->second == bos_) return unk_;
  return it->second;
}

void NGramLM::finalize_vocabulary() {
  auto marker = [&](std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) {
      throw DataError("language model is missing marker " + std::string(name));
    }
    return it->second;
  };
  bos_ = marker(kBos);
  eos_ = marker(kEos);
  stop_ = marker(kStop);
  unk_ = marker(kUnk);
  vocab_size_ = words_.size() - 1;
}

NGramLM NGramLM::train(const std::vector<Document>& docs,
                       const NGramOptions& options) {
  if (docs.empty()) throw DataError("train_ngram_lm: empty corpus");
  if (options.order < 1) throw DataError("train_ngram_lm: order must be >= 1");
  if (!(options.discount > 0.0 && options.discount < 1.0)) {
    throw DataError("train_ngram_lm: discount must lie in (0, 1)");
  }
  if (!(options.floor >= 0.0 && options.floor < 1e-3)) {
    throw DataError("train_ngram_lm: floor must lie in [0, 1e-3)");
  }

  NGramLM lm;
  lm.options_ = options;
  for (std::string_view m : {kBos, kEos, kStop, kUnk}) lm.intern(m);
  lm.finalize_vocabulary();

  // Training streams. Without reset a document is one segment
  // <s> s1 </s> s2 </s> ... </s> <stop>; with reset every sentence is its
  // own segment and <stop> follows a fresh <s>.
  std::vector<std::vector<WordId>> segments;
  std::map<WordId, long> freq;
  for (const Document& doc : docs) {
    if (doc.sentences.empty()) {
      throw DataError("train_ngram_lm: document '" + doc.id + "' is empty");
    }
    std::vector<WordId> seg{lm.bos_};
    for (const Sentence& s : doc.sentences) {
      if (s.empty()) {
        throw DataError("train_ngram_lm: empty sentence in '" + doc.id + "'");
      }
      for (const Token& tok : s) {
        WordId id = lm.intern(tok);
        seg.push_back(id);
        ++freq[id];
      }
      seg.push_back(lm.eos_);
      if (options.sentence_reset) {
        segments.push_back(std::move(seg));
        seg = {lm.bos_};
      }
    }
    seg.push_back(lm.stop_);
    segments.push_back(std::move(seg));
  }
  lm.finalize_vocabulary();

  const int N = options.order;
  const double D = options.discount;

  // Adjusted counts: raw counts for the highest order and for n-grams that
  // start with <s>; distinct left-extension counts otherwise.
  std::map<std::vector<WordId>, double> adjusted;
  std::map<std::vector<WordId>, std::set<WordId>> left;
  for (const auto& seg : segments) {
    for (std::size_t i = 1; i < seg.size(); ++i) {
      const int max_n = std::min<int>(N, static_cast<int>(i) + 1);
      for (int n = 1; n <= max_n; ++n) {
        std::size_t start = i + 1 - n;
        std::vector<WordId> gram(seg.begin() + start, seg.begin() + i + 1);
        if (n == N || gram.front() == lm.bos_) {
          adjusted[gram] += 1.0;
        } else {
          left[gram].insert(seg[start - 1]);
        }
      }
    }
  }
  for (auto& [gram, lefts] : left) {
    adjusted[gram] = static_cast<double>(lefts.size());
  }
  long singletons = 0;
  for (const auto& [id, count] : freq) {
    if (count == 1) ++singletons;
  }
  if (singletons > 0) adjusted[{lm.unk_}] += static_cast<double>(singletons);

  // Unigrams: interpolate with the uniform distribution over the vocabulary.
  {
    double total = 0.0, types = 0.0;
    for (WordId w = 0; w < static_cast<WordId>(lm.words_.size()); ++w) {
      if (w == lm.bos_) continue;
      auto it = adjusted.find({w});
      if (it != adjusted.end()) {
        total += it->second;
        types += 1.0;
      }
    }
    const double gamma = D * types / total;
    const double uniform = 1.0 / static_cast<double>(lm.vocab_size_);
    for (WordId w = 0; w < static_cast<WordId>(lm.words_.size()); ++w) {
      Entry entry;
      if (w == lm.bos_) {
        entry.log10_prob = -99.0;
      } else {
        auto it = adjusted.find({w});
        double a = it == adjusted.end() ? 0.0 : it->second;
        double p = (a > 0.0 ? (a - D) / total : 0.0) + gamma * uniform;
        entry.log10_prob = std::log10(p);
      }
      lm.table_.emplace(std::vector<WordId>{w}, entry);
    }
  }

  // Higher orders, one at a time so lower-order probabilities are final.
  for (int n = 2; n <= N; ++n) {
    struct Stats {
      double total = 0.0;
      double types = 0.0;
    };
    std::map<std::vector<WordId>, Stats> contexts;
    for (const auto& [gram, a] : adjusted) {
      if (static_cast<int>(gram.size()) != n) continue;
      Stats& s = contexts[std::vector<WordId>(gram.begin(), gram.end() - 1)];
      s.total += a;
      s.types += 1.0;
    }
    std::vector<std::pair<std::vector<WordId>, Entry>> fresh;
    for (const auto& [gram, a] : adjusted) {
      if (static_cast<int>(gram.size()) != n) continue;
      std::vector<WordId> context(gram.begin(), gram.end() - 1);
      const Stats& s = contexts.at(context);
      const double gamma = D * s.types / s.total;
      std::vector<WordId> shorter(context.begin() + 1, context.end());
      double lower = std::pow(10.0, lm.log10_backoff(shorter, gram.back()));
      Entry entry;
      entry.log10_prob = std::log10((a - D) / s.total + gamma * lower);
      fresh.emplace_back(gram, entry);
    }
    for (const auto& [context, s] : contexts) {
      auto it = lm.table_.find(context);
      if (it == lm.table_.end()) {
        throw std::logic_error("n-gram context without its own entry");
      }
      it->second.has_bow = true;
      it->second.log10_bow = std::log10(D * s.types / s.total);
    }
    for (auto& [gram, entry] : fresh) lm.table_.emplace(gram, entry);
  }
  return lm;
}

double NGramLM::log10_backoff(const std::vector<WordId>& context,
                              WordId word) const {
  double acc = 0.0;
  std::vector<WordId> key;
  for (std::size_t start = 0; start <= context.size(); ++start) {
    key.assign(context.begin() + start, context.end());
    key.push_back(word);
    auto it = table_.find(key);
    if (it != table_.end()) return acc + it->second.log10_prob;
    key.pop_back();
    if (!key.empty()) {
      auto ctx = table_.find(key);
      if (ctx != table_.end() && ctx->second.has_bow) {
        acc += ctx->second.log10_bow;
      }
    }
  }
  throw std::logic_error("word id missing from the unigram table");
}

double NGramLM::logprob_id(const LMState& state, WordId word) const {
  double p = std::pow(10.0, log10_backoff(state.context, word));
  const double floor = options_.floor;
  p = (1.0 - static_cast<double>(vocab_size_) * floor) * p + floor;
  return std::log(p);
}

void NGramLM::push(LMState& state, WordId word) const {
  const std::size_t width = static_cast<std::size_t>(options_.order - 1);
  if (options_.sentence_reset && word == eos_) {
    state.context.clear();
    if (width > 0) state.context.push_back(bos_);
    return;
  }
  if (width == 0) return;
  state.context.push_back(word);
  if (state.context.size() > width) {
    state.context.erase(state.context.begin(),
                        state.context.end() - static_cast<long>(width));
  }
}

LMState NGramLM::initial_state() const {
  LMState state;
  if (options_.order > 1) state.context.push_back(bos_);
  return state;
}

SentenceScore NGramLM::score_sentence(const LMState& state,
                                      const Sentence& sentence) const {
  if (sentence.empty()) throw DataError("sentence_logprob: empty sentence");
  SentenceScore out{0.0, state};
  for (const Token& tok : sentence) {
    WordId id = lookup(tok);
    out.logprob += logprob_id(out.next, id);
    push(out.next, id);
  }
  out.logprob += logprob_id(out.next, eos_);
  push(out.next, eos_);
  return out;
}

double NGramLM::stop_logprob(const LMState& state) const {
  return logprob_id(state, stop_);
}

double NGramLM::token_logprob(const LMState& state,
                              std::string_view token) const {
  return logprob_id(state, lookup(token));
}

LMState NGramLM::advance(const LMState& state, std::string_view token) const {
  LMState next = state;
  push(next, lookup(token));
  return next;
}

std::vector<Token> NGramLM::vocabulary() const {
  std::vector<Token> out;
  out.reserve(vocab_size_);
  for (WordId w = 0; w < static_cast<WordId>(words_.size()); ++w) {
    if (w != bos_) out.push_back(words_[w]);
  }
  return out;
}

std::size_t NGramLM::ngram_count(int n) const {
  std::size_t count = 0;
  for (const auto& [key, entry] : table_) {
    if (static_cast<int>(key.size()) == n) ++count;
  }
  return count;
}

void NGramLM::write_header(std::ostream& out) const {
  out << "ncdoc-ngram-lm " << kFormatVersion << '\n'
      << "order " << options_.order << '\n'
      << "discount " << format_double(options_.discount) << '\n'
      << "floor " << format_double(options_.floor) << '\n'
      << "sentence_reset " << (options_.sentence_reset ? 1 : 0) << '\n'
      << "bos " << kBos << '\n'
      << "eos " << kEos << '\n'
      << "stop " << kStop << '\n'
      << "unk " << kUnk << '\n';
}

void NGramLM::write_arpa(std::ostream& out) const {
  std::vector<std::vector<const std::pair<const std::vector<WordId>, Entry>*>>
      by_order(options_.order + 1);
  for (const auto& item : table_) by_order[item.first.size()].push_back(&item);
  for (auto& entries : by_order) {
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
  }
  out << "\\data\\\n";
  for (int n = 1; n <= options_.order; ++n) {
    out << "ngram " << n << '=' << by_order[n].size() << '\n';
  }
  for (int n = 1; n <= options_.order; ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto* item : by_order[n]) {
      out << format_double(item->second.log10_prob) << '\t';
      for (std::size_t i = 0; i < item->first.size(); ++i) {
        if (i) out << ' ';
        out << words_[item->first[i]];
      }
      if (item->second.has_bow) {
        out << '\t' << format_double(item->second.log10_bow);
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void NGramLM::save(const std::string& path) const {
  std::ofstream arpa(path);
  std::ofstream header(path + ".header");
  if (!arpa || !header) throw DataError("cannot write language model " + path);
  write_arpa(arpa);
  write_header(header);
}

NGramLM NGramLM::load(const std::string& path) {
  std::ifstream arpa(path);
  std::ifstream header(path + ".header");
  if (!arpa) throw DataError("cannot open language model '" + path + "'");
  if (!header) throw DataError("cannot open '" + path + ".header'");
  try {
    return read(arpa, header);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

NGramLM NGramLM::read(std::istream& arpa, std::istream& header) {
  NGramLM lm;
  std::map<std::string, std::string> fields;
  std::string line;
  while (std::getline(header, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) throw DataError("malformed header line '" + line + "'");
    fields[key] = value;
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw DataError("header is missing '" + key + "'");
    return it->second;
  };
  if (field("ncdoc-ngram-lm") != std::to_string(kFormatVersion)) {
    throw DataError("unsupported model version " + field("ncdoc-ngram-lm"));
  }
  lm.options_.order = static_cast<int>(parse_double(field("order"), "header"));
  lm.options_.discount = parse_double(field("discount"), "header");
  lm.options_.floor = parse_double(field("floor"), "header");
  lm.options_.sentence_reset = field("sentence_reset") == "1";
  if (lm.options_.order < 1) throw DataError("header: order must be >= 1");
  if (field("bos") != kBos || field("eos") != kEos || field("stop") != kStop ||
      field("unk") != kUnk) {
    throw DataError("header: unexpected marker tokens");
  }

  auto next_line = [&](std::string& out) {
    if (!std::getline(arpa, out)) throw DataError("truncated ARPA file");
  };
  next_line(line);
  while (line.empty()) next_line(line);
  if (line != "\\data\\") throw DataError("ARPA file must start with \\data\\");
  std::vector<std::size_t> counts;
  while (true) {
    next_line(line);
    if (line.empty()) break;
    int n = 0;
    std::size_t c = 0;
    if (std::sscanf(line.c_str(), "ngram %d=%zu", &n, &c) != 2 ||
        n != static_cast<int>(counts.size()) + 1) {
      throw DataError("malformed ARPA count line '" + line + "'");
    }
    counts.push_back(c);
  }
  if (static_cast<int>(counts.size()) != lm.options_.order) {
    throw DataError("ARPA order does not match the header");
  }
  for (int n = 1; n <= lm.options_.order; ++n) {
    do next_line(line); while (line.empty());
    if (line != "\\" + std::to_string(n) + "-grams:") {
      throw DataError("expected section \\" + std::to_string(n) + "-grams:");
    }
    for (std::size_t i = 0; i < counts[n - 1]; ++i) {
      next_line(line);
      std::vector<std::string> f = split_tabs(line);
      if (f.size() != 2 && f.size() != 3) {
        throw DataError("malformed ARPA entry '" + line + "'");
      }
      Entry entry;
      entry.log10_prob = parse_double(f[0], "ARPA entry");
      if (f.size() == 3) {
        entry.has_bow = true;
        entry.log10_bow = parse_double(f[2], "ARPA entry");
      }
      Sentence words = split_tokens(f[1]);
      if (static_cast<int>(words.size()) != n) {
        throw DataError("ARPA entry of wrong order '" + line + "'");
      }
      std::vector<WordId> key;
      for (const Token& w : words) {
        if (n == 1) {
          if (lm.ids_.count(w)) throw DataError("duplicate unigram '" + w + "'");
          key.push_back(lm.intern(w));
        } else {
          auto it = lm.ids_.find(w);
          if (it == lm.ids_.end()) {
            throw DataError("n-gram uses unknown word '" + w + "'");
          }
          key.push_back(it->second);
        }
      }
      if (!lm.table_.emplace(std::move(key), entry).second) {
        throw DataError("duplicate ARPA entry '" + line + "'");
      }
    }
  }
  do next_line(line); while (line.empty());
  if (line != "\\end\\") throw DataError("missing \\end\\ marker");
  lm.finalize_vocabulary();
  return lm;
}

}  // namespace ncdoc
