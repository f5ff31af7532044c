// cli.cc
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

#include "ncdoc/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncdoc/channel.h"
#include "ncdoc/corpus.h"
#include "ncdoc/decoder.h"
#include "ncdoc/error.h"
#include "ncdoc/eval.h"
#include "ncdoc/lm.h"
#include "ncdoc/parallel.h"
#include "ncdoc/proposal.h"
#include "ncdoc/synth.h"
#include "ncdoc/tuning.h"

namespace ncdoc {
namespace {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string weights = "1,1,0,1";
  std::size_t beam = 5;
  std::size_t nbest = 50;
  std::uint64_t seed = 1;
  unsigned threads = default_thread_count();

  // paths
  std::string docs, eval_docs, out, src, tgt, src_docs, tgt_docs;
  std::string source, reference, candidates, lm, channel, table, output_docs;
  std::string annotations, variant_source, variant_candidates, out_dir;
  std::vector<std::string> hyp_refs, candidate_files;
  std::string hyp;

  // model options
  int order = 4;
  double discount = 0.75;
  bool sentence_reset = false;
  int iterations = 5;
  bool exhaustive = false;
  bool lowercase = false;
  bool smooth = false;
  std::string mode = "doc";
  std::string lambda1_values, lambda2_values, lambda3_values;
  std::size_t vary_slot = 0, watch_slot = 1;

  // synth
  std::size_t num_docs = 100, sentences = 5, content_vocab = 40, lemmas = 3;
  double ambiguity = 0.5;
  std::string mix = "0.25,0.25,0.25,0.25";
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": invalid number '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError(flag + ": empty list");
  return values;
}

// Writes to `path`, or to `fallback` when the path is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<Lattice> load_lattices(const RunConfig& cfg, const std::string& path,
                                   const std::vector<Document>& source) {
  std::vector<Lattice> lattices = load_nbest(path, source);
  for (Lattice& l : lattices) l = truncate_lattice(std::move(l), cfg.nbest);
  return lattices;
}

int cmd_train_lm(const RunConfig& cfg, std::ostream& out) {
  std::vector<Document> docs = load_document_corpus(cfg.docs);
  NGramOptions options;
  options.order = cfg.order;
  options.discount = cfg.discount;
  options.sentence_reset = cfg.sentence_reset;
  NGramLM lm = NGramLM::train(docs, options);
  lm.save(cfg.out);
  ordered_json report;
  report["model"] = cfg.out;
  report["order"] = lm.order();
  report["discount"] = lm.discount();
  report["sentence_reset"] = lm.sentence_reset();
  report["vocabulary"] = lm.vocabulary().size();
  if (!cfg.eval_docs.empty()) {
    PerplexityReport ppl = perplexity_per_word(lm, load_document_corpus(cfg.eval_docs));
    report["perplexity"] = ppl.perplexity;
    report["events"] = ppl.events;
    report["words"] = ppl.words;
    report["convention"] = ppl.convention;
  }
  out << report.dump() << '\n';
  return kExitOk;
}

int cmd_train_channel(const RunConfig& cfg, std::ostream& out) {
  ParallelSentenceCorpus corpus;
  if (!cfg.src.empty() || !cfg.tgt.empty()) {
    corpus = load_parallel_sentences(cfg.src, cfg.tgt);
  } else if (!cfg.src_docs.empty() && !cfg.tgt_docs.empty()) {
    corpus = flatten(zip_parallel_documents(load_document_corpus(cfg.src_docs),
                                            load_document_corpus(cfg.tgt_docs)));
  } else {
    throw UsageError("train-channel needs --src/--tgt or --src-docs/--tgt-docs");
  }
  IBM1Model model = IBM1Model::train(corpus, cfg.iterations);
  model.save(cfg.out);
  ordered_json report;
  report["model"] = cfg.out;
  report["pairs"] = corpus.pairs.size();
  report["log_likelihood"] = model.log_likelihood();
  out << report.dump() << '\n';
  return kExitOk;
}

int cmd_decode(const RunConfig& cfg, bool sentence_mode, std::ostream& out) {
  const Weights weights = parse_weights(cfg.weights);
  std::vector<Document> source = load_document_corpus(cfg.source);
  std::vector<Lattice> lattices = load_lattices(cfg, cfg.candidates, source);
  NGramLM lm = NGramLM::load(cfg.lm);
  IBM1Model channel = IBM1Model::load(cfg.channel);
  DecodeMode mode = sentence_mode     ? DecodeMode::kSentence
                    : cfg.exhaustive ? DecodeMode::kExhaustive
                                     : DecodeMode::kDocument;
  std::vector<DecodeResult> results =
      decode_corpus(lattices, lm, channel, weights, mode, cfg.beam, cfg.threads);
  Output records(cfg.out, out);
  for (const DecodeResult& r : results) {
    *records << decode_result_record(r, weights) << '\n';
  }
  if (!cfg.output_docs.empty()) save_document_corpus(cfg.output_docs, outputs(results));
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  std::vector<Document> source = load_document_corpus(cfg.source);
  ParallelDocumentCorpus dev =
      zip_parallel_documents(source, load_document_corpus(cfg.reference));
  std::vector<Lattice> lattices = load_lattices(cfg, cfg.candidates, source);
  NGramLM lm = NGramLM::load(cfg.lm);
  IBM1Model channel = IBM1Model::load(cfg.channel);
  GridSpec grid;
  if (!cfg.lambda1_values.empty()) {
    grid.lambda1_values = parse_list(cfg.lambda1_values, "--lambda1-values");
  }
  if (!cfg.lambda2_values.empty()) {
    grid.lambda2_values = parse_list(cfg.lambda2_values, "--lambda2-values");
  }
  if (!cfg.lambda3_values.empty()) {
    grid.lambda3_values = parse_list(cfg.lambda3_values, "--lambda3-values");
  }
  TuningOptions options;
  options.beam = cfg.beam;
  options.threads = cfg.threads;
  options.metric = bleu_metric({cfg.lowercase, cfg.smooth});
  TuningResult result = grid_search(dev, lattices, lm, channel, grid, options);
  if (!cfg.table.empty()) {
    Output table(cfg.table, out);
    write_grid_table(*table, result);
  }
  ordered_json report;
  report["weights"] = format_weights(result.best);
  report["bleu"] = result.metric;
  report["grid_points"] = result.table.size();
  out << report.dump() << '\n';
  return kExitOk;
}

int cmd_eval_bleu(const RunConfig& cfg, std::ostream& out) {
  std::vector<Document> hyps = load_document_corpus(cfg.hyp);
  std::vector<std::vector<Document>> refs;
  for (const std::string& path : cfg.hyp_refs) refs.push_back(load_document_corpus(path));
  BleuReport report = corpus_bleu(hyps, refs, {cfg.lowercase, cfg.smooth});
  ordered_json j = ordered_json::parse(bleu_report_record(report));
  if (!cfg.annotations.empty()) {
    std::vector<Annotation> annotations = load_annotations(cfg.annotations);
    j["consistency_accuracy"] = consistency_accuracy(hyps, annotations);
    j["annotations"] = annotations.size();
  }
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_analyze_diversity(const RunConfig& cfg, std::ostream& out) {
  std::vector<Document> source = load_document_corpus(cfg.source);
  std::vector<std::vector<Lattice>> pools;
  for (const std::string& path : cfg.candidate_files) {
    pools.push_back(load_lattices(cfg, path, source));
  }
  const BleuOptions options{cfg.lowercase, cfg.smooth};
  ordered_json j;
  auto& per_pool = j["pools"] = ordered_json::array();
  for (std::size_t p = 0; p < pools.size(); ++p) {
    ordered_json e;
    e["file"] = cfg.candidate_files[p];
    e["pairwise_bleu"] = lattice_pairwise_bleu(pools[p], options);
    per_pool.push_back(std::move(e));
  }
  std::vector<Lattice> merged;
  for (std::size_t d = 0; d < source.size(); ++d) {
    std::vector<Lattice> parts;
    for (const auto& pool : pools) parts.push_back(pool[d]);
    merged.push_back(merge_expert_pools(parts, cfg.nbest));
  }
  j["merged_pairwise_bleu"] = lattice_pairwise_bleu(merged, options);
  j["pool_size"] = cfg.nbest;
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_oracle_pick(const RunConfig& cfg, std::ostream& out) {
  const Weights weights = parse_weights(cfg.weights);
  std::vector<Document> source = load_document_corpus(cfg.source);
  std::vector<Document> refs = load_document_corpus(cfg.reference);
  ParallelDocumentCorpus paired = zip_parallel_documents(source, refs);
  std::vector<Lattice> lattices = load_lattices(cfg, cfg.candidates, source);
  // Missing references enter one nat below the document's worst candidate.
  for (std::size_t d = 0; d < lattices.size(); ++d) {
    double worst = 0.0;
    for (const CandidateSet& slot : lattices[d].slots) {
      for (const Candidate& c : slot) worst = std::min(worst, c.proposal_logprob);
    }
    lattices[d] = inject_references(
        lattices[d], paired.docs[d].target,
        [worst](const Sentence&, const Sentence&) { return worst - 1.0; }, cfg.nbest);
  }
  NGramLM lm = NGramLM::load(cfg.lm);
  IBM1Model channel = IBM1Model::load(cfg.channel);
  DecodeMode mode;
  Weights w = weights;
  if (cfg.mode == "doc") {
    mode = DecodeMode::kDocument;
  } else if (cfg.mode == "sent") {
    mode = DecodeMode::kSentence;
  } else if (cfg.mode == "proposal") {
    mode = DecodeMode::kSentence;
    w = Weights{1.0, 0.0, 0.0, 0.0};
  } else {
    throw UsageError("--mode must be doc, sent or proposal");
  }
  std::vector<DecodeResult> results =
      decode_corpus(lattices, lm, channel, w, mode, cfg.beam, cfg.threads);
  std::vector<std::vector<std::size_t>> choices;
  for (const DecodeResult& r : results) choices.push_back(r.chosen);
  ordered_json j;
  j["mode"] = cfg.mode;
  j["pick_ratio"] = oracle_pick_ratio(lattices, refs, choices);
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_synth_gen(const RunConfig& cfg, std::ostream& out) {
  SynthConfig sc;
  sc.num_docs = cfg.num_docs;
  sc.sentences_per_doc = cfg.sentences;
  sc.content_vocab = cfg.content_vocab;
  sc.lemmas_per_phenomenon = cfg.lemmas;
  sc.ambiguity_rate = cfg.ambiguity;
  sc.seed = cfg.seed;
  std::vector<double> mix = parse_list(cfg.mix, "--mix");
  if (mix.size() != 4) throw UsageError("--mix expects four fractions");
  sc.mix = {mix[0], mix[1], mix[2], mix[3]};
  SynthCorpus synth = generate_corpus(sc);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  save_document_corpus((dir / "source.docs").string(), sources(synth.corpus));
  save_document_corpus((dir / "target.docs").string(), targets(synth.corpus));
  {
    Output src((dir / "source.sents").string(), out);
    Output tgt((dir / "target.sents").string(), out);
    for (const SentencePair& p : flatten(synth.corpus).pairs) {
      *src << join_tokens(p.source) << '\n';
      *tgt << join_tokens(p.target) << '\n';
    }
  }
  {
    Output ann((dir / "annotations.jsonl").string(), out);
    write_annotations(*ann, synth.annotations);
  }
  std::vector<Lattice> lattices;
  for (const DocumentPair& pair : synth.corpus.docs) {
    lattices.push_back(make_ambiguous_lattice(pair, synth.annotations, cfg.nbest,
                                              cfg.seed));
  }
  save_nbest((dir / "nbest.jsonl").string(), lattices);
  ordered_json j;
  j["documents"] = synth.corpus.docs.size();
  j["annotations"] = synth.annotations.size();
  j["out_dir"] = cfg.out_dir;
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_probe(const RunConfig& cfg, std::ostream& out) {
  const Weights weights = parse_weights(cfg.weights);
  std::vector<Lattice> base =
      load_lattices(cfg, cfg.candidates, load_document_corpus(cfg.source));
  std::vector<Lattice> variant = load_lattices(
      cfg, cfg.variant_candidates, load_document_corpus(cfg.variant_source));
  if (base.size() != 1 || variant.size() != 1) {
    throw DataError("probe-dependency expects exactly one document per input");
  }
  NGramLM lm = NGramLM::load(cfg.lm);
  IBM1Model channel = IBM1Model::load(cfg.channel);
  DependencyReport r = posterior_dependency_probe(
      base[0], variant[0], lm, channel, weights, cfg.beam, cfg.vary_slot,
      cfg.watch_slot);
  ordered_json j;
  j["watch_slot"] = r.watch_slot;
  j["base_choice"] = r.base_choice;
  j["variant_choice"] = r.variant_choice;
  j["base_tokens"] = join_tokens(r.base_tokens);
  j["variant_tokens"] = join_tokens(r.variant_tokens);
  j["changed"] = r.changed;
  out << j.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Document-level noisy-channel reranking toolkit"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto decoding_flags = [&](CLI::App* sub) {
    sub->add_option("--weights", cfg.weights, "l1,l2,l3[,llm]")->capture_default_str();
    sub->add_option("--beam", cfg.beam, "Beam size B")->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--nbest", cfg.nbest, "Candidates per sentence K")
        ->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* train_lm = app.add_subcommand("train-lm", "Train an n-gram document LM");
  train_lm->add_option("--docs", cfg.docs, "Training documents")->required();
  train_lm->add_option("--out", cfg.out, "Output ARPA path")->required();
  train_lm->add_option("--order", cfg.order)->capture_default_str();
  train_lm->add_option("--discount", cfg.discount)->capture_default_str();
  train_lm->add_flag("--sentence-reset", cfg.sentence_reset,
                     "Reset context at sentence ends (sentence LM)");
  train_lm->add_option("--eval", cfg.eval_docs, "Report perplexity on these documents");

  auto* train_channel = app.add_subcommand("train-channel", "Train IBM Model 1");
  train_channel->add_option("--src", cfg.src, "Source sentences, one per line");
  train_channel->add_option("--tgt", cfg.tgt, "Target sentences, one per line");
  train_channel->add_option("--src-docs", cfg.src_docs, "Source documents");
  train_channel->add_option("--tgt-docs", cfg.tgt_docs, "Target documents");
  train_channel->add_option("--iterations", cfg.iterations)->capture_default_str();
  train_channel->add_option("--out", cfg.out, "Output ttable")->required();

  auto add_decode = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--source", cfg.source, "Source documents")->required();
    sub->add_option("--candidates", cfg.candidates, "n-best records")->required();
    sub->add_option("--lm", cfg.lm, "Language model")->required();
    sub->add_option("--channel", cfg.channel, "Channel model")->required();
    sub->add_option("--out", cfg.out, "Decode records (default stdout)");
    sub->add_option("--output-docs", cfg.output_docs, "Decoded documents");
    decoding_flags(sub);
    return sub;
  };
  auto* decode = add_decode("decode", "Document-level beam search reranking");
  decode->add_flag("--exhaustive", cfg.exhaustive, "Score every path");
  auto* sent = add_decode("sent-rerank", "Independent per-sentence reranking");

  auto* tune = app.add_subcommand("tune", "Grid search over the weights");
  tune->add_option("--source", cfg.source)->required();
  tune->add_option("--reference", cfg.reference)->required();
  tune->add_option("--candidates", cfg.candidates)->required();
  tune->add_option("--lm", cfg.lm)->required();
  tune->add_option("--channel", cfg.channel)->required();
  tune->add_option("--table", cfg.table, "Write the full grid table (TSV)");
  tune->add_option("--lambda1-values", cfg.lambda1_values);
  tune->add_option("--lambda2-values", cfg.lambda2_values);
  tune->add_option("--lambda3-values", cfg.lambda3_values);
  tune->add_flag("--lowercase", cfg.lowercase);
  tune->add_flag("--smooth", cfg.smooth);
  decoding_flags(tune);

  auto* bleu = app.add_subcommand("eval-bleu", "Corpus BLEU and consistency");
  bleu->add_option("--hyp", cfg.hyp)->required();
  bleu->add_option("--ref", cfg.hyp_refs, "Reference documents (repeatable)")->required();
  bleu->add_option("--annotations", cfg.annotations, "Consistency annotations");
  bleu->add_flag("--lowercase", cfg.lowercase);
  bleu->add_flag("--smooth", cfg.smooth);

  auto* diversity = app.add_subcommand("analyze-diversity", "Pairwise BLEU of pools");
  diversity->add_option("--source", cfg.source)->required();
  diversity->add_option("--candidates", cfg.candidate_files, "One file per expert")
      ->required();
  diversity->add_option("--nbest", cfg.nbest)->capture_default_str();
  diversity->add_flag("--smooth", cfg.smooth);
  diversity->add_flag("--lowercase", cfg.lowercase);

  auto* pick = app.add_subcommand("oracle-pick", "Reference pick ratio");
  pick->add_option("--source", cfg.source)->required();
  pick->add_option("--reference", cfg.reference)->required();
  pick->add_option("--candidates", cfg.candidates)->required();
  pick->add_option("--lm", cfg.lm)->required();
  pick->add_option("--channel", cfg.channel)->required();
  pick->add_option("--mode", cfg.mode, "doc, sent or proposal")->capture_default_str();
  decoding_flags(pick);

  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic corpus");
  synth->add_option("--out-dir", cfg.out_dir)->required();
  synth->add_option("--docs", cfg.num_docs)->capture_default_str();
  synth->add_option("--sentences", cfg.sentences)->capture_default_str();
  synth->add_option("--content-vocab", cfg.content_vocab)->capture_default_str();
  synth->add_option("--lemmas", cfg.lemmas)->capture_default_str();
  synth->add_option("--ambiguity", cfg.ambiguity)->capture_default_str();
  synth->add_option("--mix", cfg.mix, "number,tense,lexical,pronoun")->capture_default_str();
  synth->add_option("--nbest", cfg.nbest, "Candidates per sentence")->capture_default_str();

  auto* probe = app.add_subcommand("probe-dependency",
                                   "Show cross-sentence coupling of the decoder");
  probe->add_option("--source", cfg.source)->required();
  probe->add_option("--candidates", cfg.candidates)->required();
  probe->add_option("--variant-source", cfg.variant_source)->required();
  probe->add_option("--variant-candidates", cfg.variant_candidates)->required();
  probe->add_option("--lm", cfg.lm)->required();
  probe->add_option("--channel", cfg.channel)->required();
  probe->add_option("--vary-slot", cfg.vary_slot)->capture_default_str();
  probe->add_option("--watch-slot", cfg.watch_slot)->capture_default_str();
  decoding_flags(probe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_lm->parsed()) return cmd_train_lm(cfg, out);
    if (train_channel->parsed()) return cmd_train_channel(cfg, out);
    if (decode->parsed()) return cmd_decode(cfg, false, out);
    if (sent->parsed()) return cmd_decode(cfg, true, out);
    if (tune->parsed()) return cmd_tune(cfg, out);
    if (bleu->parsed()) return cmd_eval_bleu(cfg, out);
    if (diversity->parsed()) return cmd_analyze_diversity(cfg, out);
    if (pick->parsed()) return cmd_oracle_pick(cfg, out);
    if (synth->parsed()) return cmd_synth_gen(cfg, out);
    if (probe->parsed()) return cmd_probe(cfg, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << ordered_json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << ordered_json{{"error", "data"}, {"message", e.what()}}.dump() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << ordered_json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return kExitInternal;
  }
}

}  // namespace ncdoc
