// cli_test.cc
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ncdoc/cli.h"

namespace ncdoc {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ncdoc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ncdoc_cli_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

TEST_CASE("cli: usage errors") {
  Run r = run({"frobnicate"});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE((r.out + r.err).empty());
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"decode", "--source", "x"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("cli: data errors") {
  TempDir dir;
  Run r = run({"train-lm", "--docs", dir / "missing.docs", "--out", dir / "lm.arpa"});
  CHECK(r.code == kExitData);
  auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "data");
}

TEST_CASE("cli: synthetic pipeline end to end") {
  TempDir dir;
  REQUIRE(run({"synth-gen", "--out-dir", dir / "syn", "--docs", "20", "--nbest", "6",
               "--seed", "3"}).code == kExitOk);
  for (const char* f : {"source.docs", "target.docs", "source.sents", "target.sents",
                        "annotations.jsonl", "nbest.jsonl"}) {
    CHECK(fs::exists(dir.path / "syn" / f));
  }
  const std::string syn = dir / "syn";
  Run lm = run({"train-lm", "--docs", syn + "/target.docs", "--order", "3", "--out",
                dir / "lm.arpa", "--eval", syn + "/target.docs"});
  REQUIRE(lm.code == kExitOk);
  CHECK(nlohmann::json::parse(lm.out).contains("perplexity"));
  REQUIRE(run({"train-channel", "--src", syn + "/source.sents", "--tgt",
               syn + "/target.sents", "--out", dir / "ch.tsv"}).code == kExitOk);

  std::vector<std::string> decode{"decode", "--source", syn + "/source.docs",
                                  "--candidates", syn + "/nbest.jsonl", "--lm",
                                  dir / "lm.arpa", "--channel", dir / "ch.tsv",
                                  "--weights", "1,1,0", "--nbest", "6"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = decode;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  Run d1 = run(with({"--out", dir / "r1.jsonl", "--output-docs", dir / "out1.docs",
                     "--threads", "1"}));
  REQUIRE(d1.code == kExitOk);
  Run d4 = run(with({"--out", dir / "r4.jsonl", "--output-docs", dir / "out4.docs",
                     "--threads", "4"}));
  REQUIRE(d4.code == kExitOk);
  CHECK(slurp(dir.path / "r1.jsonl") == slurp(dir.path / "r4.jsonl"));
  CHECK(slurp(dir.path / "out1.docs") == slurp(dir.path / "out4.docs"));
  std::istringstream records(slurp(dir.path / "r1.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(records, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("final_score"));
    CHECK(j.contains("breakdowns"));
    ++count;
  }
  CHECK(count == 20);

  Run bleu = run({"eval-bleu", "--hyp", dir / "out1.docs", "--ref", syn + "/target.docs",
                  "--annotations", syn + "/annotations.jsonl"});
  REQUIRE(bleu.code == kExitOk);
  auto j = nlohmann::json::parse(bleu.out);
  CHECK(j.contains("consistency_accuracy"));
  CHECK(j["consistency_accuracy"].get<double>() >= 0.9);

  Run sent = run({"sent-rerank", "--source", syn + "/source.docs", "--candidates",
                  syn + "/nbest.jsonl", "--lm", dir / "lm.arpa", "--channel",
                  dir / "ch.tsv", "--output-docs", dir / "sent.docs"});
  CHECK(sent.code == kExitOk);

  Run pick = run({"oracle-pick", "--source", syn + "/source.docs", "--reference",
                  syn + "/target.docs", "--candidates", syn + "/nbest.jsonl", "--lm",
                  dir / "lm.arpa", "--channel", dir / "ch.tsv", "--mode", "proposal"});
  CHECK(pick.code == kExitOk);
  CHECK(run({"oracle-pick", "--source", syn + "/source.docs", "--reference",
             syn + "/target.docs", "--candidates", syn + "/nbest.jsonl", "--lm",
             dir / "lm.arpa", "--channel", dir / "ch.tsv", "--mode", "bogus"})
            .code == kExitUsage);

  Run div = run({"analyze-diversity", "--source", syn + "/source.docs", "--candidates",
                 syn + "/nbest.jsonl", "--nbest", "6", "--smooth"});
  CHECK(div.code == kExitOk);

  Run tune = run({"tune", "--source", syn + "/source.docs", "--reference",
                  syn + "/target.docs", "--candidates", syn + "/nbest.jsonl", "--lm",
                  dir / "lm.arpa", "--channel", dir / "ch.tsv", "--lambda1-values",
                  "1,2", "--lambda2-values", "1", "--lambda3-values", "0.2",
                  "--table", dir / "grid.tsv"});
  CHECK(tune.code == kExitOk);
  CHECK(slurp(dir.path / "grid.tsv").rfind("lambda1\tlambda2\tlambda3\tbleu", 0) == 0);
}

TEST_CASE("cli: config file with flag override") {
  TempDir dir;
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "seed = 5\n[synth-gen]\ndocs = 4\nsentences = 3\nout-dir = \""
        << (dir / "a") << "\"\n";
  }
  Run a = run({"--config", dir / "run.toml", "synth-gen"});
  REQUIRE(a.code == kExitOk);
  CHECK(nlohmann::json::parse(a.out)["documents"] == 4);
  Run b = run({"--config", dir / "run.toml", "synth-gen", "--docs", "6", "--out-dir",
               dir / "b"});
  REQUIRE(b.code == kExitOk);
  CHECK(nlohmann::json::parse(b.out)["documents"] == 6);
}

}  // namespace
}  // namespace ncdoc
