// corpus.cc
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

#include "ncdoc/corpus.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "ncdoc/error.h"

namespace ncdoc {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (!is_space(c)) return false;
  }
  return true;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

Sentence split_tokens(std::string_view line) {
  Sentence tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string join_tokens(const Sentence& sentence) {
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i) out += ' ';
    out += sentence[i];
  }
  return out;
}

std::vector<Document> read_document_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  Document current;
  bool open = false;  // a header or sentence has been read for `current`
  std::size_t line_no = 0;

  auto finish = [&]() {
    if (current.sentences.empty()) {
      throw DataError("document '" + current.id + "' ending at line " +
                      std::to_string(line_no) + " has no sentences");
    }
    if (!seen.insert(current.id).second) {
      throw DataError("duplicate doc_id '" + current.id + "'");
    }
    docs.push_back(std::move(current));
    current = Document{};
    open = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      if (!open) {
        throw DataError("empty document at line " + std::to_string(line_no));
      }
      finish();
      continue;
    }
    if (line.size() >= 2 && line[0] == '#' && line[1] == ' ') {
      if (open) {
        throw DataError("doc_id header inside a document at line " +
                        std::to_string(line_no));
      }
      Sentence id = split_tokens(std::string_view(line).substr(2));
      if (id.size() != 1) {
        throw DataError("malformed doc_id header at line " +
                        std::to_string(line_no));
      }
      current.id = id[0];
      open = true;
      continue;
    }
    if (!open) current.id = "doc" + std::to_string(docs.size());
    open = true;
    current.sentences.push_back(split_tokens(line));
  }
  if (open) finish();
  return docs;
}

std::vector<Document> load_document_corpus(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return read_document_corpus(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_document_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d) out << '\n';
    out << "# " << docs[d].id << '\n';
    for (const Sentence& s : docs[d].sentences) out << join_tokens(s) << '\n';
  }
}

void save_document_corpus(const std::string& path,
                          const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_document_corpus(out, docs);
}

ParallelSentenceCorpus read_parallel_sentences(std::istream& src,
                                               std::istream& tgt) {
  ParallelSentenceCorpus corpus;
  std::string src_line, tgt_line;
  std::size_t line_no = 0;
  while (true) {
    bool has_src = static_cast<bool>(std::getline(src, src_line));
    bool has_tgt = static_cast<bool>(std::getline(tgt, tgt_line));
    if (!has_src && !has_tgt) break;
    ++line_no;
    if (has_src != has_tgt) {
      throw DataError("line-count mismatch between source and target (" +
                      std::string(has_src ? "target" : "source") +
                      " ends at line " + std::to_string(line_no - 1) + ")");
    }
    SentencePair pair{split_tokens(src_line), split_tokens(tgt_line)};
    if (pair.source.empty() || pair.target.empty()) {
      throw DataError("empty sentence at line " + std::to_string(line_no));
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

ParallelSentenceCorpus load_parallel_sentences(const std::string& src_path,
                                               const std::string& tgt_path) {
  std::ifstream src = open_input(src_path);
  std::ifstream tgt = open_input(tgt_path);
  return read_parallel_sentences(src, tgt);
}

ParallelDocumentCorpus zip_parallel_documents(const std::vector<Document>& src,
                                              const std::vector<Document>& tgt) {
  if (src.size() != tgt.size()) {
    throw DataError("document-count mismatch: " + std::to_string(src.size()) +
                    " source vs " + std::to_string(tgt.size()) + " target");
  }
  ParallelDocumentCorpus corpus;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].sentences.size() != tgt[i].sentences.size()) {
      throw DataError("sentence-count mismatch in document '" + src[i].id +
                      "': " + std::to_string(src[i].sentences.size()) +
                      " vs " + std::to_string(tgt[i].sentences.size()));
    }
    corpus.docs.push_back({src[i], tgt[i]});
  }
  return corpus;
}

ParallelSentenceCorpus flatten(const ParallelDocumentCorpus& corpus) {
  ParallelSentenceCorpus out;
  for (const DocumentPair& pair : corpus.docs) {
    for (std::size_t i = 0; i < pair.source.sentences.size(); ++i) {
      out.pairs.push_back({pair.source.sentences[i], pair.target.sentences[i]});
    }
  }
  return out;
}

std::vector<Document> sources(const ParallelDocumentCorpus& corpus) {
  std::vector<Document> out;
  out.reserve(corpus.docs.size());
  for (const DocumentPair& p : corpus.docs) out.push_back(p.source);
  return out;
}

std::vector<Document> targets(const ParallelDocumentCorpus& corpus) {
  std::vector<Document> out;
  out.reserve(corpus.docs.size());
  for (const DocumentPair& p : corpus.docs) out.push_back(p.target);
  return out;
}

std::size_t token_count(const Document& doc) {
  std::size_t n = 0;
  for (const Sentence& s : doc.sentences) n += s.size();
  return n;
}

}  // namespace ncdoc
