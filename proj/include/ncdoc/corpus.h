// corpus.h
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
// Tokenized documents and parallel corpora.
//
// Document corpus text format: one sentence per line with space-separated
// tokens; documents are separated by a single blank line. A line of the form
// "# <doc_id>" may open a document; otherwise the id defaults to "doc<index>".

#ifndef NCDOC_CORPUS_H_
#define NCDOC_CORPUS_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ncdoc {

using Token = std::string;
using Sentence = std::vector<Token>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;
};

struct SentencePair {
  Sentence source;
  Sentence target;
};

struct ParallelSentenceCorpus {
  std::vector<SentencePair> pairs;
};

struct DocumentPair {
  Document source;
  Document target;
};

struct ParallelDocumentCorpus {
  std::vector<DocumentPair> docs;
};

// Splits on ASCII whitespace; runs of whitespace never yield empty tokens.
Sentence split_tokens(std::string_view line);
std::string join_tokens(const Sentence& sentence);

std::vector<Document> read_document_corpus(std::istream& in);
std::vector<Document> load_document_corpus(const std::string& path);
void write_document_corpus(std::ostream& out, const std::vector<Document>& docs);
void save_document_corpus(const std::string& path,
                          const std::vector<Document>& docs);

ParallelSentenceCorpus read_parallel_sentences(std::istream& src,
                                               std::istream& tgt);
ParallelSentenceCorpus load_parallel_sentences(const std::string& src_path,
                                               const std::string& tgt_path);

// Pairs documents positionally. Sentence counts must agree per pair.
ParallelDocumentCorpus zip_parallel_documents(const std::vector<Document>& src,
                                              const std::vector<Document>& tgt);

// Every sentence pair of a document corpus, in order.
ParallelSentenceCorpus flatten(const ParallelDocumentCorpus& corpus);

std::vector<Document> sources(const ParallelDocumentCorpus& corpus);
std::vector<Document> targets(const ParallelDocumentCorpus& corpus);

std::size_t token_count(const Document& doc);

}  // namespace ncdoc

#endif  // NCDOC_CORPUS_H_
