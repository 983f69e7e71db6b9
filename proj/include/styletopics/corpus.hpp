#pragma once

// Integer-encoded corpora: single-language (LDA) and aligned tuples (PolyLDA).

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "styletopics/documents.hpp"
#include "styletopics/errors.hpp"

namespace styletopics {

using WordId = std::uint32_t;
using WordSeq = std::vector<WordId>;

// Token <-> id bijection; ids are assigned in order of first appearance.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens) {
    for (auto& t : tokens) {
      if (!ids_.emplace(t, static_cast<WordId>(tokens_.size())).second)
        throw ValidationError("duplicate vocabulary token '" + t + "'");
      tokens_.push_back(std::move(t));
    }
  }

  WordId intern(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, static_cast<WordId>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::optional<WordId> find(const std::string& token) const {
    const auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(WordId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, WordId> ids_;
};

struct Corpus {
  Vocabulary vocab;
  std::vector<std::string> doc_ids;
  std::vector<WordSeq> docs;

  std::size_t num_docs() const noexcept { return docs.size(); }
  std::size_t vocab_size() const noexcept { return vocab.size(); }
  std::size_t num_tokens() const noexcept {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
  }
};

inline Corpus encode_corpus(const std::vector<Document>& documents) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    if (!seen.insert(doc.item_id).second) throw ValidationError("duplicate document id '" + doc.item_id + "'");
    corpus.doc_ids.push_back(doc.item_id);
    WordSeq& words = corpus.docs.emplace_back();
    words.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) words.push_back(corpus.vocab.intern(t));
  }
  return corpus;
}

// Parses TAB-format lines; a duplicated document id is reported with its line.
inline Corpus encode_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    Document doc = parse_document_line(line, line_no);
    if (!seen.insert(doc.item_id).second) throw ParseError(line_no, "duplicate document id '" + doc.item_id + "'");
    corpus.doc_ids.push_back(std::move(doc.item_id));
    WordSeq& words = corpus.docs.emplace_back();
    for (const auto& t : doc.tokens) words.push_back(corpus.vocab.intern(t));
  }
  return corpus;
}

// Aligned document tuples: slot l of tuple i holds item i's document in
// language l (possibly empty).
struct TupleCorpus {
  std::vector<Vocabulary> vocabs;
  std::vector<std::string> item_ids;
  std::vector<std::vector<WordSeq>> tuples;  // [tuple][language]

  std::size_t num_languages() const noexcept { return vocabs.size(); }
  std::size_t num_tuples() const noexcept { return tuples.size(); }
};

// One document list per language. Tuples are keyed by item_id; item order is
// first appearance scanning the languages in order.
inline TupleCorpus align_tuples(const std::vector<std::vector<Document>>& languages) {
  if (languages.empty()) throw ValidationError("polylingual corpus needs at least one language");
  const std::size_t L = languages.size();
  TupleCorpus corpus;
  corpus.vocabs.resize(L);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t l = 0; l < L; ++l) {
    std::unordered_set<std::string> seen;
    for (const auto& doc : languages[l]) {
      if (!seen.insert(doc.item_id).second)
        throw ValidationError("duplicate item_id '" + doc.item_id + "' in language " + std::to_string(l));
      auto [it, inserted] = index.try_emplace(doc.item_id, corpus.tuples.size());
      if (inserted) {
        corpus.item_ids.push_back(doc.item_id);
        corpus.tuples.emplace_back(L);
      }
      WordSeq& words = corpus.tuples[it->second][l];
      for (const auto& t : doc.tokens) words.push_back(corpus.vocabs[l].intern(t));
    }
  }
  return corpus;
}

// Wraps a single-language corpus as an L=1 tuple corpus.
inline TupleCorpus as_tuple_corpus(const Corpus& corpus) {
  TupleCorpus t;
  t.vocabs = {corpus.vocab};
  t.item_ids = corpus.doc_ids;
  for (const auto& d : corpus.docs) t.tuples.push_back({d});
  return t;
}

}  // namespace styletopics
