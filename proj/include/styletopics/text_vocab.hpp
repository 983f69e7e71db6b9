#pragma once

// Bag-of-words text documents from item titles and attributes.

#include <cctype>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "styletopics/documents.hpp"
#include "styletopics/errors.hpp"

namespace styletopics {

using Stopwords = std::unordered_set<std::string>;

struct ItemText {
  std::string item_id;
  std::string title;
  std::vector<std::string> attributes;
};

namespace detail {

inline bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

inline void append_words(std::string_view text, const Stopwords& stopwords, std::vector<std::string>& out) {
  std::string word;
  auto flush = [&] {
    if (word.size() > 1 && !stopwords.contains(word)) out.push_back(word);
    word.clear();
  };
  for (char c : text) {
    if (is_word_char(c))
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else
      flush();
  }
  flush();
}

}  // namespace detail

// Lowercased ASCII alphanumeric runs of length >= 2 that are not stopwords.
// Duplicates are kept in occurrence order: title first, then attributes.
inline TextDocument tokenize_item(std::string item_id, std::string_view title,
                                  const std::vector<std::string>& attributes, const Stopwords& stopwords) {
  TextDocument doc{std::move(item_id), {}};
  detail::append_words(title, stopwords, doc.tokens);
  for (const auto& a : attributes) detail::append_words(a, stopwords, doc.tokens);
  return doc;
}

// One word per line; lines are trimmed and lowercased, blanks and '#' lines skipped.
inline Stopwords read_stopwords(std::istream& in) {
  Stopwords words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string w = line.substr(b, e - b + 1);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(std::move(w));
  }
  return words;
}

namespace detail {

// Splits one delimited record, honoring double-quoted fields ("" escapes a quote).
inline std::vector<std::string> split_delimited(std::string_view line, char delim, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back().push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"' && fields.back().empty()) {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  return fields;
}

}  // namespace detail

// Reads an item table with columns item_id, title, attributes (attributes
// '|'-separated). The delimiter is TAB if the first non-empty line contains
// one, otherwise comma. A first row whose first field is "item_id" is a header.
inline std::vector<ItemText> read_item_table(std::istream& in) {
  std::vector<ItemText> items;
  std::string line;
  std::size_t line_no = 0;
  char delim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const bool first = delim == 0;
    if (first) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    auto fields = detail::split_delimited(line, delim, line_no);
    if (first && fields[0] == "item_id") continue;
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError(line_no, "expected columns item_id, title, attributes");
    if (fields[0].empty()) throw ParseError(line_no, "empty item_id");
    ItemText item{std::move(fields[0]), std::move(fields[1]), {}};
    if (fields.size() == 3) {
      std::string_view attrs = fields[2];
      std::size_t pos = 0;
      while (pos <= attrs.size()) {
        const auto bar = attrs.find('|', pos);
        const auto stop = bar == std::string_view::npos ? attrs.size() : bar;
        if (stop > pos) item.attributes.emplace_back(attrs.substr(pos, stop - pos));
        pos = stop + 1;
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<TextDocument> build_text_documents(const std::vector<ItemText>& items,
                                                      const Stopwords& stopwords) {
  std::vector<TextDocument> docs;
  docs.reserve(items.size());
  for (const auto& item : items) docs.push_back(tokenize_item(item.item_id, item.title, item.attributes, stopwords));
  return docs;
}

}  // namespace styletopics
