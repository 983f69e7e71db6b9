#pragma once

// Item documents and the TAB document file format shared by visual and text
// documents: one line per item, "<item_id>\t<token> <token> ...\n".

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "styletopics/errors.hpp"

namespace styletopics {

// Visual documents hold a sorted set of "<layer>:<channel>" tokens; text
// documents hold a multiset of words in occurrence order.
struct Document {
  std::string item_id;
  std::vector<std::string> tokens;

  friend bool operator==(const Document&, const Document&) = default;
};

using VisualDocument = Document;
using TextDocument = Document;

inline void write_document(std::ostream& out, const Document& doc) {
  out << doc.item_id << '\t';
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i) out << ' ';
    out << doc.tokens[i];
  }
  out << '\n';
}

inline void write_documents(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) write_document(out, d);
}

inline std::string format_documents(const std::vector<Document>& docs) {
  std::ostringstream out;
  write_documents(out, docs);
  return std::move(out).str();
}

// Parses one line (without its newline). line_no is used for error messages.
inline Document parse_document_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) throw ParseError(line_no, "missing TAB separator");
  Document doc;
  doc.item_id = std::string(line.substr(0, tab));
  if (doc.item_id.empty()) throw ParseError(line_no, "empty item_id");
  const std::string_view rest = line.substr(tab + 1);
  if (rest.find('\t') != std::string_view::npos) throw ParseError(line_no, "more than one TAB");
  std::size_t pos = 0;
  while (pos < rest.size()) {
    const auto end = rest.find(' ', pos);
    const auto stop = end == std::string_view::npos ? rest.size() : end;
    if (stop > pos) doc.tokens.emplace_back(rest.substr(pos, stop - pos));
    pos = stop + 1;
  }
  return doc;
}

// Blank lines are skipped.
inline std::vector<Document> read_documents(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    docs.push_back(parse_document_line(line, line_no));
  }
  return docs;
}

inline std::vector<Document> parse_documents(const std::string& text) {
  std::istringstream in(text);
  return read_documents(in);
}

}  // namespace styletopics
