#pragma once

// JSON model files.
//
// LDA:     {"model":"lda", K, alpha, beta, seed, iterations_run,
//           vocab:[token...], doc_ids:[id...], n_dk:[[...]...] (M x K), n_kw:[[...]...] (K x V)}
// PolyLDA: {"model":"polylda", K, alpha, beta, seed, iterations_run, languages: L,
//           vocab:[[token...] per language], doc_ids:[id...], n_dk (M x K),
//           n_kw:[K x V_l per language]}
// Topic assignments are not stored; loaded models support estimation,
// inspection and held-out inference but not further training.

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "styletopics/errors.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/polylda.hpp"

namespace styletopics {

namespace detail {

inline nlohmann::json counts_by_topic(const CountMatrix& word_major, std::size_t K) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::uint32_t> row(word_major.rows());
    for (std::size_t w = 0; w < row.size(); ++w) row[w] = word_major(w, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json rows_of(const CountMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<std::uint32_t>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

inline CountMatrix doc_counts_from(const nlohmann::json& j, std::size_t M, std::size_t K) {
  if (!j.is_array() || j.size() != M) throw FormatError("model file: n_dk must have one row per document");
  CountMatrix m(M, K);
  for (std::size_t d = 0; d < M; ++d) {
    if (!j[d].is_array() || j[d].size() != K) throw FormatError("model file: n_dk row has wrong length");
    for (std::size_t k = 0; k < K; ++k) m(d, k) = j[d][k].get<std::uint32_t>();
  }
  return m;
}

// Reads a K x V table into word-major storage and returns the topic totals.
inline std::vector<std::uint32_t> word_counts_from(const nlohmann::json& j, std::size_t K, std::size_t V,
                                                   CountMatrix& out) {
  if (!j.is_array() || j.size() != K) throw FormatError("model file: n_kw must have one row per topic");
  out = CountMatrix(V, K);
  std::vector<std::uint32_t> totals(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (!j[k].is_array() || j[k].size() != V) throw FormatError("model file: n_kw row has wrong length");
    for (std::size_t w = 0; w < V; ++w) {
      out(w, k) = j[k][w].get<std::uint32_t>();
      totals[k] += out(w, k);
    }
  }
  return totals;
}

template <typename Model>
void header_from(const nlohmann::json& j, Model& m) {
  m.num_topics = j.at("K").get<std::uint32_t>();
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.iterations_run = j.at("iterations_run").get<std::uint32_t>();
  if (m.num_topics == 0 || !(m.alpha > 0) || !(m.beta > 0)) throw FormatError("model file: invalid hyperparameters");
}

}  // namespace detail

inline nlohmann::json to_json(const LdaModel& m) {
  return {{"model", "lda"},
          {"K", m.num_topics},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"seed", m.seed},
          {"iterations_run", m.iterations_run},
          {"vocab", m.vocab.tokens()},
          {"doc_ids", m.doc_ids},
          {"n_dk", detail::rows_of(m.n_dk)},
          {"n_kw", detail::counts_by_topic(m.n_wk, m.num_topics)}};
}

inline nlohmann::json to_json(const PolyLdaModel& m) {
  nlohmann::json vocabs = nlohmann::json::array();
  nlohmann::json n_kw = nlohmann::json::array();
  for (std::size_t l = 0; l < m.num_languages(); ++l) {
    vocabs.push_back(m.vocabs[l].tokens());
    n_kw.push_back(detail::counts_by_topic(m.n_wk[l], m.num_topics));
  }
  return {{"model", "polylda"},
          {"K", m.num_topics},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"seed", m.seed},
          {"iterations_run", m.iterations_run},
          {"languages", m.num_languages()},
          {"vocab", std::move(vocabs)},
          {"doc_ids", m.item_ids},
          {"n_dk", detail::rows_of(m.n_dk)},
          {"n_kw", std::move(n_kw)}};
}

inline LdaModel lda_from_json(const nlohmann::json& j) {
  try {
    if (j.at("model") != "lda") throw FormatError("model file is not an LDA model");
    LdaModel m;
    detail::header_from(j, m);
    m.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.n_dk = detail::doc_counts_from(j.at("n_dk"), m.doc_ids.size(), m.num_topics);
    m.n_k = detail::word_counts_from(j.at("n_kw"), m.num_topics, m.vocab.size(), m.n_wk);
    check_invariants(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

inline PolyLdaModel polylda_from_json(const nlohmann::json& j) {
  try {
    if (j.at("model") != "polylda") throw FormatError("model file is not a PolyLDA model");
    PolyLdaModel m;
    detail::header_from(j, m);
    const auto L = j.at("languages").get<std::size_t>();
    const auto& vocabs = j.at("vocab");
    const auto& n_kw = j.at("n_kw");
    if (L == 0 || vocabs.size() != L || n_kw.size() != L) throw FormatError("model file: language count mismatch");
    m.item_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.n_dk = detail::doc_counts_from(j.at("n_dk"), m.item_ids.size(), m.num_topics);
    m.n_wk.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      m.vocabs.emplace_back(vocabs[l].get<std::vector<std::string>>());
      m.n_k.push_back(detail::word_counts_from(n_kw[l], m.num_topics, m.vocabs[l].size(), m.n_wk[l]));
    }
    check_invariants(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

using AnyModel = std::variant<LdaModel, PolyLdaModel>;

inline AnyModel model_from_json(const nlohmann::json& j) {
  const auto kind = j.value("model", std::string{});
  if (kind == "lda") return lda_from_json(j);
  if (kind == "polylda") return polylda_from_json(j);
  throw FormatError("model file: unknown model type '" + kind + "'");
}

inline AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

// Compact serialization terminated by a newline.
inline std::string dump_model(const nlohmann::json& j) { return j.dump() + "\n"; }

}  // namespace styletopics
