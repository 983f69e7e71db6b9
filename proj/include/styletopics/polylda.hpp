#pragma once

// Polylingual LDA: each tuple of documents (one per language) shares one
// doc-topic count row, while every language keeps its own topic-word table.
// A sweep visits tuples in order, languages 0..L-1 within a tuple, tokens in
// order. With L = 1 it performs exactly the same operations as train_lda.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "styletopics/corpus.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/matrix.hpp"
#include "styletopics/rng.hpp"

namespace styletopics {

struct PolyLdaModel {
  std::uint32_t num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t iterations_run = 0;
  std::vector<Vocabulary> vocabs;                      // [language]
  std::vector<std::string> item_ids;                   // [tuple]
  std::vector<std::vector<WordSeq>> tuples;            // [tuple][language]; empty when loaded
  std::vector<std::vector<std::vector<Topic>>> z;      // parallel to tuples
  CountMatrix n_dk;                                    // tuples x K, shared across languages
  std::vector<CountMatrix> n_wk;                       // [language] V_l x K
  std::vector<std::vector<std::uint32_t>> n_k;         // [language] K

  std::size_t num_languages() const noexcept { return vocabs.size(); }
  std::size_t num_tuples() const noexcept { return n_dk.rows(); }
  std::uint32_t tuple_length(std::size_t i) const {
    std::uint32_t n = 0;
    for (auto c : n_dk.row(i)) n += c;
    return n;
  }
};

inline void check_invariants(const PolyLdaModel& m) {
  const std::size_t K = m.num_topics;
  const std::size_t L = m.num_languages();
  if (m.n_dk.cols() != K || m.n_wk.size() != L || m.n_k.size() != L)
    throw std::logic_error("PolyLDA count tables have inconsistent shape");
  std::uint64_t lang_total = 0;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<std::uint64_t> sum(K, 0);
    for (std::size_t w = 0; w < m.n_wk[l].rows(); ++w)
      for (std::size_t k = 0; k < K; ++k) sum[k] += m.n_wk[l](w, k);
    for (std::size_t k = 0; k < K; ++k) {
      if (sum[k] != m.n_k[l][k])
        throw std::logic_error("PolyLDA topic totals disagree with topic-word counts in language " + std::to_string(l));
      lang_total += sum[k];
    }
  }
  std::uint64_t tuple_total = 0;
  for (std::size_t i = 0; i < m.num_tuples(); ++i) {
    const std::uint32_t len = m.tuple_length(i);
    tuple_total += len;
    if (!m.tuples.empty()) {
      std::size_t expected = 0;
      for (const auto& slot : m.tuples[i]) expected += slot.size();
      if (len != expected) throw std::logic_error("PolyLDA tuple-topic counts disagree with tuple length");
    }
  }
  if (tuple_total != lang_total) throw std::logic_error("PolyLDA total token count mismatch");
}

// Joint log p(w, z) summed over languages, theta and phi integrated out.
inline double log_likelihood(const PolyLdaModel& m) {
  const double K = m.num_topics;
  double ll = 0.0;
  const double lg_beta = std::lgamma(m.beta);
  for (std::size_t l = 0; l < m.num_languages(); ++l) {
    const double V = static_cast<double>(m.n_wk[l].rows());
    if (V == 0) continue;  // no tokens in this language
    for (Topic k = 0; k < m.num_topics; ++k) {
      ll += std::lgamma(V * m.beta) - std::lgamma(m.n_k[l][k] + V * m.beta);
      for (std::size_t w = 0; w < m.n_wk[l].rows(); ++w) {
        const auto c = m.n_wk[l](w, k);
        if (c) ll += std::lgamma(c + m.beta) - lg_beta;
      }
    }
  }
  const double lg_alpha = std::lgamma(m.alpha);
  for (std::size_t i = 0; i < m.num_tuples(); ++i) {
    ll += std::lgamma(K * m.alpha) - std::lgamma(m.tuple_length(i) + K * m.alpha);
    for (auto c : m.n_dk.row(i))
      if (c) ll += std::lgamma(c + m.alpha) - lg_alpha;
  }
  return ll;
}

class PolyLdaSampler {
 public:
  PolyLdaSampler(const TupleCorpus& corpus, const TrainParams& params) : rng_(params.seed) {
    validate(params);
    const std::size_t K = params.num_topics;
    const std::size_t L = corpus.num_languages();
    if (L == 0) throw ValidationError("polylingual corpus needs at least one language");
    m_.num_topics = params.num_topics;
    m_.alpha = params.resolved_alpha();
    m_.beta = params.beta;
    m_.seed = params.seed;
    m_.vocabs = corpus.vocabs;
    m_.item_ids = corpus.item_ids;
    m_.tuples = corpus.tuples;
    m_.n_dk = CountMatrix(corpus.num_tuples(), K);
    for (std::size_t l = 0; l < L; ++l) {
      m_.n_wk.emplace_back(corpus.vocabs[l].size(), K);
      m_.n_k.emplace_back(K, 0);
    }
    m_.z.resize(m_.tuples.size());
    for (std::size_t i = 0; i < m_.tuples.size(); ++i) {
      if (m_.tuples[i].size() != L)
        throw ValidationError("tuple '" + m_.item_ids[i] + "' does not have one slot per language");
      m_.z[i].resize(L);
      for (std::size_t l = 0; l < L; ++l) {
        const auto& words = m_.tuples[i][l];
        auto& zs = m_.z[i][l];
        zs.resize(words.size());
        for (std::size_t t = 0; t < words.size(); ++t) {
          if (words[t] >= m_.n_wk[l].rows())
            throw ValidationError("word id out of range in tuple '" + m_.item_ids[i] + "'");
          const Topic k = rng_.uniform_index(m_.num_topics);
          zs[t] = k;
          ++m_.n_dk(i, k);
          ++m_.n_wk[l](words[t], k);
          ++m_.n_k[l][k];
        }
      }
    }
    cum_.resize(K);
  }

  void sweep() {
    const std::size_t L = m_.num_languages();
    for (std::size_t i = 0; i < m_.tuples.size(); ++i) {
      auto doc_counts = m_.n_dk.row(i);
      for (std::size_t l = 0; l < L; ++l) {
        const double v_beta = static_cast<double>(m_.n_wk[l].rows()) * m_.beta;
        const auto& words = m_.tuples[i][l];
        auto& zs = m_.z[i][l];
        auto& totals = m_.n_k[l];
        for (std::size_t t = 0; t < words.size(); ++t) {
          auto word_counts = m_.n_wk[l].row(words[t]);
          Topic k = zs[t];
          --doc_counts[k];
          --word_counts[k];
          --totals[k];
          detail::cumulative_weights(doc_counts, word_counts, totals, m_.alpha, m_.beta, v_beta, cum_);
          k = detail::draw_from_cumulative(cum_, rng_);
          zs[t] = k;
          ++doc_counts[k];
          ++word_counts[k];
          ++totals[k];
        }
      }
    }
    ++m_.iterations_run;
#ifndef NDEBUG
    check_invariants(m_);
#endif
  }

  const PolyLdaModel& model() const noexcept { return m_; }
  PolyLdaModel release() && { return std::move(m_); }

 private:
  PolyLdaModel m_;
  Rng rng_;
  std::vector<double> cum_;
};

using PolyLdaProgress = std::function<void(std::uint32_t sweep, const PolyLdaModel&)>;

inline PolyLdaModel train_polylda(const TupleCorpus& corpus, const TrainParams& params,
                                  const PolyLdaProgress& progress = {}) {
  PolyLdaSampler sampler(corpus, params);
  for (std::uint32_t it = 1; it <= params.iterations; ++it) {
    sampler.sweep();
    if (progress && (it % 100 == 0 || it == params.iterations)) progress(it, sampler.model());
  }
  return std::move(sampler).release();
}

// theta[i,k] = (n_dk + alpha) / (N_i + K * alpha), N_i summed over languages.
inline Matrix<double> estimate_shared_theta(const PolyLdaModel& m) {
  const std::size_t K = m.num_topics;
  Matrix<double> theta(m.num_tuples(), K);
  for (std::size_t i = 0; i < m.num_tuples(); ++i) {
    const double denom = m.tuple_length(i) + static_cast<double>(K) * m.alpha;
    for (std::size_t k = 0; k < K; ++k) theta(i, k) = (m.n_dk(i, k) + m.alpha) / denom;
  }
  return theta;
}

inline Matrix<double> estimate_phi(const PolyLdaModel& m, std::size_t language) {
  if (language >= m.num_languages()) throw ValidationError("language " + std::to_string(language) + " out of range");
  const auto& counts = m.n_wk[language];
  const std::size_t V = counts.rows();
  Matrix<double> phi(m.num_topics, V);
  for (std::size_t k = 0; k < m.num_topics; ++k) {
    const double denom = m.n_k[language][k] + static_cast<double>(V) * m.beta;
    for (std::size_t w = 0; w < V; ++w) phi(k, w) = (counts(w, k) + m.beta) / denom;
  }
  return phi;
}

// One ranked list per language.
inline std::vector<RankedWords> top_words_per_language(const PolyLdaModel& m, Topic k, std::size_t n) {
  if (k >= m.num_topics) throw ValidationError("topic " + std::to_string(k) + " out of range");
  std::vector<RankedWords> out;
  for (std::size_t l = 0; l < m.num_languages(); ++l) {
    const Matrix<double> phi = estimate_phi(m, l);
    out.push_back(top_entries(phi.row(k), m.vocabs[l], n));
  }
  return out;
}

}  // namespace styletopics
