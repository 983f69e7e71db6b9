#pragma once

// Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//
// For token i of document d with word w, the topic is resampled from
//   p(z = k | rest) ∝ (n_dk[d,k] + alpha) * (n_wk[w,k] + beta) / (n_k[k] + V * beta)
// with the token's own assignment removed from the counts. A sweep visits
// documents in order and tokens in order, updating counts in place.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "styletopics/corpus.hpp"
#include "styletopics/errors.hpp"
#include "styletopics/matrix.hpp"
#include "styletopics/rng.hpp"

namespace styletopics {

using Topic = std::uint32_t;

inline constexpr std::uint32_t kDefaultTopics = 50;
inline constexpr double kDefaultBeta = 0.01;
inline constexpr std::uint32_t kDefaultIterations = 1000;

inline double default_alpha(std::uint32_t num_topics) { return 50.0 / num_topics; }

struct TrainParams {
  std::uint32_t num_topics = kDefaultTopics;
  std::optional<double> alpha;  // defaults to 50 / K
  double beta = kDefaultBeta;
  std::uint32_t iterations = kDefaultIterations;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha.value_or(default_alpha(num_topics)); }
};

inline void validate(const TrainParams& p) {
  if (p.num_topics == 0) throw ValidationError("number of topics must be at least 1");
  const double a = p.resolved_alpha();
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alpha must be positive");
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw ValidationError("beta must be positive");
}

struct LdaModel {
  std::uint32_t num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t iterations_run = 0;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;
  std::vector<WordSeq> docs;           // empty for models loaded from JSON
  std::vector<std::vector<Topic>> z;   // parallel to docs
  CountMatrix n_dk;                    // M x K
  CountMatrix n_wk;                    // V x K (transpose of the K x V topic-word table)
  std::vector<std::uint32_t> n_k;      // K

  std::size_t num_docs() const noexcept { return n_dk.rows(); }
  std::size_t vocab_size() const noexcept { return n_wk.rows(); }
  std::uint32_t topic_word(Topic k, WordId w) const { return n_wk(w, k); }
  std::uint32_t doc_length(std::size_t d) const {
    std::uint32_t n = 0;
    for (auto c : n_dk.row(d)) n += c;
    return n;
  }
};

namespace detail {

inline double topic_weight(std::uint32_t n_dk, std::uint32_t n_wk, std::uint32_t n_k, double alpha, double beta,
                           double v_beta) {
  return (n_dk + alpha) * (n_wk + beta) / (n_k + v_beta);
}

// Draws a topic from cumulative weights: the first k with u * total < cum[k].
inline Topic draw_from_cumulative(std::span<const double> cum, Rng& rng) {
  const double u = rng.uniform01() * cum.back();
  for (std::size_t k = 0; k < cum.size(); ++k) {
    if (u < cum[k]) return static_cast<Topic>(k);
  }
  return static_cast<Topic>(cum.size() - 1);
}

// Fills `cum` with the running sum of the collapsed conditional weights.
inline void cumulative_weights(std::span<const std::uint32_t> doc_counts, std::span<const std::uint32_t> word_counts,
                               std::span<const std::uint32_t> topic_totals, double alpha, double beta, double v_beta,
                               std::span<double> cum) {
  double total = 0.0;
  for (std::size_t k = 0; k < cum.size(); ++k) {
    total += topic_weight(doc_counts[k], word_counts[k], topic_totals[k], alpha, beta, v_beta);
    cum[k] = total;
  }
}

}  // namespace detail

// Normalized conditional over topics for word w in document d. Callers
// resampling an existing token must remove it from the counts first.
inline std::vector<double> full_conditional(const LdaModel& m, std::size_t d, WordId w) {
  const double v_beta = static_cast<double>(m.vocab_size()) * m.beta;
  std::vector<double> p(m.num_topics);
  double total = 0.0;
  for (Topic k = 0; k < m.num_topics; ++k) {
    p[k] = detail::topic_weight(m.n_dk(d, k), m.n_wk(w, k), m.n_k[k], m.alpha, m.beta, v_beta);
    total += p[k];
  }
  for (auto& x : p) x /= total;
  return p;
}

// Throws std::logic_error if the count tables disagree with the assignments.
inline void check_invariants(const LdaModel& m) {
  const std::size_t K = m.num_topics;
  if (m.n_dk.cols() != K || m.n_wk.cols() != K || m.n_k.size() != K)
    throw std::logic_error("LDA count tables have inconsistent topic dimension");
  std::vector<std::uint64_t> topic_sum(K, 0);
  std::uint64_t doc_total = 0;
  for (std::size_t w = 0; w < m.vocab_size(); ++w)
    for (std::size_t k = 0; k < K; ++k) topic_sum[k] += m.n_wk(w, k);
  for (std::size_t k = 0; k < K; ++k)
    if (topic_sum[k] != m.n_k[k]) throw std::logic_error("LDA topic totals disagree with topic-word counts");
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    const std::uint32_t len = m.doc_length(d);
    doc_total += len;
    if (!m.docs.empty() && len != m.docs[d].size())
      throw std::logic_error("LDA doc-topic counts disagree with document length");
  }
  std::uint64_t total = 0;
  for (auto c : m.n_k) total += c;
  if (total != doc_total) throw std::logic_error("LDA total token count mismatch");
}

// Joint log p(w, z) with theta and phi integrated out.
inline double log_likelihood(const LdaModel& m) {
  const double K = m.num_topics;
  const double V = static_cast<double>(m.vocab_size());
  double ll = 0.0;
  const double lg_beta = std::lgamma(m.beta);
  for (Topic k = 0; V > 0 && k < m.num_topics; ++k) {
    ll += std::lgamma(V * m.beta) - std::lgamma(m.n_k[k] + V * m.beta);
    for (std::size_t w = 0; w < m.vocab_size(); ++w) {
      const auto c = m.n_wk(w, k);
      if (c) ll += std::lgamma(c + m.beta) - lg_beta;
    }
  }
  const double lg_alpha = std::lgamma(m.alpha);
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    ll += std::lgamma(K * m.alpha) - std::lgamma(m.doc_length(d) + K * m.alpha);
    for (auto c : m.n_dk.row(d))
      if (c) ll += std::lgamma(c + m.alpha) - lg_alpha;
  }
  return ll;
}

// Owns the model and generator during training so sweeps can be driven one
// at a time (used for diagnostics and posterior checks).
class LdaSampler {
 public:
  LdaSampler(const Corpus& corpus, const TrainParams& params) : rng_(params.seed) {
    validate(params);
    m_.num_topics = params.num_topics;
    m_.alpha = params.resolved_alpha();
    m_.beta = params.beta;
    m_.seed = params.seed;
    m_.vocab = corpus.vocab;
    m_.doc_ids = corpus.doc_ids;
    m_.docs = corpus.docs;
    const std::size_t K = m_.num_topics;
    m_.n_dk = CountMatrix(corpus.num_docs(), K);
    m_.n_wk = CountMatrix(corpus.vocab_size(), K);
    m_.n_k.assign(K, 0);
    m_.z.resize(m_.docs.size());
    for (std::size_t d = 0; d < m_.docs.size(); ++d) {
      auto& zd = m_.z[d];
      zd.resize(m_.docs[d].size());
      for (std::size_t i = 0; i < zd.size(); ++i) {
        const WordId w = m_.docs[d][i];
        if (w >= corpus.vocab_size()) throw ValidationError("word id out of range in document " + m_.doc_ids[d]);
        const Topic k = rng_.uniform_index(m_.num_topics);
        zd[i] = k;
        ++m_.n_dk(d, k);
        ++m_.n_wk(w, k);
        ++m_.n_k[k];
      }
    }
    cum_.resize(K);
  }

  void sweep() {
    const double v_beta = static_cast<double>(m_.vocab_size()) * m_.beta;
    for (std::size_t d = 0; d < m_.docs.size(); ++d) {
      const auto& words = m_.docs[d];
      auto& zd = m_.z[d];
      auto doc_counts = m_.n_dk.row(d);
      for (std::size_t i = 0; i < words.size(); ++i) {
        const WordId w = words[i];
        auto word_counts = m_.n_wk.row(w);
        Topic k = zd[i];
        --doc_counts[k];
        --word_counts[k];
        --m_.n_k[k];
        detail::cumulative_weights(doc_counts, word_counts, m_.n_k, m_.alpha, m_.beta, v_beta, cum_);
        k = detail::draw_from_cumulative(cum_, rng_);
        zd[i] = k;
        ++doc_counts[k];
        ++word_counts[k];
        ++m_.n_k[k];
      }
    }
    ++m_.iterations_run;
#ifndef NDEBUG
    check_invariants(m_);
#endif
  }

  const LdaModel& model() const noexcept { return m_; }
  LdaModel release() && { return std::move(m_); }

 private:
  LdaModel m_;
  Rng rng_;
  std::vector<double> cum_;
};

using LdaProgress = std::function<void(std::uint32_t sweep, const LdaModel&)>;

// `progress` is invoked after every 100th sweep and after the last one.
inline LdaModel train_lda(const Corpus& corpus, const TrainParams& params, const LdaProgress& progress = {}) {
  LdaSampler sampler(corpus, params);
  for (std::uint32_t it = 1; it <= params.iterations; ++it) {
    sampler.sweep();
    if (progress && (it % 100 == 0 || it == params.iterations)) progress(it, sampler.model());
  }
  return std::move(sampler).release();
}

// theta[d,k] = (n_dk + alpha) / (N_d + K * alpha)
inline Matrix<double> estimate_theta(const LdaModel& m) {
  const std::size_t K = m.num_topics;
  Matrix<double> theta(m.num_docs(), K);
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    const double denom = m.doc_length(d) + static_cast<double>(K) * m.alpha;
    for (std::size_t k = 0; k < K; ++k) theta(d, k) = (m.n_dk(d, k) + m.alpha) / denom;
  }
  return theta;
}

// phi[k,w] = (n_kw + beta) / (n_k + V * beta)
inline Matrix<double> estimate_phi(const LdaModel& m) {
  const std::size_t V = m.vocab_size();
  Matrix<double> phi(m.num_topics, V);
  for (std::size_t k = 0; k < m.num_topics; ++k) {
    const double denom = m.n_k[k] + static_cast<double>(V) * m.beta;
    for (std::size_t w = 0; w < V; ++w) phi(k, w) = (m.n_wk(w, k) + m.beta) / denom;
  }
  return phi;
}

using RankedWords = std::vector<std::pair<std::string, double>>;

// The n highest-probability entries of one row, ties broken by lower word id.
inline RankedWords top_entries(std::span<const double> row, const Vocabulary& vocab, std::size_t n) {
  std::vector<WordId> order(row.size());
  for (std::size_t w = 0; w < order.size(); ++w) order[w] = static_cast<WordId>(w);
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](WordId a, WordId b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  RankedWords out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(vocab.token(order[i]), row[order[i]]);
  return out;
}

inline RankedWords top_words(const LdaModel& m, Topic k, std::size_t n) {
  if (k >= m.num_topics) throw ValidationError("topic " + std::to_string(k) + " out of range");
  const Matrix<double> phi = estimate_phi(m);
  return top_entries(phi.row(k), m.vocab, n);
}

// Embeds an unseen document: Gibbs over its own assignments with the
// trained topic-word counts frozen. Returns the smoothed theta row.
inline std::vector<double> infer_held_out(const LdaModel& m, std::span<const WordId> doc, std::uint32_t iterations,
                                          std::uint64_t seed) {
  const std::size_t K = m.num_topics;
  for (WordId w : doc)
    if (w >= m.vocab_size()) throw ValidationError("unknown word id " + std::to_string(w));
  Rng rng(seed);
  const double v_beta = static_cast<double>(m.vocab_size()) * m.beta;
  std::vector<std::uint32_t> counts(K, 0);
  std::vector<Topic> z(doc.size());
  for (auto& k : z) {
    k = rng.uniform_index(m.num_topics);
    ++counts[k];
  }
  std::vector<double> cum(K);
  for (std::uint32_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      --counts[z[i]];
      detail::cumulative_weights(counts, m.n_wk.row(doc[i]), m.n_k, m.alpha, m.beta, v_beta, cum);
      z[i] = detail::draw_from_cumulative(cum, rng);
      ++counts[z[i]];
    }
  }
  std::vector<double> theta(K);
  const double denom = static_cast<double>(doc.size()) + static_cast<double>(K) * m.alpha;
  for (std::size_t k = 0; k < K; ++k) theta[k] = (counts[k] + m.alpha) / denom;
  return theta;
}

}  // namespace styletopics
