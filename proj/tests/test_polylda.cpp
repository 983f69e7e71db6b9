#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/model_io.hpp"
#include "styletopics/polylda.hpp"

using namespace styletopics;

namespace {

TrainParams params(std::uint32_t K, double alpha, double beta, std::uint32_t iterations, std::uint64_t seed) {
  TrainParams p;
  p.num_topics = K;
  p.alpha = alpha;
  p.beta = beta;
  p.iterations = iterations;
  p.seed = seed;
  return p;
}

// Two languages generated from the same planted topic per tuple.
std::vector<std::vector<Document>> paired_corpus(std::size_t tuples, std::uint64_t seed) {
  auto images = oracle::planted_blocks(tuples, 2, 15, 12, seed, "v");
  auto words = oracle::planted_blocks(tuples, 2, 10, 6, seed + 1, "t");
  return {images.docs, words.docs};
}

}  // namespace

TEST(PolyLda, SingleLanguageIsBitIdenticalToLda) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto planted = oracle::planted_blocks(25, 3, 7, 9, seed);
    const Corpus corpus = encode_corpus(planted.docs);
    const auto p = params(3, 0.2, 0.05, 40, seed);
    const LdaModel lda = train_lda(corpus, p);
    const PolyLdaModel poly = train_polylda(as_tuple_corpus(corpus), p);
    ASSERT_EQ(poly.num_languages(), 1u);
    EXPECT_EQ(poly.n_dk, lda.n_dk);
    EXPECT_EQ(poly.n_wk[0], lda.n_wk);
    EXPECT_EQ(poly.n_k[0], lda.n_k);
    for (std::size_t d = 0; d < lda.z.size(); ++d) EXPECT_EQ(poly.z[d][0], lda.z[d]);
    EXPECT_EQ(estimate_shared_theta(poly), estimate_theta(lda));
    EXPECT_EQ(estimate_phi(poly, 0), estimate_phi(lda));
  }
}

TEST(PolyLda, EmptySlotContributesNothing) {
  const auto corpus = align_tuples({{{"a", {"x", "y"}}}, {{"a", {}}, {"b", {"p"}}}});
  const auto m = train_polylda(corpus, params(2, 0.5, 0.1, 10, 4));
  EXPECT_EQ(m.tuple_length(0), 2u);
  EXPECT_EQ(m.tuple_length(1), 1u);
  std::uint32_t lang1 = 0;
  for (auto c : m.n_k[1]) lang1 += c;
  EXPECT_EQ(lang1, 1u);
  EXPECT_TRUE(m.z[0][1].empty());
}

TEST(PolyLda, CountsConservedAndDeterministic) {
  const auto corpus = align_tuples(paired_corpus(20, 3));
  PolyLdaSampler a(corpus, params(3, 0.3, 0.05, 0, 8));
  PolyLdaSampler b(corpus, params(3, 0.3, 0.05, 0, 8));
  for (int s = 0; s < 15; ++s) {
    a.sweep();
    b.sweep();
    EXPECT_NO_THROW(check_invariants(a.model()));
    for (std::size_t i = 0; i < corpus.num_tuples(); ++i) {
      std::size_t n = 0;
      for (const auto& slot : corpus.tuples[i]) n += slot.size();
      ASSERT_EQ(a.model().tuple_length(i), n);
    }
  }
  EXPECT_EQ(a.model().z, b.model().z);
  EXPECT_EQ(dump_model(to_json(a.model())), dump_model(to_json(b.model())));
}

TEST(PolyLda, RecoversSharedPlantedTopics) {
  const auto languages = paired_corpus(100, 21);
  const auto labels = oracle::planted_blocks(100, 2, 15, 12, 21, "v").labels;
  const auto m = train_polylda(align_tuples(languages), params(2, 0.5, 0.01, 150, 5));
  EXPECT_GE(oracle::nmi(oracle::dominant(estimate_shared_theta(m)), labels), 0.9);
}

TEST(PolyLda, ValidatesParameters) {
  const auto corpus = align_tuples({{{"a", {"x"}}}});
  EXPECT_THROW(train_polylda(corpus, params(0, 1, 1, 1, 1)), ValidationError);
  EXPECT_THROW(train_polylda(corpus, params(1, 0, 1, 1, 1)), ValidationError);
  EXPECT_THROW(train_polylda(TupleCorpus{}, params(1, 1, 1, 1, 1)), ValidationError);
}

TEST(SharedTheta, Examples) {
  PolyLdaModel m;
  m.num_topics = 2;
  m.alpha = 1.0;
  m.beta = 0.1;
  m.n_dk = CountMatrix(2, 2);
  m.n_dk(0, 0) = 1;
  m.n_dk(0, 1) = 3;
  const auto theta = estimate_shared_theta(m);
  EXPECT_DOUBLE_EQ(theta(0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(theta(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(theta(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(theta(1, 1), 0.5);
}

TEST(PerLanguagePhi, NormalizedAndRanked) {
  const auto corpus = align_tuples(paired_corpus(30, 9));
  const auto m = train_polylda(corpus, params(2, 0.5, 0.01, 50, 2));
  for (std::size_t l = 0; l < 2; ++l) {
    const auto phi = estimate_phi(m, l);
    EXPECT_EQ(phi.cols(), corpus.vocabs[l].size());
    for (std::size_t k = 0; k < phi.rows(); ++k) {
      double s = 0.0;
      for (double v : phi.row(k)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
  EXPECT_THROW(estimate_phi(m, 2), ValidationError);

  const auto lists = top_words_per_language(m, 0, 3);
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0].size(), 3u);
  EXPECT_EQ(lists[0][0].first.front(), 'v');
  EXPECT_EQ(lists[1][0].first.front(), 't');
  // each topic's top words come from a single planted block in both languages
  const char block_v = lists[0][0].first[1];
  for (const auto& [token, p] : lists[0]) EXPECT_EQ(token[1], block_v);
  EXPECT_THROW(top_words_per_language(m, 2, 1), ValidationError);
}

TEST(PolyLdaJson, RoundTrip) {
  const auto corpus = align_tuples(paired_corpus(10, 4));
  const auto m = train_polylda(corpus, params(3, 0.5, 0.05, 5, 6));
  const auto back = polylda_from_json(nlohmann::json::parse(dump_model(to_json(m))));
  EXPECT_EQ(back.n_dk, m.n_dk);
  EXPECT_EQ(back.n_wk, m.n_wk);
  EXPECT_EQ(back.n_k, m.n_k);
  EXPECT_EQ(back.item_ids, m.item_ids);
  EXPECT_EQ(dump_model(to_json(back)), dump_model(to_json(m)));
  EXPECT_THROW(lda_from_json(to_json(m)), FormatError);
  EXPECT_TRUE(std::holds_alternative<PolyLdaModel>(model_from_json(to_json(m))));
}

TEST(PolyLda, LanguageWithoutTokensKeepsLikelihoodFinite) {
  const auto corpus = align_tuples({{{"a", {"x", "y"}}, {"b", {"y"}}}, {{"a", {}}}});
  const auto m = train_polylda(corpus, params(2, 0.5, 0.1, 5, 3));
  EXPECT_TRUE(std::isfinite(log_likelihood(m)));
}
