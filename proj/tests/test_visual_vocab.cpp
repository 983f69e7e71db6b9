#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "styletopics/visual_vocab.hpp"

using namespace styletopics;

namespace {

ActivationRecord grid(std::string item, std::uint32_t layer, std::uint32_t C, std::uint32_t H, std::uint32_t W,
                      std::vector<float> values, std::string image = "img") {
  return {std::move(item), std::move(image), layer, C, H, W, std::move(values)};
}

// Channel 0 = (1.5, 0, 0, 0), channel 1 = (0.5, -0.9, 0, 0)
ActivationRecord two_channel_example() {
  return grid("item", 8, 2, 2, 2, {1.5f, 0, 0, 0, 0.5f, -0.9f, 0, 0});
}

// One-hot grid: the listed channels get a single cell of value 5.
ActivationRecord with_active(std::string item, std::uint32_t layer, std::uint32_t C, std::vector<std::uint32_t> on,
                             std::string image = "img") {
  std::vector<float> v(C * 4, 0.0f);
  for (auto c : on) v[c * 4] = 5.0f;
  return grid(std::move(item), layer, C, 2, 2, std::move(v), std::move(image));
}

ActivationRecord random_record(std::mt19937& gen, std::uint32_t layer = 8) {
  std::uniform_int_distribution<std::uint32_t> dim(1, 6);
  std::normal_distribution<float> value(0.0f, 1.0f);
  ActivationRecord r{"item", "img", layer, dim(gen), dim(gen), dim(gen), {}};
  r.values.resize(std::size_t{r.channels} * r.height * r.width);
  for (auto& v : r.values) v = value(gen);
  return r;
}

}  // namespace

TEST(ActiveChannels, AllZeroGridHasNoActiveChannels) {
  const auto r = grid("i", 8, 3, 2, 2, std::vector<float>(12, 0.0f));
  EXPECT_TRUE(active_channels(r, {8, 0.001, false}).empty());
  EXPECT_TRUE(active_channels(r, {8, 0.001, true}).empty());
}

TEST(ActiveChannels, PrimaryRuleUsesAbsoluteValueAndStrictThreshold) {
  EXPECT_EQ(active_channels(two_channel_example(), {8, 1.0, false}), (std::vector<std::uint32_t>{0}));
  // -0.9 becomes active once the threshold drops below 0.9
  EXPECT_EQ(active_channels(two_channel_example(), {8, 0.8, false}), (std::vector<std::uint32_t>{0, 1}));
  // value exactly at the threshold is not active
  EXPECT_TRUE(active_channels(two_channel_example(), {8, 1.5, false}).empty());
}

TEST(ActiveChannels, SecondaryRuleExample) {
  // ceil(4 / 20) = 1 cell required
  EXPECT_EQ(required_cells(1.0 / 20.0, 4), 1u);
  EXPECT_EQ(active_channels(two_channel_example(), {8, 1.0, true, 1.0 / 20.0}), (std::vector<std::uint32_t>{0}));
}

TEST(ActiveChannels, SecondaryRuleCeilBoundary) {
  EXPECT_EQ(required_cells(0.05, 20), 1u);
  EXPECT_EQ(required_cells(0.05, 21), 2u);
  EXPECT_EQ(required_cells(0.05, 40), 2u);
  EXPECT_EQ(required_cells(0.05, 41), 3u);
  EXPECT_EQ(required_cells(0.05, 1), 1u);
  EXPECT_EQ(required_cells(1.0, 49), 49u);
  EXPECT_EQ(required_cells(0.1, 30), 3u);

  // 7x3 grid = 21 cells needs 2; a channel with one hot cell fails, two pass.
  std::vector<float> v(2 * 21, 0.0f);
  v[0] = 3.0f;
  v[21] = 3.0f;
  v[22] = -3.0f;
  const auto r = grid("i", 18, 2, 7, 3, v);
  EXPECT_EQ(active_channels(r, {18, 1.0, true}), (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(active_channels(r, {18, 1.0, false}), (std::vector<std::uint32_t>{0, 1}));
}

TEST(ActiveChannels, LayerMismatchIsConfigError) {
  EXPECT_THROW(active_channels(two_channel_example(), {18, 1.0, false}), ConfigError);
}

TEST(ActiveChannels, Properties) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = random_record(gen);
    const double t1 = std::uniform_real_distribution<double>(0.1, 2.0)(gen);
    const auto loose = active_channels(r, {8, t1, false});
    const auto strict = active_channels(r, {8, t1, true, 0.25});
    EXPECT_TRUE(std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()));

    const auto higher = active_channels(r, {8, t1 * 1.5, false});
    EXPECT_TRUE(std::includes(loose.begin(), loose.end(), higher.begin(), higher.end()));
    const auto higher_dense = active_channels(r, {8, t1 * 1.5, true, 0.25});
    EXPECT_TRUE(std::includes(strict.begin(), strict.end(), higher_dense.begin(), higher_dense.end()));

    auto negated = r;
    for (auto& v : negated.values) v = -v;
    EXPECT_EQ(active_channels(negated, {8, t1, false}), loose);
    EXPECT_EQ(active_channels(negated, {8, t1, true, 0.25}), strict);
  }
}

TEST(LayerDensity, Examples) {
  const std::vector<ActivationRecord> zero = {grid("i", 8, 4, 2, 2, std::vector<float>(16, 0.0f))};
  EXPECT_EQ(compute_layer_density(zero, 1.0).at(8), 0.0);

  const std::vector<ActivationRecord> full = {with_active("i", 8, 4, {0, 1, 2, 3})};
  EXPECT_EQ(compute_layer_density(full, 1.0).at(8), 1.0);

  const std::vector<ActivationRecord> mixed = {with_active("i", 8, 4, {0, 1}), with_active("j", 8, 4, {2})};
  EXPECT_DOUBLE_EQ(compute_layer_density(mixed, 1.0).at(8), 0.375);

  EXPECT_THROW(compute_layer_density(std::vector<ActivationRecord>{}, 1.0), ValidationError);
}

TEST(LayerDensity, ReportsEachLayerSeparately) {
  const std::vector<ActivationRecord> sample = {with_active("i", 8, 4, {0, 1, 2, 3}), with_active("i", 18, 4, {}),
                                                with_active("j", 18, 4, {1})};
  const auto d = compute_layer_density(sample, 1.0);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.at(8), 1.0);
  EXPECT_DOUBLE_EQ(d.at(18), 0.125);
}

TEST(ClassifyDense, StrictOneThird) {
  EXPECT_FALSE(classify_dense(0.2));
  EXPECT_FALSE(classify_dense(1.0 / 3.0));
  EXPECT_TRUE(classify_dense(0.4));
  EXPECT_TRUE(classify_dense(std::nextafter(1.0 / 3.0, 1.0)));
}

TEST(CalibrateThreshold, NearestRank) {
  const std::vector<ActivationRecord> constant = {grid("i", 8, 1, 2, 2, {2, -2, 2, -2})};
  EXPECT_EQ(calibrate_threshold(constant, 8, 37.0), 2.0);
  EXPECT_EQ(calibrate_threshold(constant, 8, 100.0), 2.0);

  const std::vector<ActivationRecord> ramp = {grid("i", 8, 1, 2, 2, {4, -1, 3, -2})};
  EXPECT_EQ(calibrate_threshold(ramp, 8, 50.0), 2.0);
  EXPECT_EQ(calibrate_threshold(ramp, 8, 51.0), 3.0);
  EXPECT_EQ(calibrate_threshold(ramp, 8, 1.0), 1.0);
  EXPECT_EQ(calibrate_threshold(ramp, 8, 100.0), 4.0);
}

TEST(CalibrateThreshold, OnlyPoolsTargetLayer) {
  const std::vector<ActivationRecord> sample = {grid("i", 8, 1, 1, 2, {1, 2}), grid("i", 18, 1, 1, 2, {100, 200})};
  EXPECT_EQ(calibrate_threshold(sample, 8, 100.0), 2.0);
  EXPECT_EQ(calibrate_threshold(sample, 18, 50.0), 100.0);
  EXPECT_THROW(calibrate_threshold(sample, 31, 50.0), ValidationError);
  EXPECT_THROW(calibrate_threshold(std::vector<ActivationRecord>{}, 8, 50.0), ValidationError);
  EXPECT_THROW(calibrate_threshold(sample, 8, 0.0), ValidationError);
}

TEST(BuildItemDocuments, SingleImage) {
  const std::vector<LayerSpec> specs = {{8, 1.0, false}};
  const auto docs = build_item_documents(std::vector{with_active("sofa", 8, 10, {3, 7})}, specs);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].item_id, "sofa");
  EXPECT_EQ(docs[0].tokens, (std::vector<std::string>{"8:3", "8:7"}));
}

TEST(BuildItemDocuments, UnionAcrossImagesDeduplicates) {
  const std::vector<LayerSpec> specs = {{8, 1.0, false}};
  const auto docs = build_item_documents(
      std::vector{with_active("sofa", 8, 10, {3}, "a"), with_active("sofa", 8, 10, {3, 7}, "b")}, specs);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].tokens, (std::vector<std::string>{"8:3", "8:7"}));
}

TEST(BuildItemDocuments, TokensAreNamespacedByLayer) {
  const std::vector<LayerSpec> specs = {{8, 1.0, false}, {18, 1.0, false}};
  const auto docs =
      build_item_documents(std::vector{with_active("sofa", 8, 10, {3}), with_active("sofa", 18, 10, {3})}, specs);
  ASSERT_EQ(docs.size(), 1u);
  // lexicographic order puts "18:3" first
  EXPECT_EQ(docs[0].tokens, (std::vector<std::string>{"18:3", "8:3"}));
}

TEST(BuildItemDocuments, InterleavedItemsKeepFirstAppearanceOrder) {
  const std::vector<LayerSpec> specs = {{8, 1.0, false}};
  const auto docs = build_item_documents(std::vector{with_active("b", 8, 4, {1}), with_active("a", 8, 4, {2}),
                                                     with_active("b", 8, 4, {0}), with_active("c", 8, 4, {})},
                                         specs);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0], (Document{"b", {"8:0", "8:1"}}));
  EXPECT_EQ(docs[1], (Document{"a", {"8:2"}}));
  EXPECT_EQ(docs[2], (Document{"c", {}}));
}

TEST(BuildItemDocuments, UnknownLayerNamesTheLayer) {
  const std::vector<LayerSpec> specs = {{8, 1.0, false}};
  try {
    build_item_documents(std::vector{with_active("x", 31, 4, {1})}, specs);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("31"), std::string::npos);
  }
}

TEST(BuildItemDocuments, RejectsInvalidSpecs) {
  EXPECT_THROW(VisualDocumentBuilder(std::vector<LayerSpec>{{8, 0.0, false}}), ConfigError);
  EXPECT_THROW(VisualDocumentBuilder(std::vector<LayerSpec>{{8, 1.0, true, 0.0}}), ConfigError);
  EXPECT_THROW(VisualDocumentBuilder(std::vector<LayerSpec>{{8, 1.0, false}, {8, 2.0, false}}), ConfigError);
}

TEST(BuildItemDocuments, ProcessingAnImageTwiceChangesNothing) {
  std::mt19937 gen(17);
  const std::vector<LayerSpec> specs = {{8, 0.8, false}, {18, 0.8, true, 0.2}};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ActivationRecord> records;
    for (int i = 0; i < 6; ++i) {
      auto r = random_record(gen, i % 2 ? 18 : 8);
      r.item_id = "item" + std::to_string(gen() % 3);
      records.push_back(std::move(r));
    }
    auto doubled = records;
    doubled.insert(doubled.end(), records.begin(), records.end());
    EXPECT_EQ(build_item_documents(doubled, specs), build_item_documents(records, specs));
  }
}

TEST(BuildItemDocuments, StreamingMatchesInMemory) {
  std::mt19937 gen(23);
  std::vector<ActivationRecord> records;
  for (int i = 0; i < 20; ++i) {
    auto r = random_record(gen);
    r.item_id = "item" + std::to_string(gen() % 5);
    records.push_back(std::move(r));
  }
  const std::vector<LayerSpec> specs = {{8, 1.2, false}};
  std::istringstream in(write_activation_stream(records), std::ios::binary);
  EXPECT_EQ(build_item_documents(in, specs), build_item_documents(records, specs));
}
