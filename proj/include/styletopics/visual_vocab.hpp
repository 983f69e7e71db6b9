#pragma once

// Bag-of-visual-words documents from convolutional activations.
//
// A channel is a visual word. It is active for an image when the absolute
// activation exceeds t1 somewhere in its grid (primary rule), or, for layers
// classified as dense, in at least ceil(grid_fraction * H * W) cells
// (secondary rule). An item's document is the union over its images and the
// configured layers of "<layer>:<channel>" tokens.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "styletopics/activation_stream.hpp"
#include "styletopics/documents.hpp"
#include "styletopics/errors.hpp"

namespace styletopics {

inline constexpr double kDefaultGridFraction = 1.0 / 20.0;
inline constexpr double kDenseLayerDensity = 1.0 / 3.0;
inline constexpr double kDefaultCalibrationPercentile = 90.0;

struct LayerSpec {
  std::uint32_t layer_id = 0;
  double t1 = 1.0;
  bool dense = false;
  double grid_fraction = kDefaultGridFraction;
};

inline void validate(const LayerSpec& spec) {
  const std::string layer = std::to_string(spec.layer_id);
  if (!(spec.t1 > 0.0) || !std::isfinite(spec.t1))
    throw ConfigError("layer " + layer + ": t1 must be a positive finite number");
  if (!(spec.grid_fraction > 0.0 && spec.grid_fraction <= 1.0))
    throw ConfigError("layer " + layer + ": grid_fraction must lie in (0, 1]");
}

// Number of above-threshold cells a dense-layer channel needs. A product
// landing within 1e-9 above an integer is treated as that integer so that
// e.g. 0.05 * 20 requires one cell, not two.
inline std::size_t required_cells(double grid_fraction, std::size_t grid_size) {
  const double exact = grid_fraction * static_cast<double>(grid_size);
  double needed = std::ceil(exact);
  if (needed - exact > 1.0 - 1e-9) needed -= 1.0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(needed));
}

inline std::size_t cells_above(std::span<const float> grid, double t1) {
  std::size_t n = 0;
  for (float v : grid) n += std::fabs(static_cast<double>(v)) > t1;
  return n;
}

inline bool any_above(std::span<const float> grid, double t1) {
  return std::any_of(grid.begin(), grid.end(),
                     [t1](float v) { return std::fabs(static_cast<double>(v)) > t1; });
}

// Active channel indices, ascending.
inline std::vector<std::uint32_t> active_channels(const ActivationRecord& record, const LayerSpec& spec) {
  if (record.layer_id != spec.layer_id)
    throw ConfigError("record layer " + std::to_string(record.layer_id) + " does not match layer spec " +
                      std::to_string(spec.layer_id));
  std::vector<std::uint32_t> active;
  const std::size_t needed = required_cells(spec.grid_fraction, record.grid_size());
  for (std::uint32_t c = 0; c < record.channels; ++c) {
    const auto grid = record.channel(c);
    const bool on = spec.dense ? cells_above(grid, spec.t1) >= needed : any_above(grid, spec.t1);
    if (on) active.push_back(c);
  }
  return active;
}

// Mean fraction of channels active under the primary rule, per layer.
inline std::map<std::uint32_t, double> compute_layer_density(std::span<const ActivationRecord> sample,
                                                             double t1) {
  if (sample.empty()) throw ValidationError("layer density needs a non-empty sample");
  std::map<std::uint32_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : sample) {
    std::size_t on = 0;
    for (std::uint32_t c = 0; c < r.channels; ++c) on += any_above(r.channel(c), t1);
    auto& [sum, count] = acc[r.layer_id];
    sum += static_cast<double>(on) / static_cast<double>(r.channels);
    ++count;
  }
  std::map<std::uint32_t, double> density;
  for (const auto& [layer, a] : acc) density[layer] = a.first / static_cast<double>(a.second);
  return density;
}

inline bool classify_dense(double density) { return density > kDenseLayerDensity; }

// Nearest-rank percentile of |value| over all cells of the sampled records
// belonging to `layer_id`.
inline double calibrate_threshold(std::span<const ActivationRecord> sample, std::uint32_t layer_id,
                                  double percentile = kDefaultCalibrationPercentile) {
  if (!(percentile > 0.0 && percentile <= 100.0))
    throw ValidationError("percentile must lie in (0, 100]");
  std::vector<float> magnitudes;
  for (const auto& r : sample) {
    if (r.layer_id != layer_id) continue;
    for (float v : r.values) magnitudes.push_back(std::fabs(v));
  }
  if (magnitudes.empty())
    throw ValidationError("no sampled cells for layer " + std::to_string(layer_id));
  const auto n = magnitudes.size();
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   magnitudes.end());
  return magnitudes[rank - 1];
}

inline std::string visual_token(std::uint32_t layer_id, std::uint32_t channel) {
  return std::to_string(layer_id) + ":" + std::to_string(channel);
}

// Accumulates records (in any order, items may interleave) into per-item
// visual documents.
class VisualDocumentBuilder {
 public:
  explicit VisualDocumentBuilder(std::span<const LayerSpec> specs) {
    for (const auto& s : specs) {
      validate(s);
      if (!specs_.emplace(s.layer_id, s).second)
        throw ConfigError("layer " + std::to_string(s.layer_id) + " configured twice");
    }
  }

  void add(const ActivationRecord& record) {
    const auto spec = specs_.find(record.layer_id);
    if (spec == specs_.end())
      throw ConfigError("activation record for item '" + record.item_id + "' uses unconfigured layer " +
                        std::to_string(record.layer_id));
    auto [it, inserted] = index_.try_emplace(record.item_id, items_.size());
    if (inserted) items_.push_back({record.item_id, {}});
    auto& tokens = items_[it->second].second;
    for (std::uint32_t c : active_channels(record, spec->second))
      tokens.insert(visual_token(record.layer_id, c));
  }

  // Ordered by first appearance of each item; tokens sorted lexicographically.
  std::vector<VisualDocument> documents() const {
    std::vector<VisualDocument> docs;
    docs.reserve(items_.size());
    for (const auto& [id, tokens] : items_) docs.push_back({id, {tokens.begin(), tokens.end()}});
    return docs;
  }

 private:
  std::map<std::uint32_t, LayerSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::pair<std::string, std::set<std::string>>> items_;
};

inline std::vector<VisualDocument> build_item_documents(std::span<const ActivationRecord> records,
                                                        std::span<const LayerSpec> specs) {
  VisualDocumentBuilder builder(specs);
  for (const auto& r : records) builder.add(r);
  return builder.documents();
}

// Streaming variant: reads records one at a time.
inline std::vector<VisualDocument> build_item_documents(std::istream& stream,
                                                        std::span<const LayerSpec> specs) {
  VisualDocumentBuilder builder(specs);
  ActivationReader reader(stream);
  while (auto r = reader.next()) builder.add(*r);
  return builder.documents();
}

}  // namespace styletopics
