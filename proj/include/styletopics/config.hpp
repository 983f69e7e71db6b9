#pragma once

// Pipeline configuration: a "key = value" file ('#' starts a comment) whose
// entries can be overridden by command-line flags.
//
//   layers        = 8,18,31        layer ids turned into visual words
//   t1            = 1.5            activation threshold for every layer
//   t1.<layer>    = 2.0            per-layer threshold (wins over t1)
//   dense         = 8,18           layers using the secondary threshold
//   grid_fraction = 0.05           secondary rule cell fraction, (0, 1]
//   percentile    = 90             calibration percentile, (0, 100]
//   sample        = 0              calibration records per layer (0 = all)
//   k, alpha, beta, iterations, seed
//   metric        = euclidean      euclidean | cosine | hellinger

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "styletopics/errors.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/style_eval.hpp"
#include "styletopics/visual_vocab.hpp"

namespace styletopics {

struct PipelineConfig {
  std::vector<LayerSpec> layers;
  TrainParams train;
  Metric metric = Metric::euclidean;
  double percentile = kDefaultCalibrationPercentile;
  std::size_t calibration_sample = 0;
  std::optional<double> default_t1;  // the global "t1" key, if set
};

class ConfigValues {
 public:
  static ConfigValues parse(std::istream& in) {
    ConfigValues v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string text = trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(text.substr(0, eq));
      if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      v.set(key, trim(text.substr(eq + 1)));
    }
    return v;
  }

  void set(const std::string& key, std::string value) {
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = std::move(value);
  }

  // "--t1 1.5" sets the global threshold; "--t1 8:1.5,18:2" sets per-layer ones.
  void set_thresholds(const std::string& spec) {
    if (spec.find(':') == std::string::npos) {
      set("t1", spec);
      return;
    }
    for (const auto& item : split_list(spec)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("bad threshold entry '" + item + "' (expected layer:t1)");
      set("t1." + trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::string& get(const std::string& key) const { return values_.at(key); }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (has("k")) c.train.num_topics = to_uint<std::uint32_t>("k");
    if (has("alpha")) c.train.alpha = to_double("alpha");
    if (has("beta")) c.train.beta = to_double("beta");
    if (has("iterations")) c.train.iterations = to_uint<std::uint32_t>("iterations");
    if (has("seed")) c.train.seed = to_uint<std::uint64_t>("seed");
    if (has("metric")) c.metric = parse_metric(get("metric"));
    if (has("percentile")) c.percentile = to_double("percentile");
    if (has("sample")) c.calibration_sample = to_uint<std::size_t>("sample");
    if (has("t1")) {
      c.default_t1 = to_double("t1");
      if (!(*c.default_t1 > 0.0)) throw ConfigError("t1 must be positive");
    }
    if (!(c.percentile > 0.0 && c.percentile <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
    try {
      validate(c.train);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }

    std::set<std::uint32_t> dense;
    if (has("dense"))
      for (const auto& s : split_list(get("dense"))) dense.insert(to_uint<std::uint32_t>("dense", s));
    const double fraction = has("grid_fraction") ? to_double("grid_fraction") : kDefaultGridFraction;
    if (has("layers")) {
      std::set<std::uint32_t> seen;
      for (const auto& s : split_list(get("layers"))) {
        LayerSpec spec;
        spec.layer_id = to_uint<std::uint32_t>("layers", s);
        if (!seen.insert(spec.layer_id).second) throw ConfigError("layer " + s + " listed twice");
        const std::string own = "t1." + std::to_string(spec.layer_id);
        if (has(own))
          spec.t1 = to_double(own);
        else if (has("t1"))
          spec.t1 = to_double("t1");
        else
          throw ConfigError("no t1 threshold configured for layer " + std::to_string(spec.layer_id));
        spec.dense = dense.contains(spec.layer_id);
        spec.grid_fraction = fraction;
        validate(spec);
        c.layers.push_back(spec);
      }
      for (auto d : dense)
        if (!seen.contains(d)) throw ConfigError("dense layer " + std::to_string(d) + " is not in layers");
    }
    return c;
  }

  // Layer ids from the "layers" key, empty when unset.
  std::vector<std::uint32_t> layer_ids() const {
    std::vector<std::uint32_t> ids;
    if (has("layers"))
      for (const auto& s : split_list(get("layers"))) ids.push_back(to_uint<std::uint32_t>("layers", s));
    return ids;
  }

 private:
  static bool known(const std::string& key) {
    static const std::set<std::string, std::less<>> keys = {
        "layers", "t1",   "dense", "grid_fraction", "percentile", "sample", "k",
        "alpha",  "beta", "iterations", "seed",     "metric"};
    if (keys.contains(key)) return true;
    if (key.starts_with("t1.")) {
      const auto rest = std::string_view(key).substr(3);
      return !rest.empty() && rest.find_first_not_of("0123456789") == std::string_view::npos;
    }
    return false;
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto stop = comma == std::string::npos ? s.size() : comma;
      std::string item = trim(std::string_view(s).substr(pos, stop - pos));
      if (!item.empty()) out.push_back(std::move(item));
      pos = stop + 1;
    }
    return out;
  }

  template <typename T>
  T to_uint(const std::string& key, const std::string& text) const {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ConfigError("config '" + key + "': '" + text + "' is not a non-negative integer");
    return v;
  }

  template <typename T>
  T to_uint(const std::string& key) const {
    return to_uint<T>(key, get(key));
  }

  double to_double(const std::string& key) const {
    const std::string& text = get(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
      throw ConfigError("config '" + key + "': '" + text + "' is not a number");
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace styletopics
