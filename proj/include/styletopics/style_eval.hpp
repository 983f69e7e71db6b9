#pragma once

// Scores a topic space against co-click pairs: how far apart highly
// co-clicked items (top recs) and rarely co-clicked items (bottom recs) sit
// in theta space, plus per-item concentration diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "styletopics/errors.hpp"
#include "styletopics/matrix.hpp"

namespace styletopics {

enum class Metric { euclidean, cosine, hellinger };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::cosine: return "cosine";
    case Metric::hellinger: return "hellinger";
  }
  return "unknown";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  if (s == "hellinger") return Metric::hellinger;
  throw ConfigError("unknown metric '" + std::string(s) + "' (expected euclidean, cosine or hellinger)");
}

inline double euclidean_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(s);
}

// 1 - cosine similarity. A zero vector has similarity 0 with anything but
// another zero vector.
inline double cosine_distance(std::span<const double> p, std::span<const double> q) {
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 && qq == 0.0) return 0.0;
  if (pp == 0.0 || qq == 0.0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(pp) * std::sqrt(qq)), 0.0, 2.0);
}

// (1/sqrt 2) * || sqrt(p) - sqrt(q) ||_2 ; inputs are distributions.
inline double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    s += d * d;
  }
  return std::sqrt(s) / std::sqrt(2.0);
}

inline double distance(Metric m, std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("distance between vectors of different length");
  switch (m) {
    case Metric::euclidean: return euclidean_distance(p, q);
    case Metric::cosine: return cosine_distance(p, q);
    case Metric::hellinger: return hellinger_distance(p, q);
  }
  return 0.0;
}

enum class PairLabel { top_recs, bottom_recs };

struct ItemPair {
  std::string a;
  std::string b;
  double score = 0.0;
};

struct PairSet {
  std::vector<ItemPair> pairs;
  PairLabel label = PairLabel::top_recs;
};

struct DistanceStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;    // population
  double skewness = 0.0;  // g1 = m3 / m2^(3/2), 0 when m2 == 0
  std::vector<double> distances;
};

// Moments are accumulated in input order so results are reproducible.
inline DistanceStats summarize(std::vector<double> distances) {
  DistanceStats s;
  s.n = distances.size();
  s.distances = std::move(distances);
  if (s.n == 0) return s;
  const auto& d = s.distances;
  double sum = 0.0;
  for (double x : d) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  if (*lo == *hi) return s;
  double m2 = 0.0, m3 = 0.0;
  for (double x : d) {
    const double c = x - s.mean;
    m2 += c * c;
    m3 += c * c * c;
  }
  m2 /= static_cast<double>(s.n);
  m3 /= static_cast<double>(s.n);
  s.stddev = std::sqrt(m2);
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return s;
}

// Item id -> row of a theta matrix.
class TopicSpace {
 public:
  TopicSpace(std::vector<std::string> ids, Matrix<double> theta) : ids_(std::move(ids)), theta_(std::move(theta)) {
    if (ids_.size() != theta_.rows()) throw ValidationError("topic space: id count does not match theta rows");
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
  }

  bool contains(const std::string& id) const { return index_.contains(id); }
  std::span<const double> operator[](const std::string& id) const { return theta_.row(index_.at(id)); }
  const Matrix<double>& theta() const noexcept { return theta_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
  Matrix<double> theta_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Throws ValidationError listing every missing item id.
inline DistanceStats pair_distances(const TopicSpace& space, const PairSet& pairs, Metric metric) {
  std::vector<std::string> missing;
  for (const auto& p : pairs.pairs) {
    for (const auto* id : {&p.a, &p.b}) {
      if (!space.contains(*id) && std::find(missing.begin(), missing.end(), *id) == missing.end())
        missing.push_back(*id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "items missing from topic space:";
    for (const auto& id : missing) msg += " " + id;
    throw ValidationError(msg);
  }
  std::vector<double> d;
  d.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs) d.push_back(distance(metric, space[p.a], space[p.b]));
  return summarize(std::move(d));
}

inline double separation_ratio(const DistanceStats& top, const DistanceStats& bottom) {
  if (top.n == 0 || bottom.n == 0) throw ValidationError("separation ratio needs non-empty pair sets");
  if (!(top.mean > 0.0)) throw ValidationError("separation ratio undefined: top-recs mean distance is zero");
  return bottom.mean / top.mean;
}

struct Concentration {
  double l2_norm = 0.0;
  double entropy = 0.0;  // nats
};

inline Concentration concentration(std::span<const double> row) {
  double sum = 0.0, sq = 0.0, h = 0.0;
  for (double p : row) {
    if (p < 0.0) throw ValidationError("theta row has a negative entry");
    sum += p;
    sq += p * p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::fabs(sum - 1.0) > 1e-6) throw ValidationError("theta row does not sum to 1");
  return {std::sqrt(sq), std::max(0.0, h)};
}

inline std::vector<Concentration> concentration_stats(const Matrix<double>& theta) {
  std::vector<Concentration> out;
  out.reserve(theta.rows());
  for (std::size_t r = 0; r < theta.rows(); ++r) out.push_back(concentration(theta.row(r)));
  return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace detail

// CSV rows "item_a,item_b,score". A first row whose score is not numeric is
// taken as a header.
inline PairSet read_pairs(std::istream& in, PairLabel label) {
  PairSet set{{}, label};
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(detail::trim(std::string_view(line).substr(pos, comma == std::string::npos ? comma : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 3) throw ParseError(line_no, "expected item_a,item_b,score");
    double score = 0.0;
    const bool numeric = detail::parse_double(f[2], score);
    if (first) {
      first = false;
      if (!numeric) continue;
    }
    if (!numeric) throw ParseError(line_no, "score is not a number");
    if (f[0].empty() || f[1].empty()) throw ParseError(line_no, "empty item id");
    if (f[0] == f[1]) throw ParseError(line_no, "pair of an item with itself ('" + f[0] + "')");
    set.pairs.push_back({std::move(f[0]), std::move(f[1]), score});
  }
  return set;
}

struct EvaluationReport {
  Metric metric = Metric::euclidean;
  DistanceStats top;
  DistanceStats bottom;
  double ratio = 0.0;
  std::vector<Concentration> concentration;
  std::size_t num_topics = 0;
};

inline EvaluationReport evaluate(const TopicSpace& space, const PairSet& top, const PairSet& bottom, Metric metric) {
  EvaluationReport r;
  r.metric = metric;
  r.top = pair_distances(space, top, metric);
  r.bottom = pair_distances(space, bottom, metric);
  r.ratio = separation_ratio(r.top, r.bottom);
  r.concentration = concentration_stats(space.theta());
  r.num_topics = space.theta().cols();
  return r;
}

inline nlohmann::json to_json(const DistanceStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}, {"skewness", s.skewness}};
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  double l2 = 0.0, h = 0.0;
  double l2_min = 1.0, l2_max = 0.0;
  for (const auto& c : r.concentration) {
    l2 += c.l2_norm;
    h += c.entropy;
    l2_min = std::min(l2_min, c.l2_norm);
    l2_max = std::max(l2_max, c.l2_norm);
  }
  const double n = static_cast<double>(r.concentration.size());
  nlohmann::json conc = {{"items", r.concentration.size()}, {"K", r.num_topics}};
  if (!r.concentration.empty()) {
    conc["mean_l2_norm"] = l2 / n;
    conc["min_l2_norm"] = l2_min;
    conc["max_l2_norm"] = l2_max;
    conc["mean_entropy"] = h / n;
    conc["max_entropy"] = std::log(static_cast<double>(r.num_topics));
  }
  return {{"metric", to_string(r.metric)},
          {"top", to_json(r.top)},
          {"bottom", to_json(r.bottom)},
          {"ratio", r.ratio},
          {"concentration_summary", std::move(conc)}};
}

// "set,item_a,item_b,distance" rows for plotting.
inline void write_pair_distances(std::ostream& out, const EvaluationReport& r, const PairSet& top,
                                 const PairSet& bottom) {
  out << "set,item_a,item_b,distance\n";
  auto rows = [&](const char* name, const PairSet& set, const DistanceStats& s) {
    for (std::size_t i = 0; i < set.pairs.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", s.distances[i]);
      out << name << ',' << set.pairs[i].a << ',' << set.pairs[i].b << ',' << buf << '\n';
    }
  };
  rows("top", top, r.top);
  rows("bottom", bottom, r.bottom);
}

}  // namespace styletopics
