#pragma once

// Pipeline stages as used by the command-line tool. Each stage maps input
// streams to output bytes and is deterministic given its inputs.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "styletopics/activation_stream.hpp"
#include "styletopics/config.hpp"
#include "styletopics/corpus.hpp"
#include "styletopics/documents.hpp"
#include "styletopics/lda.hpp"
#include "styletopics/model_io.hpp"
#include "styletopics/polylda.hpp"
#include "styletopics/style_eval.hpp"
#include "styletopics/text_vocab.hpp"
#include "styletopics/visual_vocab.hpp"

namespace styletopics {

struct LayerCalibration {
  std::uint32_t layer_id = 0;
  std::size_t records = 0;
  std::uint32_t channels = 0;
  double suggested_t1 = 0.0;  // percentile of |activation|
  double t1 = 0.0;            // threshold used for the density
  double density = 0.0;
  bool dense = false;
};

// Reads up to `sample` records per layer (0 = all). The density of a layer is
// measured at its entry in `fixed_t1`, else at `default_t1`, else at the
// suggested percentile threshold.
inline std::vector<LayerCalibration> calibrate(std::istream& activations, std::size_t sample, double percentile,
                                               const std::map<std::uint32_t, double>& fixed_t1 = {},
                                               std::optional<double> default_t1 = std::nullopt,
                                               const std::vector<std::uint32_t>& only_layers = {}) {
  std::map<std::uint32_t, std::vector<ActivationRecord>> by_layer;
  ActivationReader reader(activations);
  while (auto r = reader.next()) {
    if (!only_layers.empty() && std::find(only_layers.begin(), only_layers.end(), r->layer_id) == only_layers.end())
      continue;
    auto& bucket = by_layer[r->layer_id];
    if (sample == 0 || bucket.size() < sample) bucket.push_back(std::move(*r));
  }
  if (by_layer.empty()) throw ValidationError("activation stream has no records to calibrate on");
  std::vector<LayerCalibration> out;
  for (const auto& [layer, records] : by_layer) {
    LayerCalibration c;
    c.layer_id = layer;
    c.records = records.size();
    c.channels = records.front().channels;
    c.suggested_t1 = calibrate_threshold(records, layer, percentile);
    const auto fixed = fixed_t1.find(layer);
    c.t1 = fixed != fixed_t1.end() ? fixed->second : default_t1.value_or(c.suggested_t1);
    c.density = compute_layer_density(records, c.t1).at(layer);
    c.dense = classify_dense(c.density);
    out.push_back(c);
  }
  return out;
}

inline std::string format_calibration(const std::vector<LayerCalibration>& layers) {
  std::ostringstream out;
  out << "layer\trecords\tchannels\tsuggested_t1\tt1\tdensity\tdense\n";
  out << std::setprecision(9);
  for (const auto& c : layers) {
    out << c.layer_id << '\t' << c.records << '\t' << c.channels << '\t' << c.suggested_t1 << '\t' << c.t1 << '\t'
        << c.density << '\t' << (c.dense ? "true" : "false") << '\n';
  }
  return std::move(out).str();
}

inline std::string extract_documents(std::istream& activations, const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw ConfigError("no layers configured");
  return format_documents(build_item_documents(activations, layers));
}

inline std::string text_documents(std::istream& items, const Stopwords& stopwords) {
  return format_documents(build_text_documents(read_item_table(items), stopwords));
}

enum class ModelKind { lda, polylda };

// One document stream per language; LDA takes exactly one.
inline std::string train_model(const std::vector<std::istream*>& documents, const TrainParams& params,
                               ModelKind kind, std::ostream* log = nullptr) {
  if (kind == ModelKind::lda) {
    if (documents.size() != 1) throw ConfigError("lda training takes exactly one document file");
    const Corpus corpus = encode_corpus(*documents.front());
    LdaProgress progress;
    if (log)
      progress = [log](std::uint32_t sweep, const LdaModel& m) {
        *log << "sweep " << sweep << " log-likelihood " << std::setprecision(10) << log_likelihood(m) << '\n';
      };
    return dump_model(to_json(train_lda(corpus, params, progress)));
  }
  if (documents.empty()) throw ConfigError("polylda training needs at least one document file");
  std::vector<std::vector<Document>> languages;
  for (auto* in : documents) languages.push_back(read_documents(*in));
  const TupleCorpus corpus = align_tuples(languages);
  PolyLdaProgress progress;
  if (log)
    progress = [log](std::uint32_t sweep, const PolyLdaModel& m) {
      *log << "sweep " << sweep << " log-likelihood " << std::setprecision(10) << log_likelihood(m) << '\n';
    };
  return dump_model(to_json(train_polylda(corpus, params, progress)));
}

inline std::string format_topics(const AnyModel& model, std::size_t n) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  auto line = [&](const std::string& label, const RankedWords& words) {
    out << label << ':';
    for (const auto& [token, p] : words) out << ' ' << token << " (" << p << ')';
    out << '\n';
  };
  if (const auto* lda = std::get_if<LdaModel>(&model)) {
    for (Topic k = 0; k < lda->num_topics; ++k) line("topic " + std::to_string(k), top_words(*lda, k, n));
  } else {
    const auto& poly = std::get<PolyLdaModel>(model);
    for (Topic k = 0; k < poly.num_topics; ++k) {
      const auto lists = top_words_per_language(poly, k, n);
      for (std::size_t l = 0; l < lists.size(); ++l)
        line("topic " + std::to_string(k) + " language " + std::to_string(l), lists[l]);
    }
  }
  return std::move(out).str();
}

inline TopicSpace topic_space(const AnyModel& model) {
  if (const auto* lda = std::get_if<LdaModel>(&model)) return TopicSpace(lda->doc_ids, estimate_theta(*lda));
  const auto& poly = std::get<PolyLdaModel>(model);
  return TopicSpace(poly.item_ids, estimate_shared_theta(poly));
}

}  // namespace styletopics
