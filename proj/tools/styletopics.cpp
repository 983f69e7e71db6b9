// styletopics: visual/text documents, LDA and PolyLDA training, and
// co-click pair evaluation from the command line.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input or configuration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "styletopics/styletopics.hpp"

namespace fs = std::filesystem;
using namespace styletopics;

namespace {

struct Overrides {
  std::string config;
  std::string layers;
  std::string t1;
  std::string dense;
  std::string grid_fraction;
  std::string k, alpha, beta, iters, seed, metric, percentile, sample;
};

void add_layer_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--layers", o.layers, "comma-separated layer ids");
  cmd->add_option("--t1", o.t1, "threshold for all layers, or layer:t1 pairs");
  cmd->add_option("--dense", o.dense, "comma-separated dense layer ids");
  cmd->add_option("--grid-fraction", o.grid_fraction, "secondary-rule cell fraction");
}

void add_train_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--k", o.k, "number of topics");
  cmd->add_option("--alpha", o.alpha, "doc-topic Dirichlet concentration (default 50/K)");
  cmd->add_option("--beta", o.beta, "topic-word Dirichlet concentration");
  cmd->add_option("--iters", o.iters, "Gibbs sweeps");
  cmd->add_option("--seed", o.seed, "random seed");
}

ConfigValues load_config(const Overrides& o) {
  ConfigValues v;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw InputError("cannot open config file " + o.config);
    v = ConfigValues::parse(in);
  }
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) v.set(key, value);
  };
  put("layers", o.layers);
  if (!o.t1.empty()) v.set_thresholds(o.t1);
  put("dense", o.dense);
  put("grid_fraction", o.grid_fraction);
  put("k", o.k);
  put("alpha", o.alpha);
  put("beta", o.beta);
  put("iterations", o.iters);
  put("seed", o.seed);
  put("metric", o.metric);
  put("percentile", o.percentile);
  put("sample", o.sample);
  return v;
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

void check_distinct(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  for (const auto& out : outputs) {
    if (out.empty()) continue;
    for (const auto& in : inputs) {
      std::error_code ec;
      if (out == in || (fs::exists(out) && fs::equivalent(out, in, ec)))
        throw ConfigError("output path " + out + " is also an input");
    }
  }
}

// Writes to `path`, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& bytes, bool binary = false) {
  if (path.empty() || path == "-") {
    std::cout << bytes << std::flush;
    return;
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  out << bytes;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Style topic models over visual and text item documents"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);

  std::string activations, out, items, stopwords_path, model_path, mode = "lda", top_path, bottom_path,
                                                                   distances_path;
  std::vector<std::string> docs;
  std::size_t top_n = 10;

  auto* calibrate_cmd = app.add_subcommand("calibrate", "suggest per-layer t1 and classify dense layers");
  calibrate_cmd->add_option("activations", activations, "OVAC activation stream")->required();
  calibrate_cmd->add_option("--sample", o.sample, "records per layer to sample (0 = all)");
  calibrate_cmd->add_option("--percentile", o.percentile, "nearest-rank percentile of |activation| for t1");
  calibrate_cmd->add_option("--layers", o.layers, "restrict to these layer ids");
  calibrate_cmd->add_option("--t1", o.t1, "measure density at this threshold instead of the suggestion");
  calibrate_cmd->add_option("--out", out, "output table (default stdout)");

  auto* extract_cmd = app.add_subcommand("extract-docs", "build visual documents from an activation stream");
  extract_cmd->add_option("activations", activations, "OVAC activation stream")->required();
  add_layer_flags(extract_cmd, o);
  extract_cmd->add_option("--out", out, "document file (default stdout)");

  auto* text_cmd = app.add_subcommand("text-docs", "build text documents from an item table");
  text_cmd->add_option("items", items, "CSV/TSV with item_id, title, attributes")->required();
  text_cmd->add_option("--stopwords", stopwords_path, "stopword list, one per line");
  text_cmd->add_option("--out", out, "document file (default stdout)");

  auto* train_cmd = app.add_subcommand("train", "train an LDA or PolyLDA model");
  train_cmd->add_option("docs", docs, "document file(s); one per language for polylda")->required();
  train_cmd->add_option("--mode", mode, "lda or polylda")->check(CLI::IsMember({"lda", "polylda"}));
  add_train_flags(train_cmd, o);
  train_cmd->add_option("--out", out, "model JSON (default stdout)");

  auto* topics_cmd = app.add_subcommand("topics", "print top tokens per topic");
  topics_cmd->add_option("model", model_path, "model JSON")->required();
  topics_cmd->add_option("--n", top_n, "tokens per topic");

  auto* eval_cmd = app.add_subcommand("eval", "pair-distance evaluation of a topic space");
  eval_cmd->add_option("model", model_path, "model JSON")->required();
  eval_cmd->add_option("--top", top_path, "top-recs pairs CSV")->required();
  eval_cmd->add_option("--bottom", bottom_path, "bottom-recs pairs CSV")->required();
  eval_cmd->add_option("--metric", o.metric, "euclidean, cosine or hellinger");
  eval_cmd->add_option("--distances", distances_path, "optional per-pair distances CSV");
  eval_cmd->add_option("--out", out, "report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const ConfigValues values = load_config(o);
    const PipelineConfig config = values.resolve();

    if (*calibrate_cmd) {
      check_distinct({activations, o.config}, {out});
      std::map<std::uint32_t, double> fixed;
      for (const auto& spec : config.layers) fixed[spec.layer_id] = spec.t1;
      std::ifstream in = open_input(activations, true);
      emit(out, format_calibration(calibrate(in, config.calibration_sample, config.percentile, fixed,
                                             config.default_t1, values.layer_ids())));
    } else if (*extract_cmd) {
      check_distinct({activations, o.config}, {out});
      std::ifstream in = open_input(activations, true);
      emit(out, extract_documents(in, config.layers));
    } else if (*text_cmd) {
      check_distinct({items, stopwords_path, o.config}, {out});
      Stopwords stopwords;
      if (!stopwords_path.empty()) {
        std::ifstream sw = open_input(stopwords_path);
        stopwords = read_stopwords(sw);
      }
      std::ifstream in = open_input(items);
      emit(out, text_documents(in, stopwords));
    } else if (*train_cmd) {
      std::vector<std::string> inputs = docs;
      inputs.push_back(o.config);
      check_distinct(inputs, {out});
      std::vector<std::ifstream> files;
      for (const auto& d : docs) files.push_back(open_input(d));
      std::vector<std::istream*> streams;
      for (auto& f : files) streams.push_back(&f);
      const auto kind = mode == "polylda" ? ModelKind::polylda : ModelKind::lda;
      emit(out, train_model(streams, config.train, kind, &std::cerr));
    } else if (*topics_cmd) {
      std::cout << format_topics(load_model(model_path), top_n) << std::flush;
    } else if (*eval_cmd) {
      check_distinct({model_path, top_path, bottom_path, o.config}, {out, distances_path});
      const TopicSpace space = topic_space(load_model(model_path));
      std::ifstream top_in = open_input(top_path);
      std::ifstream bottom_in = open_input(bottom_path);
      const PairSet top = read_pairs(top_in, PairLabel::top_recs);
      const PairSet bottom = read_pairs(bottom_in, PairLabel::bottom_recs);
      const EvaluationReport report = evaluate(space, top, bottom, config.metric);
      if (!distances_path.empty()) {
        std::ostringstream csv;
        write_pair_distances(csv, report, top, bottom);
        emit(distances_path, csv.str());
      }
      emit(out, to_json(report).dump(2) + "\n");
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
