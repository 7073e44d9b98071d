// melodist: synthetic corpora, training, distance queries and evaluations.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "melodist/corpus_io.hpp"
#include "melodist/error.hpp"
#include "melodist/metric.hpp"
#include "melodist/neural/checkpoint.hpp"
#include "melodist/neural/train.hpp"
#include "melodist/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace melodist;

namespace {

enum Exit { kOk = 0, kUsage = 2, kConfig = 3, kData = 4, kNumerical = 5 };

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::BadOrder:
      return kUsage;
    case ErrorCode::Config:
      return kConfig;
    case ErrorCode::NonFinite:
    case ErrorCode::Divergence:
      return kNumerical;
    default:
      return kData;
  }
}

// Every field a run can be configured with. Flags override the config file.
struct RunConfig {
  std::string mode = "invariant";
  TrainingConfig training;
  std::string corpus;
  int length = 0;
  int hop = 1;
  std::string model;
  std::string rank = "spearman";
  int k = 10;
  bool dedup = false;
  int n_pairs = 500;
  int bins = 30;
  std::string out;
};

json to_json(const RunConfig& c) {
  const auto& t = c.training;
  return {
      {"mode", c.mode},
      {"lambda", t.lambda},
      {"lambda_warmup", t.lambda_warmup},
      {"learning_rate", t.learning_rate},
      {"lr_decay", t.lr_decay},
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"seed", t.seed},
      {"teacher_forcing", t.teacher_forcing},
      {"sampling_prob", t.sampling_prob},
      {"clip_norm", t.clip_norm},
      {"layers", t.layers},
      {"hidden", t.hidden},
      {"features", t.features},
      {"label_dim", t.label_dim},
      {"corpus", c.corpus},
      {"length", c.length},
      {"hop", c.hop},
      {"model", c.model},
      {"rank", c.rank},
      {"k", c.k},
      {"dedup", c.dedup},
      {"n_pairs", c.n_pairs},
      {"bins", c.bins},
      {"out", c.out},
  };
}

int line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<int>(std::count(text.begin(), end, '\n'));
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Config, std::string("config field '") + key + "' has the wrong type");
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": line " + std::to_string(line_of(text, e.byte)) + ": malformed JSON");
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, path + ": config must be a JSON object");
  const json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::Config, "unknown config field '" + key + "'");
  }
  auto& t = c.training;
  take(j, "mode", c.mode);
  take(j, "lambda", t.lambda);
  take(j, "lambda_warmup", t.lambda_warmup);
  take(j, "learning_rate", t.learning_rate);
  take(j, "lr_decay", t.lr_decay);
  take(j, "epochs", t.epochs);
  take(j, "batch_size", t.batch_size);
  take(j, "seed", t.seed);
  take(j, "teacher_forcing", t.teacher_forcing);
  take(j, "sampling_prob", t.sampling_prob);
  take(j, "clip_norm", t.clip_norm);
  take(j, "layers", t.layers);
  take(j, "hidden", t.hidden);
  take(j, "features", t.features);
  take(j, "label_dim", t.label_dim);
  take(j, "corpus", c.corpus);
  take(j, "length", c.length);
  take(j, "hop", c.hop);
  take(j, "model", c.model);
  take(j, "rank", c.rank);
  take(j, "k", c.k);
  take(j, "dedup", c.dedup);
  take(j, "n_pairs", c.n_pairs);
  take(j, "bins", c.bins);
  take(j, "out", c.out);
  return c;
}

// Values given on the command line, applied over the config file.
struct Overrides {
  std::string config;
  std::optional<std::string> model, corpus, rank, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  bool dedup = false;
  std::optional<int> n_pairs;

  RunConfig resolve() const {
    RunConfig c = load_config(config);
    if (model) c.model = *model;
    if (corpus) c.corpus = *corpus;
    if (rank) c.rank = *rank;
    if (out) c.out = *out;
    if (seed) c.training.seed = *seed;
    if (k) c.k = *k;
    if (dedup) c.dedup = true;
    if (n_pairs) c.n_pairs = *n_pairs;
    return c;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
}
void add_model(CLI::App* cmd, Overrides& o) { cmd->add_option("--model", o.model, "checkpoint path"); }
void add_corpus(CLI::App* cmd, Overrides& o) { cmd->add_option("--corpus", o.corpus, "JSONL corpus path"); }
void add_rank(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--rank", o.rank, "spearman | tspearman:<l> | kendall");
}
void add_seed(CLI::App* cmd, Overrides& o) { cmd->add_option("--seed", o.seed, "random seed"); }
void add_out(CLI::App* cmd, Overrides& o, const char* what) { cmd->add_option("--out", o.out, what); }

std::string require(const std::string& value, const char* field) {
  if (value.empty()) throw Error(ErrorCode::Usage, std::string("missing --") + field);
  return value;
}

fs::path existing(const std::string& value, const char* field) {
  const fs::path p = require(value, field);
  if (!fs::exists(p)) throw Error(ErrorCode::Io, std::string(field) + " not found: " + p.string());
  return p;
}

Corpus corpus_for(const RunConfig& c) { return load_corpus(existing(c.corpus, "corpus"), c.length, c.hop); }

DistanceSpec spec_for(const RunConfig& c, const ModelParams& model) {
  auto spec = parse_rank(c.rank);
  spec.model = &model;
  check_spec(spec);
  return spec;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

std::string tokens_json(const TokenSequence& s) {
  json a = json::array();
  for (const auto& t : s) a.push_back(to_string(t));
  return a.dump();
}

int cmd_synth(std::uint64_t seed, int count, int length, const std::string& out) {
  if (count < 1) throw Error(ErrorCode::Usage, "--count must be >= 1");
  if (length < 1) throw Error(ErrorCode::Usage, "--length must be >= 1");
  const auto corpus = generate_synthetic_corpus(seed, count, length);
  write_corpus(require(out, "out"), corpus);
  return kOk;
}

int cmd_train(const RunConfig& c) {
  const fs::path out = require(c.out, "out");
  const Mode mode = parse_mode(c.mode);
  const auto corpus = corpus_for(c);
  fs::create_directories(out);
  write_text(out / "config.json", to_json(c).dump(2) + "\n");
  std::ofstream log(out / "train_log.csv");
  if (!log) throw Error(ErrorCode::Io, "cannot write " + (out / "train_log.csv").string());
  log << "epoch,loss,l1_term\n";
  const auto result = train(c.training, corpus, mode, [&](const EpochRecord& e) {
    char line[96];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", e.epoch, e.loss, e.l1_term);
    log << line << std::flush;
    std::fprintf(stderr, "epoch %d loss %.4f\n", e.epoch, e.loss);
  });
  save_model(out / "model.ckpt", result.params);
  std::fprintf(stderr, "greedy reconstruction accuracy %.4f\n",
               reconstruction_accuracy(result.params, corpus.sequences));
  return kOk;
}

int cmd_dist(const RunConfig& c, const std::string& a, const std::string& b) {
  const auto model = load_model(existing(c.model, "model"));
  const auto spec = spec_for(c, model);
  std::printf("%.17g\n", corpus_distance(spec, parse_sequence(a), parse_sequence(b)));
  return kOk;
}

int cmd_knn(const RunConfig& c, const std::string& query) {
  const auto model = load_model(existing(c.model, "model"));
  const auto spec = spec_for(c, model);
  const auto corpus = corpus_for(c);
  if (c.k < 1) throw Error(ErrorCode::Usage, "--k must be >= 1");
  const EncodedSet set(model, corpus.sequences);
  const auto q = parse_sequence(query);
  json results = json::array();
  for (const auto& n : knn(spec, q, set, static_cast<std::size_t>(c.k), c.dedup)) {
    results.push_back({{"index", n.index},
                       {"id", corpus.ids[n.index]},
                       {"distance", n.distance},
                       {"tokens", json::parse(tokens_json(corpus.sequences[n.index]))}});
  }
  const json doc = {{"query", json::parse(tokens_json(q))}, {"rank", to_string(spec)}, {"neighbors", results}};
  emit(c.out, doc.dump(2) + "\n");
  return kOk;
}

int cmd_eval(const RunConfig& c) {
  const fs::path out = require(c.out, "out");
  const auto model = load_model(existing(c.model, "model"));
  const auto spec = spec_for(c, model);
  const auto corpus = corpus_for(c);
  const auto report = invariance_eval(spec, corpus, c.n_pairs, c.training.seed, c.bins);
  fs::create_directories(out);
  write_text(out / "config.json", to_json(c).dump(2) + "\n");
  write_eval_report(out, report, spec);
  std::printf("auc %.6f median_in %.6f median_cross %.6f\n", report.auc, report.median_in, report.median_cross);
  return kOk;
}

int cmd_census(const RunConfig& c) {
  const auto model = load_model(existing(c.model, "model"));
  const auto spec = spec_for(c, model);
  const auto corpus = corpus_for(c);
  const auto census = distance_value_census(spec, corpus, c.n_pairs, c.training.seed);
  emit(c.out, census_json(census, spec).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned rank distances between symbolic melodies"};
  app.require_subcommand(1);
  Overrides o;

  std::uint64_t synth_seed = 1;
  int synth_count = 500;
  int synth_length = 16;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic JSONL corpus");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--count", synth_count, "number of sequences");
  synth->add_option("--length", synth_length, "tokens per sequence");
  synth->add_option("--out", synth_out, "output path")->required();

  auto* train_cmd = app.add_subcommand("train", "train an autoencoder");
  add_common(train_cmd, o);
  add_corpus(train_cmd, o);
  add_seed(train_cmd, o);
  add_out(train_cmd, o, "output directory");

  std::string seq_a, seq_b;
  auto* dist = app.add_subcommand("dist", "distance between two sequences");
  add_common(dist, o);
  add_model(dist, o);
  add_rank(dist, o);
  dist->add_option("a", seq_a, "first sequence")->required();
  dist->add_option("b", seq_b, "second sequence")->required();

  std::string query;
  auto* knn_cmd = app.add_subcommand("knn", "nearest corpus neighbors of a query");
  add_common(knn_cmd, o);
  add_model(knn_cmd, o);
  add_corpus(knn_cmd, o);
  add_rank(knn_cmd, o);
  knn_cmd->add_option("--k", o.k, "neighbor count");
  knn_cmd->add_flag("--dedup", o.dedup, "skip repeated token sequences");
  add_out(knn_cmd, o, "output JSON path (stdout if omitted)");
  knn_cmd->add_option("query", query, "query sequence")->required();

  auto* eval = app.add_subcommand("eval-invariance", "in-class vs cross-class distance report");
  add_common(eval, o);
  add_model(eval, o);
  add_corpus(eval, o);
  add_rank(eval, o);
  add_seed(eval, o);
  eval->add_option("--pairs", o.n_pairs, "pairs per class kind");
  add_out(eval, o, "output directory");

  auto* census = app.add_subcommand("census", "count distinct distance values");
  add_common(census, o);
  add_model(census, o);
  add_corpus(census, o);
  add_rank(census, o);
  add_seed(census, o);
  census->add_option("--pairs", o.n_pairs, "sampled pairs");
  add_out(census, o, "output JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_seed, synth_count, synth_length, synth_out);
    const RunConfig c = o.resolve();
    if (train_cmd->parsed()) return cmd_train(c);
    if (dist->parsed()) return cmd_dist(c, seq_a, seq_b);
    if (knn_cmd->parsed()) return cmd_knn(c, query);
    if (eval->parsed()) return cmd_eval(c);
    if (census->parsed()) return cmd_census(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "melodist: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "melodist: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
