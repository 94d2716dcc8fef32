#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "tmpredict/error.hpp"
#include "tmpredict/ingest.hpp"
#include "tmpredict/lstm.hpp"
#include "tmpredict/synthetic.hpp"
#include "tmpredict/text_io.hpp"

namespace tmpredict::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys = {
    "manifest",      "seed",           "window",           "split.train",      "split.test",
    "methods",       "arma.p",         "arma.q",           "arar.max_lag",     "hw.grid_step",
    "lstm.hidden_dim", "lstm.layers",  "lstm.activation",  "train.epochs",     "train.learning_rate",
    "train.optimizer", "train.batch_size", "train.clip_norm", "train.decay",   "train.epsilon",
    "sweep.depths",  "report.vectors",
};

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(ErrorCode::InvalidConfig, what + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t positive(const KeyValueFile& f, const std::string& key, std::size_t fallback) {
  const auto v = f.get(key);
  if (!v) return fallback;
  const auto parsed = parse_u64(*v, key);
  if (parsed == 0) throw Error(ErrorCode::InvalidConfig, key + " must be positive");
  return static_cast<std::size_t>(parsed);
}

double real(const KeyValueFile& f, const std::string& key, double fallback) {
  const auto v = f.get_double(key);
  return v ? *v : fallback;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

struct Dataset {
  TrafficSeries series;
  IngestReport report;
};

Dataset load(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorCode::FileNotFound, "manifest not found: " + manifest_path.string());
  }
  auto loaded = load_dataset(read_manifest(manifest_path));
  return {std::move(loaded.series), std::move(loaded.report)};
}

/// Fills the train length from the dataset when the config gives only the
/// test length.
void resolve_split(RunConfig& cfg, std::size_t total) {
  auto& s = cfg.eval.split;
  if (s.train_len == 0) {
    if (s.test_len >= total) {
      throw Error(ErrorCode::BadSplit, "test length " + std::to_string(s.test_len) +
                                           " leaves no training data in " + std::to_string(total) +
                                           " slots");
    }
    s.train_len = total - s.test_len;
  }
  if (s.train_len + s.test_len != total) {
    throw Error(ErrorCode::BadSplit, "split " + std::to_string(s.train_len) + "/" +
                                         std::to_string(s.test_len) + " does not cover " +
                                         std::to_string(total) + " slots");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << text;
}

void write_echo(const fs::path& out_dir, const RunConfig& cfg) {
  write_text(out_dir / "config_echo.conf", cfg.echo().dump());
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
  std::ostringstream s;
  s << "epoch,loss\n";
  for (std::size_t k = 0; k < losses.size(); ++k) s << k + 1 << ',' << format_double(losses[k]) << '\n';
  write_text(path, s.str());
}

// Flags shared by the config-driven subcommands.
struct CommonFlags {
  std::string config;
  std::string out = "tmpredict-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<std::size_t> epochs;
  std::optional<std::string> depths;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "run configuration file");
  if (needs_config) c->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "random seed (overrides config)");
  cmd->add_option("--window", f.window, "learning window W (overrides config)");
  cmd->add_option("--epochs", f.epochs, "training epochs (overrides config)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.window) {
    if (*f.window == 0) throw Error(ErrorCode::InvalidConfig, "--window must be positive");
    cfg.eval.window = *f.window;
  }
  if (f.epochs) {
    if (*f.epochs == 0) throw Error(ErrorCode::InvalidConfig, "--epochs must be positive");
    cfg.eval.train.epochs = *f.epochs;
  }
  if (f.depths) cfg.depths = parse_depths(*f.depths);
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

int cmd_ingest(const std::string& manifest, const std::string& config, const std::string& out_arg,
               std::ostream& out) {
  fs::path manifest_path = manifest;
  if (manifest_path.empty()) {
    if (config.empty()) throw Error(ErrorCode::InvalidConfig, "ingest needs --manifest or --config");
    manifest_path = load_run_config(config).manifest;
  }
  const Dataset ds = load(manifest_path);
  const auto& s = ds.series;
  double lo = s[0].entries()[0];
  double hi = lo;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& m : s.matrices()) {
    for (double v : m.entries()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++count;
    }
  }
  out << "N=" << s.n() << '\n'
      << "T=" << s.size() << '\n'
      << "interval_seconds=" << s.interval_seconds() << '\n'
      << "unit=" << s.unit() << '\n'
      << "min=" << format_double(lo) << '\n'
      << "max=" << format_double(hi) << '\n'
      << "mean=" << format_double(sum / static_cast<double>(count)) << '\n'
      << "rows_rejected=" << ds.report.rows_rejected << '\n'
      << "entries_defaulted=" << ds.report.entries_defaulted << '\n'
      << "gaps_filled=" << ds.report.gaps_filled << '\n';
  const fs::path dir = prepare_out(out_arg);
  std::ostringstream wide;
  write_csv_wide(wide, s);
  write_text(dir / "dataset.csv", wide.str());
  out << "cache=" << (dir / "dataset.csv").string() << '\n';
  return kOk;
}

int cmd_train(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  RunConfig cfg = resolve(flags);
  const Dataset ds = load(cfg.manifest);
  resolve_split(cfg, ds.series.size());
  const fs::path dir = prepare_out(flags.out);
  write_echo(dir, cfg);

  auto [train_raw, test_raw] = split(ds.series, cfg.eval.split);
  const NormParams norm = fit_norm(train_raw);
  const TrafficSeries train_norm = normalize(train_raw, norm);
  const auto samples = make_windows(train_norm, cfg.eval.window);

  NetworkDims dims;
  dims.input_dim = ds.series.n() * ds.series.n();
  dims.output_dim = dims.input_dim;
  dims.hidden_dim = cfg.eval.hidden_dim;
  dims.layers = cfg.eval.layers;
  dims.activation = cfg.eval.activation;
  TrainConfig tc = cfg.eval.train;
  tc.seed = *cfg.seed;

  try {
    TrainResult result = train(init_params(dims, *cfg.seed), samples, tc);
    write_loss_csv(dir / "loss_history.csv", result.loss_history);
    Checkpoint ckpt{std::move(result.net), norm, cfg.eval.window};
    save_checkpoint(dir / "model.ckpt", ckpt);
    out << "epochs=" << result.loss_history.size() << '\n'
        << "final_loss=" << format_double(result.loss_history.back()) << '\n'
        << "checkpoint=" << (dir / "model.ckpt").string() << '\n';
  } catch (const TrainingDiverged& e) {
    write_loss_csv(dir / "loss_history.csv", e.loss_history());
    err << "error: " << e.what() << '\n';
    return kDiverged;
  }
  return kOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& manifest, const CommonFlags& flags,
                std::optional<std::size_t> at, std::ostream& out) {
  fs::path manifest_path = manifest;
  if (manifest_path.empty()) {
    if (flags.config.empty()) throw Error(ErrorCode::InvalidConfig, "predict needs --manifest or --config");
    manifest_path = load_run_config(flags.config).manifest;
  }
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Dataset ds = load(manifest_path);
  const std::size_t n2 = ds.series.n() * ds.series.n();
  if (n2 != ckpt.net.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint expects " + std::to_string(ckpt.net.input_dim()) +
                                              " OD pairs, data has " + std::to_string(n2));
  }
  const std::size_t w = flags.window.value_or(ckpt.window);
  if (w == 0) throw Error(ErrorCode::InvalidConfig, "--window must be positive");
  const std::size_t target = at.value_or(ds.series.size());
  if (target > ds.series.size()) {
    throw Error(ErrorCode::InvalidConfig, "--at " + std::to_string(target) + " is past the series end");
  }
  if (target < w) {
    throw Error(ErrorCode::SeriesTooShort, "slot " + std::to_string(target) + " has " +
                                               std::to_string(target) + " slots of history, window is " +
                                               std::to_string(w));
  }
  const TrafficSeries history = normalize(ds.series.slice(target - w, w), ckpt.norm);
  const TrafficVector predicted = predict_next(ckpt.net, history, w);
  const std::int64_t ts = history[w - 1].timestamp() + ds.series.interval_seconds();

  const fs::path dir = prepare_out(flags.out);
  {
    std::ostringstream row;
    row << "timestamp";
    for (std::size_t k = 0; k < n2; ++k) row << ",od_" << k;
    row << '\n' << ts;
    for (double v : predicted.values) row << ',' << format_double(v);
    row << '\n';
    write_text(dir / "prediction.csv", row.str());
  }
  const TrafficMatrix raw = unflatten(denormalize(predicted, ckpt.norm), ts);
  {
    std::ostringstream mat;
    for (std::size_t i = 0; i < raw.n(); ++i) {
      for (std::size_t j = 0; j < raw.n(); ++j) mat << (j ? "," : "") << format_double(raw(i, j));
      mat << '\n';
    }
    write_text(dir / "prediction_matrix.csv", mat.str());
  }
  out << "slot=" << target << '\n' << "timestamp=" << ts << '\n';
  if (target < ds.series.size()) {
    const TrafficVector actual_raw = flatten(ds.series[target]);
    std::vector<double> actual(actual_raw.values.size());
    for (std::size_t k = 0; k < actual.size(); ++k) actual[k] = actual_raw.values[k] / ckpt.norm.max_value;
    out << "mse=" << format_double(mse(actual, predicted.values)) << '\n'
        << "mse_raw=" << format_double(mse(actual_raw.values, flatten(raw).values)) << '\n';
  }
  return kOk;
}

int cmd_compare(const CommonFlags& flags, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const Dataset ds = load(cfg.manifest);
  resolve_split(cfg, ds.series.size());
  const fs::path dir = prepare_out(flags.out);
  write_echo(dir, cfg);
  EvalConfig ec = cfg.eval;
  ec.seed = *cfg.seed;
  const EvalReport report = compare(ds.series, ec);
  write_text(dir / "report.json", report_json(report, {cfg.report_vectors}));
  std::ostringstream csv;
  write_comparison_csv(csv, report);
  write_text(dir / "comparison.csv", csv.str());
  out << csv.str();
  for (const auto& m : report.methods) {
    if (m.status != "ok") out << "# " << m.method << " failed: " << m.error << '\n';
  }
  return kOk;
}

int cmd_sweep(const CommonFlags& flags, std::ostream& out) {
  RunConfig cfg = resolve(flags);
  const Dataset ds = load(cfg.manifest);
  resolve_split(cfg, ds.series.size());
  const fs::path dir = prepare_out(flags.out);
  write_echo(dir, cfg);
  EvalConfig ec = cfg.eval;
  ec.seed = *cfg.seed;
  const EvalReport report = depth_sweep(ds.series, cfg.depths, ec);
  write_text(dir / "report.json", report_json(report, {cfg.report_vectors}));
  std::ostringstream csv;
  write_depth_sweep_csv(csv, report);
  write_text(dir / "depth_sweep.csv", csv.str());
  out << csv.str();
  return kOk;
}

int cmd_synth(const std::string& out_arg, std::optional<std::uint64_t> seed, std::size_t nodes,
              std::size_t slots, std::ostream& out) {
  if (!seed) throw Error(ErrorCode::InvalidConfig, "--seed is required");
  SyntheticConfig sc;
  sc.seed = *seed;
  sc.nodes = nodes;
  sc.slots = slots;
  const TrafficSeries s = synthesize(sc);
  const fs::path dir = prepare_out(out_arg);
  std::ostringstream wide;
  write_csv_wide(wide, s);
  write_text(dir / "dataset.csv", wide.str());
  KeyValueFile manifest;
  manifest.set("format", "csv-wide");
  manifest.set("paths", "dataset.csv");
  manifest.set("interval_seconds", std::to_string(sc.interval_seconds));
  manifest.set("node_count", std::to_string(sc.nodes));
  manifest.set("unit", "bytes");
  write_text(dir / "manifest.conf", manifest.dump());
  out << "N=" << s.n() << '\n' << "T=" << s.size() << '\n'
      << "manifest=" << (dir / "manifest.conf").string() << '\n';
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DivergenceDetected: return kDiverged;
    case ErrorCode::ShapeMismatch: return kMismatch;
    default: return kInputError;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const {
  if (!seed) throw Error(ErrorCode::InvalidConfig, "seed is required (config key 'seed' or --seed)");
  if (manifest.empty()) throw Error(ErrorCode::InvalidConfig, "config key 'manifest' is required");
  if (!fs::exists(manifest)) throw Error(ErrorCode::FileNotFound, "manifest not found: " + manifest.string());
  if (depths.empty()) throw Error(ErrorCode::InvalidConfig, "depth list is empty");
  EvalConfig probe = eval;
  if (probe.split.train_len == 0) probe.split.train_len = 1;  // resolved against the data later
  probe.validate();
}

KeyValueFile RunConfig::echo() const {
  KeyValueFile f;
  f.set("manifest", fs::absolute(manifest).lexically_normal().string());
  if (seed) f.set("seed", std::to_string(*seed));
  f.set("window", std::to_string(eval.window));
  if (eval.split.train_len > 0) f.set("split.train", std::to_string(eval.split.train_len));
  f.set("split.test", std::to_string(eval.split.test_len));
  f.set("methods", join(eval.methods));
  f.set("arma.p", std::to_string(eval.linear.arma_p));
  f.set("arma.q", std::to_string(eval.linear.arma_q));
  f.set("arar.max_lag", std::to_string(eval.linear.arar_max_lag));
  f.set("hw.grid_step", format_double(eval.linear.hw_grid_step));
  f.set("lstm.hidden_dim", std::to_string(eval.hidden_dim));
  f.set("lstm.layers", std::to_string(eval.layers));
  f.set("lstm.activation", to_string(eval.activation));
  f.set("train.epochs", std::to_string(eval.train.epochs));
  f.set("train.learning_rate", format_double(eval.train.learning_rate));
  f.set("train.optimizer", to_string(eval.train.optimizer));
  f.set("train.batch_size", std::to_string(eval.train.batch_size));
  f.set("train.clip_norm", format_double(eval.train.clip_norm));
  f.set("train.decay", format_double(eval.train.decay));
  f.set("train.epsilon", format_double(eval.train.epsilon));
  std::vector<std::string> d;
  for (auto v : depths) d.push_back(std::to_string(v));
  f.set("sweep.depths", join(d));
  f.set("report.vectors", report_vectors ? "true" : "false");
  return f;
}

RunConfig run_config_from(const KeyValueFile& f, const fs::path& base_dir) {
  for (const auto& [key, value] : f.entries()) {
    if (!kKnownKeys.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  RunConfig cfg;
  if (auto m = f.get("manifest")) {
    fs::path p(*m);
    cfg.manifest = p.is_absolute() ? p : base_dir / p;
  }
  if (auto s = f.get("seed")) cfg.seed = parse_u64(*s, "seed");
  EvalConfig& e = cfg.eval;
  e.window = positive(f, "window", e.window);
  // split.train may be left out and derived from the dataset length.
  e.split.train_len = f.contains("split.train") ? positive(f, "split.train", 0) : 0;
  e.split.test_len = positive(f, "split.test", 46);
  if (f.contains("methods")) e.methods = f.get_list("methods");
  e.linear.arma_p = f.contains("arma.p") ? static_cast<std::size_t>(parse_u64(*f.get("arma.p"), "arma.p"))
                                         : e.linear.arma_p;
  e.linear.arma_q = f.contains("arma.q") ? static_cast<std::size_t>(parse_u64(*f.get("arma.q"), "arma.q"))
                                         : e.linear.arma_q;
  e.linear.arar_max_lag = positive(f, "arar.max_lag", e.linear.arar_max_lag);
  e.linear.hw_grid_step = real(f, "hw.grid_step", e.linear.hw_grid_step);
  e.hidden_dim = positive(f, "lstm.hidden_dim", e.hidden_dim);
  e.layers = positive(f, "lstm.layers", e.layers);
  if (auto a = f.get("lstm.activation")) e.activation = parse_output_activation(*a);
  e.train.epochs = positive(f, "train.epochs", e.train.epochs);
  e.train.learning_rate = real(f, "train.learning_rate", e.train.learning_rate);
  if (auto o = f.get("train.optimizer")) e.train.optimizer = parse_optimizer(*o);
  e.train.batch_size = positive(f, "train.batch_size", e.train.batch_size);
  e.train.clip_norm = real(f, "train.clip_norm", e.train.clip_norm);
  e.train.decay = real(f, "train.decay", e.train.decay);
  e.train.epsilon = real(f, "train.epsilon", e.train.epsilon);
  if (auto d = f.get("sweep.depths")) cfg.depths = parse_depths(*d);
  if (auto v = f.get("report.vectors")) {
    if (*v != "true" && *v != "false") throw Error(ErrorCode::InvalidConfig, "report.vectors must be true or false");
    cfg.report_vectors = *v == "true";
  }
  if (cfg.seed) e.seed = *cfg.seed;
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::FileNotFound, "config not found: " + path.string());
  return run_config_from(KeyValueFile::load(path), path.parent_path());
}

std::vector<std::size_t> parse_depths(const std::string& text) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw Error(ErrorCode::InvalidConfig, "empty item in depth list '" + text + "'");
    const auto dash = item.find('-');
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    if (dash == std::string::npos) {
      lo = hi = parse_u64(item, "depth");
    } else {
      lo = parse_u64(item.substr(0, dash), "depth");
      hi = parse_u64(item.substr(dash + 1), "depth");
    }
    if (lo == 0 || hi < lo) throw Error(ErrorCode::InvalidConfig, "bad depth '" + item + "'");
    for (auto d = lo; d <= hi; ++d) out.push_back(static_cast<std::size_t>(d));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "depth list is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Entry point

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic-matrix forecasting: ingest, train, predict, compare, sweep"};
  app.require_subcommand(1);

  std::string manifest;
  std::string checkpoint;
  std::optional<std::size_t> at;
  std::string synth_out = "tmpredict-out";
  std::optional<std::uint64_t> synth_seed;
  std::size_t synth_nodes = 23;
  std::size_t synth_slots = 309;
  CommonFlags ingest_flags, train_flags, predict_flags, compare_flags, sweep_flags;
  std::string depths_text;

  auto* ingest = app.add_subcommand("ingest", "load a dataset, print a summary, cache it as csv-wide");
  ingest->add_option("--manifest", manifest, "dataset manifest");
  ingest->add_option("--config", ingest_flags.config, "run configuration (for its manifest)");
  ingest->add_option("--out", ingest_flags.out, "output directory");

  auto* train_cmd = app.add_subcommand("train", "train the LSTM, write model.ckpt and loss_history.csv");
  add_common(train_cmd, train_flags, true);

  auto* predict_cmd = app.add_subcommand("predict", "predict the next traffic matrix from a checkpoint");
  predict_cmd->add_option("--checkpoint", checkpoint, "model.ckpt")->required();
  predict_cmd->add_option("--manifest", manifest, "dataset manifest");
  predict_cmd->add_option("--config", predict_flags.config, "run configuration (for its manifest)");
  predict_cmd->add_option("--out", predict_flags.out, "output directory");
  predict_cmd->add_option("--window", predict_flags.window, "window length (default: checkpoint's)");
  predict_cmd->add_option("--at", at, "0-based slot to predict (default: the slot after the data)");

  auto* compare_cmd = app.add_subcommand("compare", "walk-forward comparison of all methods");
  add_common(compare_cmd, compare_flags, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "LSTM depth sweep");
  add_common(sweep_cmd, sweep_flags, true);
  sweep_cmd->add_option("--depths", depths_text, "depth list, e.g. 1,2,3 or 1-6");

  auto* synth_cmd = app.add_subcommand("synth", "write a seeded synthetic dataset and its manifest");
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--nodes", synth_nodes, "node count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--slots", synth_slots, "time slots")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*ingest) return cmd_ingest(manifest, ingest_flags.config, ingest_flags.out, out);
    if (*train_cmd) return cmd_train(train_flags, out, err);
    if (*predict_cmd) return cmd_predict(checkpoint, manifest, predict_flags, at, out);
    if (*compare_cmd) return cmd_compare(compare_flags, out);
    if (*sweep_cmd) {
      if (sweep_cmd->count("--depths")) sweep_flags.depths = depths_text;
      return cmd_sweep(sweep_flags, out);
    }
    if (*synth_cmd) return cmd_synth(synth_out, synth_seed, synth_nodes, synth_slots, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace tmpredict::cli
