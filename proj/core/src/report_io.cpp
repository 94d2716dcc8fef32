#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "tmpredict/eval.hpp"
#include "tmpredict/text_io.hpp"

namespace tmpredict {

namespace {

using nlohmann::ordered_json;

// JSON has no NaN; failed entries carry null instead.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[static_cast<std::size_t>(k)] = digits[v & 0xf];
  return s;
}

ordered_json config_json(const EvalReport& r) {
  const EvalConfig& c = r.config;
  return ordered_json{
      {"seed", c.seed},
      {"window", c.window},
      {"split", {{"train_len", c.split.train_len}, {"test_len", c.split.test_len}}},
      {"normalization", {{"scope", r.norm.computed_on}, {"max_value", r.norm.max_value}}},
      {"methods", c.methods},
      {"linear",
       {{"arma_p", c.linear.arma_p},
        {"arma_q", c.linear.arma_q},
        {"arar_max_lag", c.linear.arar_max_lag},
        {"hw_grid_step", c.linear.hw_grid_step}}},
      {"lstm",
       {{"hidden_dim", c.hidden_dim},
        {"layers", c.layers},
        {"activation", to_string(c.activation)},
        {"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"optimizer", to_string(c.train.optimizer)},
        {"batch_size", c.train.batch_size},
        {"clip_norm", c.train.clip_norm},
        {"decay", c.train.decay},
        {"epsilon", c.train.epsilon}}},
  };
}

}  // namespace

std::string report_json(const EvalReport& report, const ReportOptions& options) {
  ordered_json doc;
  doc["format"] = "tmpredict-report";
  doc["version"] = 1;
  doc["n"] = report.n;
  doc["config"] = config_json(report);

  ordered_json methods = ordered_json::array();
  ordered_json timing_methods = ordered_json::object();
  for (const auto& m : report.methods) {
    ordered_json fallbacks = ordered_json::array();
    for (std::size_t k = 0; k < m.fallback_ods.size(); ++k) {
      fallbacks.push_back({{"od", m.fallback_ods[k]}, {"reason", m.fallback_reasons[k]}});
    }
    ordered_json loss = ordered_json::array();
    for (double v : m.loss_history) loss.push_back(number(v));
    ordered_json entry{
        {"method", m.method},
        {"status", m.status},
        {"mse", m.status == "ok" ? number(m.mse) : ordered_json(nullptr)},
        {"mse_raw", m.status == "ok" ? number(m.mse_raw) : ordered_json(nullptr)},
        {"steps", m.steps},
        {"input_hash", hex(m.input_hash)},
        {"fallbacks", fallbacks},
        {"loss_history", loss},
    };
    if (!m.error.empty()) entry["error"] = m.error;
    methods.push_back(entry);
    timing_methods[m.method] = m.train_seconds;
  }
  doc["methods"] = methods;
  doc["ranking"] = report.ranking;

  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) {
    ordered_json entry{{"t", r.t}, {"method", r.method}, {"mse", r.mse}, {"mse_raw", r.mse_raw}};
    if (options.include_vectors) {
      entry["predicted"] = r.predicted.values;
      entry["actual"] = r.actual.values;
    }
    records.push_back(entry);
  }
  doc["records"] = records;

  ordered_json depths = ordered_json::array();
  ordered_json timing_depths = ordered_json::array();
  for (const auto& d : report.depths) {
    ordered_json loss = ordered_json::array();
    for (double v : d.loss_history) loss.push_back(number(v));
    ordered_json entry{
        {"depth", d.depth},
        {"hidden_dim", d.hidden_dim},
        {"epochs", d.epochs},
        {"status", d.status},
        {"mse", d.status == "ok" ? number(d.mse) : ordered_json(nullptr)},
        {"mse_raw", d.status == "ok" ? number(d.mse_raw) : ordered_json(nullptr)},
        {"loss_history", loss},
    };
    if (!d.error.empty()) entry["error"] = d.error;
    depths.push_back(entry);
    timing_depths.push_back({{"depth", d.depth}, {"train_seconds", d.train_seconds}});
  }
  doc["depths"] = depths;
  doc["timing"] = {{"methods", timing_methods}, {"depths", timing_depths}};
  return doc.dump(2) + "\n";
}

void write_comparison_csv(std::ostream& out, const EvalReport& report) {
  out << "method,mse\n";
  for (const auto& name : report.ranking) {
    for (const auto& m : report.methods) {
      if (m.method == name) out << name << ',' << format_double(m.mse) << '\n';
    }
  }
}

void write_depth_sweep_csv(std::ostream& out, const EvalReport& report) {
  out << "depth,mse,train_seconds\n";
  for (const auto& d : report.depths) {
    out << d.depth << ',' << (d.status == "ok" ? format_double(d.mse) : std::string("nan")) << ','
        << format_double(d.train_seconds) << '\n';
  }
}

}  // namespace tmpredict
