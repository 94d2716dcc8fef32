// Checkpoint container, line oriented text:
//
//   tmpredict-checkpoint
//   version 1
//   input_dim <n> / hidden_dim <h> / layers <k> / output_dim <n> / activation <name>
//   seed <u64> / window <w> / norm_max_value <x> / norm_computed_on <tag>
//   array <name> <rows> <cols>
//   <rows*cols values, row-major, space separated>
//   ...
//   end
//
// Values use the shortest round-trip decimal form, so a reload is bit-exact
// and identical networks serialize to identical bytes.

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tmpredict/lstm.hpp"
#include "tmpredict/text_io.hpp"

namespace tmpredict {

namespace {

constexpr const char* kMagic = "tmpredict-checkpoint";

void write_array(std::ostream& out, const std::string& name, const double* data, Eigen::Index rows,
                 Eigen::Index cols) {
  out << "array " << name << ' ' << rows << ' ' << cols << '\n';
  // Eigen storage is column-major; the file is row-major.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (r + c > 0) out << ' ';
      out << format_double(data[c * rows + r]);
    }
  }
  out << '\n';
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadCheckpoint, "truncated before '" + key + "'");
  std::istringstream fields(line);
  std::string got;
  std::string value;
  fields >> got;
  std::getline(fields >> std::ws, value);
  if (got != key) throw Error(ErrorCode::BadCheckpoint, "expected '" + key + "', got '" + got + "'");
  return value;
}

std::size_t to_size(const std::string& s, const std::string& key) {
  const auto v = parse_int(s);
  if (!v || *v < 0) throw Error(ErrorCode::BadCheckpoint, key + ": bad integer '" + s + "'");
  return static_cast<std::size_t>(*v);
}

void read_array(std::istream& in, const std::string& name, double* data, Eigen::Index rows,
                Eigen::Index cols) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadCheckpoint, "missing array " + name);
  std::istringstream header(line);
  std::string tag;
  std::string got;
  Eigen::Index r = -1;
  Eigen::Index c = -1;
  header >> tag >> got >> r >> c;
  if (tag != "array" || got != name || r != rows || c != cols) {
    throw Error(ErrorCode::BadCheckpoint, "expected array " + name + " " + std::to_string(rows) + "x" +
                                              std::to_string(cols) + ", got '" + line + "'");
  }
  if (!std::getline(in, line)) throw Error(ErrorCode::BadCheckpoint, "missing values for " + name);
  std::istringstream values(line);
  std::string token;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(values >> token)) throw Error(ErrorCode::BadCheckpoint, "too few values in " + name);
      const auto v = parse_double(token);
      if (!v || !std::isfinite(*v)) throw Error(ErrorCode::BadCheckpoint, "bad value in " + name);
      data[c * rows + r] = *v;
    }
  }
  if (values >> token) throw Error(ErrorCode::BadCheckpoint, "too many values in " + name);
}

template <typename Fn>
void each_named_array(LstmNetwork& net, Fn&& fn) {
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto& l = net.layers[k];
    const std::string prefix = "layer" + std::to_string(k) + ".";
    for (auto [name, m] : {std::pair{"w_ix", &l.w_ix}, {"w_im", &l.w_im}, {"w_fx", &l.w_fx},
                           {"w_fm", &l.w_fm}, {"w_cx", &l.w_cx}, {"w_cm", &l.w_cm},
                           {"w_ox", &l.w_ox}, {"w_om", &l.w_om}}) {
      fn(prefix + name, m->data(), m->rows(), m->cols());
    }
    for (auto [name, v] : {std::pair{"w_ic", &l.w_ic}, {"w_fc", &l.w_fc}, {"w_oc", &l.w_oc},
                           {"b_i", &l.b_i}, {"b_f", &l.b_f}, {"b_c", &l.b_c}, {"b_o", &l.b_o}}) {
      fn(prefix + name, v->data(), v->rows(), Eigen::Index{1});
    }
  }
  fn("output.w_ym", net.output.w_ym.data(), net.output.w_ym.rows(), net.output.w_ym.cols());
  fn("output.b_y", net.output.b_y.data(), net.output.b_y.rows(), Eigen::Index{1});
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.net.validate();
  const NetworkDims d = ckpt.net.dims();
  out << kMagic << '\n';
  out << "version " << kCheckpointVersion << '\n';
  out << "input_dim " << d.input_dim << '\n';
  out << "hidden_dim " << d.hidden_dim << '\n';
  out << "layers " << d.layers << '\n';
  out << "output_dim " << d.output_dim << '\n';
  out << "activation " << to_string(d.activation) << '\n';
  out << "seed " << ckpt.net.seed << '\n';
  out << "window " << ckpt.window << '\n';
  out << "norm_max_value " << format_double(ckpt.norm.max_value) << '\n';
  out << "norm_computed_on " << ckpt.norm.computed_on << '\n';
  auto& net = const_cast<LstmNetwork&>(ckpt.net);
  each_named_array(net, [&](const std::string& name, double* data, Eigen::Index r, Eigen::Index c) {
    write_array(out, name, data, r, c);
  });
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw Error(ErrorCode::BadCheckpoint, "not a tmpredict checkpoint");
  }
  const auto version = expect_key(in, "version");
  if (version != std::to_string(kCheckpointVersion)) {
    throw Error(ErrorCode::BadCheckpoint, "unsupported checkpoint version " + version);
  }
  NetworkDims d;
  d.input_dim = to_size(expect_key(in, "input_dim"), "input_dim");
  d.hidden_dim = to_size(expect_key(in, "hidden_dim"), "hidden_dim");
  d.layers = to_size(expect_key(in, "layers"), "layers");
  d.output_dim = to_size(expect_key(in, "output_dim"), "output_dim");
  const auto activation = expect_key(in, "activation");
  if (activation != "identity" && activation != "sigmoid") {
    throw Error(ErrorCode::BadCheckpoint, "unknown activation '" + activation + "'");
  }
  d.activation = parse_output_activation(activation);
  const auto seed_text = expect_key(in, "seed");
  std::uint64_t seed = 0;
  std::istringstream(seed_text) >> seed;

  Checkpoint ckpt;
  ckpt.window = to_size(expect_key(in, "window"), "window");
  const auto max_value = parse_double(expect_key(in, "norm_max_value"));
  if (!max_value || !(*max_value > 0.0)) throw Error(ErrorCode::BadCheckpoint, "bad norm_max_value");
  ckpt.norm.max_value = *max_value;
  ckpt.norm.computed_on = expect_key(in, "norm_computed_on");

  if (d.input_dim == 0 || d.hidden_dim == 0 || d.layers == 0 || d.output_dim == 0) {
    throw Error(ErrorCode::BadCheckpoint, "zero dimension");
  }
  ckpt.net = init_params(d, 0);
  ckpt.net.seed = seed;
  each_named_array(ckpt.net, [&](const std::string& name, double* data, Eigen::Index r, Eigen::Index c) {
    read_array(in, name, data, r, c);
  });
  if (!std::getline(in, line) || line != "end") throw Error(ErrorCode::BadCheckpoint, "missing end marker");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return read_checkpoint(in);
}

}  // namespace tmpredict
