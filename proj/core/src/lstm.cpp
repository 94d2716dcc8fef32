#include "tmpredict/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tmpredict {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd tanh_of(const Eigen::VectorXd& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

template <typename Fn>
void for_each_array(LstmLayerParams& p, Fn&& fn) {
  fn("w_ix", p.w_ix.data(), p.w_ix.size());
  fn("w_im", p.w_im.data(), p.w_im.size());
  fn("w_ic", p.w_ic.data(), p.w_ic.size());
  fn("b_i", p.b_i.data(), p.b_i.size());
  fn("w_fx", p.w_fx.data(), p.w_fx.size());
  fn("w_fm", p.w_fm.data(), p.w_fm.size());
  fn("w_fc", p.w_fc.data(), p.w_fc.size());
  fn("b_f", p.b_f.data(), p.b_f.size());
  fn("w_cx", p.w_cx.data(), p.w_cx.size());
  fn("w_cm", p.w_cm.data(), p.w_cm.size());
  fn("b_c", p.b_c.data(), p.b_c.size());
  fn("w_ox", p.w_ox.data(), p.w_ox.size());
  fn("w_om", p.w_om.data(), p.w_om.size());
  fn("w_oc", p.w_oc.data(), p.w_oc.size());
  fn("b_o", p.b_o.data(), p.b_o.size());
}

}  // namespace

LstmLayerParams LstmLayerParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmLayerParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  const auto h = idx(hidden_dim);
  const auto in = idx(input_dim);
  for (auto* w : {&p.w_ix, &p.w_fx, &p.w_cx, &p.w_ox}) *w = Eigen::MatrixXd::Zero(h, in);
  for (auto* w : {&p.w_im, &p.w_fm, &p.w_cm, &p.w_om}) *w = Eigen::MatrixXd::Zero(h, h);
  for (auto* v : {&p.w_ic, &p.w_fc, &p.w_oc, &p.b_i, &p.b_f, &p.b_c, &p.b_o}) {
    *v = Eigen::VectorXd::Zero(h);
  }
  return p;
}

OutputActivation parse_output_activation(const std::string& name) {
  if (name == "identity") return OutputActivation::Identity;
  if (name == "sigmoid") return OutputActivation::Sigmoid;
  throw Error(ErrorCode::InvalidConfig, "unknown output activation '" + name + "'");
}

std::string to_string(OutputActivation activation) {
  return activation == OutputActivation::Sigmoid ? "sigmoid" : "identity";
}

NetworkDims LstmNetwork::dims() const {
  NetworkDims d;
  d.input_dim = input_dim();
  d.hidden_dim = layers.empty() ? 0 : layers.front().hidden_dim;
  d.layers = layers.size();
  d.output_dim = output_dim();
  d.activation = output.activation;
  return d;
}

LstmNetwork LstmNetwork::zeros_like(const LstmNetwork& net) {
  LstmNetwork z;
  z.seed = net.seed;
  for (const auto& l : net.layers) z.layers.push_back(LstmLayerParams::zeros(l.input_dim, l.hidden_dim));
  z.output.w_ym = Eigen::MatrixXd::Zero(net.output.w_ym.rows(), net.output.w_ym.cols());
  z.output.b_y = Eigen::VectorXd::Zero(net.output.b_y.size());
  z.output.activation = net.output.activation;
  return z;
}

void LstmNetwork::validate() const {
  if (layers.empty()) throw Error(ErrorCode::ShapeMismatch, "network has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const auto h = idx(l.hidden_dim);
    const auto in = idx(l.input_dim);
    if (k > 0 && l.input_dim != layers[k - 1].hidden_dim) {
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " input_dim mismatch");
    }
    auto check = [&](const auto& a, Eigen::Index r, Eigen::Index c, const char* name) {
      if (a.rows() != r || a.cols() != c) {
        throw Error(ErrorCode::ShapeMismatch,
                    "layer " + std::to_string(k) + " " + name + " has wrong shape");
      }
    };
    check(l.w_ix, h, in, "w_ix");
    check(l.w_fx, h, in, "w_fx");
    check(l.w_cx, h, in, "w_cx");
    check(l.w_ox, h, in, "w_ox");
    check(l.w_im, h, h, "w_im");
    check(l.w_fm, h, h, "w_fm");
    check(l.w_cm, h, h, "w_cm");
    check(l.w_om, h, h, "w_om");
    check(l.w_ic, h, 1, "w_ic");
    check(l.w_fc, h, 1, "w_fc");
    check(l.w_oc, h, 1, "w_oc");
    check(l.b_i, h, 1, "b_i");
    check(l.b_f, h, 1, "b_f");
    check(l.b_c, h, 1, "b_c");
    check(l.b_o, h, 1, "b_o");
  }
  if (output.w_ym.cols() != idx(layers.back().hidden_dim) || output.w_ym.rows() != output.b_y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "output layer shape mismatch");
  }
}

std::vector<ParamView> parameter_views(LstmNetwork& net) {
  std::vector<ParamView> views;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    for_each_array(net.layers[k], [&](const char* name, double* data, Eigen::Index size) {
      views.push_back({"layer" + std::to_string(k) + "." + name, Eigen::Map<Eigen::VectorXd>(data, size)});
    });
  }
  views.push_back({"output.w_ym", Eigen::Map<Eigen::VectorXd>(net.output.w_ym.data(), net.output.w_ym.size())});
  views.push_back({"output.b_y", Eigen::Map<Eigen::VectorXd>(net.output.b_y.data(), net.output.b_y.size())});
  return views;
}

std::size_t parameter_count(const LstmNetwork& net) {
  auto& mutable_net = const_cast<LstmNetwork&>(net);
  std::size_t total = 0;
  for (const auto& v : parameter_views(mutable_net)) total += static_cast<std::size_t>(v.values.size());
  return total;
}

LayerState LayerState::zeros(std::size_t hidden_dim) {
  return {Eigen::VectorXd::Zero(idx(hidden_dim)), Eigen::VectorXd::Zero(idx(hidden_dim))};
}

CellStep cell_forward(const LstmLayerParams& p, const Eigen::VectorXd& x, const LayerState& prev) {
  if (x.size() != idx(p.input_dim) || prev.c.size() != idx(p.hidden_dim) ||
      prev.m.size() != idx(p.hidden_dim)) {
    throw Error(ErrorCode::ShapeMismatch, "cell input of width " + std::to_string(x.size()) +
                                              " for layer with input_dim " +
                                              std::to_string(p.input_dim));
  }
  CellStep s;
  s.i = sigmoid(p.w_ix * x + p.w_im * prev.m + p.w_ic.cwiseProduct(prev.c) + p.b_i);
  s.f = sigmoid(p.w_fx * x + p.w_fm * prev.m + p.w_fc.cwiseProduct(prev.c) + p.b_f);
  s.g = tanh_of(p.w_cx * x + p.w_cm * prev.m + p.b_c);
  s.c = s.f.cwiseProduct(prev.c) + s.i.cwiseProduct(s.g);
  s.o = sigmoid(p.w_ox * x + p.w_om * prev.m + p.w_oc.cwiseProduct(s.c) + p.b_o);
  s.tanh_c = tanh_of(s.c);
  s.m = s.o.cwiseProduct(s.tanh_c);
  return s;
}

ForwardCache forward(const LstmNetwork& net, const WindowMatrix& window) {
  if (net.layers.empty()) throw Error(ErrorCode::ShapeMismatch, "network has no layers");
  if (window.rows.cols() != idx(net.input_dim()) || window.rows.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "window width " + std::to_string(window.rows.cols()) +
                                              " != network input " + std::to_string(net.input_dim()));
  }
  const auto steps = static_cast<std::size_t>(window.rows.rows());
  ForwardCache cache;
  cache.inputs.resize(net.layers.size());
  cache.steps.resize(net.layers.size());

  std::vector<Eigen::VectorXd> layer_input(steps);
  for (std::size_t t = 0; t < steps; ++t) layer_input[t] = window.rows.row(idx(t)).transpose();

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& params = net.layers[l];
    LayerState state = LayerState::zeros(params.hidden_dim);
    auto& cached = cache.steps[l];
    cached.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      CellStep s = cell_forward(params, layer_input[t], state);
      state.c = s.c;
      state.m = s.m;
      cached.push_back(std::move(s));
    }
    cache.inputs[l] = std::move(layer_input);
    layer_input.assign(steps, Eigen::VectorXd());
    for (std::size_t t = 0; t < steps; ++t) layer_input[t] = cached[t].m;
  }

  const Eigen::VectorXd& top = cache.steps.back().back().m;
  Eigen::VectorXd z = net.output.w_ym * top + net.output.b_y;
  cache.y = net.output.activation == OutputActivation::Sigmoid ? sigmoid(z) : z;
  if (!cache.y.allFinite()) {
    throw Error(ErrorCode::NonFiniteActivation, "network output is not finite");
  }
  return cache;
}

Eigen::VectorXd predict(const LstmNetwork& net, const WindowMatrix& window) {
  return forward(net, window).y;
}

GradientResult bptt_gradients(const LstmNetwork& net, const WindowMatrix& window) {
  return bptt_gradients(net, window, forward(net, window));
}

namespace {

// Adds this sample's gradients into `g` and returns its loss.
double backprop_into(const LstmNetwork& net, const WindowMatrix& window, const ForwardCache& cache,
                     LstmNetwork& g) {
  if (!window.target) throw Error(ErrorCode::ShapeMismatch, "window has no target");
  const Eigen::VectorXd& target = *window.target;
  if (target.size() != cache.y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "target width differs from network output");
  }
  const double count = static_cast<double>(target.size());
  const Eigen::VectorXd residual = cache.y - target;
  const double loss = residual.squaredNorm() / count;

  Eigen::VectorXd dz = (2.0 / count) * residual;
  if (net.output.activation == OutputActivation::Sigmoid) {
    dz = dz.cwiseProduct(cache.y.cwiseProduct(Eigen::VectorXd::Ones(cache.y.size()) - cache.y));
  }
  const auto steps = cache.steps.front().size();
  const Eigen::VectorXd& top_m = cache.steps.back()[steps - 1].m;
  g.output.w_ym.noalias() += dz * top_m.transpose();
  g.output.b_y += dz;

  // dm arriving from above (head at the last step, next layer's dx otherwise).
  std::vector<Eigen::VectorXd> dm_above(steps);
  const auto top_hidden = idx(net.layers.back().hidden_dim);
  for (auto& v : dm_above) v = Eigen::VectorXd::Zero(top_hidden);
  dm_above[steps - 1] = net.output.w_ym.transpose() * dz;

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& p = net.layers[l];
    auto& gp = g.layers[l];
    const auto& cached = cache.steps[l];
    const auto& inputs = cache.inputs[l];
    const auto h = idx(p.hidden_dim);
    Eigen::VectorXd dm_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
    std::vector<Eigen::VectorXd> dx(steps);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h);

    for (std::size_t t = steps; t-- > 0;) {
      const CellStep& s = cached[t];
      const Eigen::VectorXd& c_prev = t > 0 ? cached[t - 1].c : zero;
      const Eigen::VectorXd& m_prev = t > 0 ? cached[t - 1].m : zero;
      const Eigen::VectorXd& x = inputs[t];

      const Eigen::VectorXd dm = dm_above[t] + dm_next;
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(h);
      const Eigen::VectorXd da_o =
          dm.cwiseProduct(s.tanh_c).cwiseProduct(s.o.cwiseProduct(ones - s.o));
      const Eigen::VectorXd dc = dc_next +
                                 dm.cwiseProduct(s.o).cwiseProduct(ones - s.tanh_c.cwiseAbs2()) +
                                 da_o.cwiseProduct(p.w_oc);
      const Eigen::VectorXd da_i = dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct(ones - s.i));
      const Eigen::VectorXd da_f = dc.cwiseProduct(c_prev).cwiseProduct(s.f.cwiseProduct(ones - s.f));
      const Eigen::VectorXd da_g = dc.cwiseProduct(s.i).cwiseProduct(ones - s.g.cwiseAbs2());

      gp.w_ix.noalias() += da_i * x.transpose();
      gp.w_fx.noalias() += da_f * x.transpose();
      gp.w_cx.noalias() += da_g * x.transpose();
      gp.w_ox.noalias() += da_o * x.transpose();
      if (t > 0) {
        gp.w_im.noalias() += da_i * m_prev.transpose();
        gp.w_fm.noalias() += da_f * m_prev.transpose();
        gp.w_cm.noalias() += da_g * m_prev.transpose();
        gp.w_om.noalias() += da_o * m_prev.transpose();
      }
      gp.w_ic += da_i.cwiseProduct(c_prev);
      gp.w_fc += da_f.cwiseProduct(c_prev);
      gp.w_oc += da_o.cwiseProduct(s.c);
      gp.b_i += da_i;
      gp.b_f += da_f;
      gp.b_c += da_g;
      gp.b_o += da_o;

      dc_next = dc.cwiseProduct(s.f) + da_i.cwiseProduct(p.w_ic) + da_f.cwiseProduct(p.w_fc);
      dm_next.noalias() = p.w_im.transpose() * da_i;
      dm_next.noalias() += p.w_fm.transpose() * da_f;
      dm_next.noalias() += p.w_cm.transpose() * da_g;
      dm_next.noalias() += p.w_om.transpose() * da_o;
      if (l > 0) {
        Eigen::VectorXd d = p.w_ix.transpose() * da_i;
        d.noalias() += p.w_fx.transpose() * da_f;
        d.noalias() += p.w_cx.transpose() * da_g;
        d.noalias() += p.w_ox.transpose() * da_o;
        dx[t] = std::move(d);
      }
    }
    if (l > 0) dm_above = std::move(dx);
  }
  return loss;
}

}  // namespace

GradientResult bptt_gradients(const LstmNetwork& net, const WindowMatrix& window,
                              const ForwardCache& cache) {
  GradientResult result;
  result.gradients = LstmNetwork::zeros_like(net);
  result.loss = backprop_into(net, window, cache, result.gradients);
  return result;
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "adaptive") return Optimizer::Adaptive;
  throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + name + "'");
}

std::string to_string(Optimizer optimizer) {
  return optimizer == Optimizer::Sgd ? "sgd" : "adaptive";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be finite and >= 0");
  }
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::InvalidConfig, "clip_norm must be > 0");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (!(decay >= 0.0 && decay < 1.0)) throw Error(ErrorCode::InvalidConfig, "decay must lie in [0,1)");
}

double global_norm(const LstmNetwork& grads) {
  auto& g = const_cast<LstmNetwork&>(grads);
  double sq = 0.0;
  for (const auto& v : parameter_views(g)) sq += v.values.squaredNorm();
  return std::sqrt(sq);
}

double clip_gradients(LstmNetwork& grads, double clip_norm) {
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (auto& v : parameter_views(grads)) v.values *= scale;
  }
  return norm;
}

TrainResult train(LstmNetwork net, const std::vector<WindowMatrix>& samples,
                  const TrainConfig& config) {
  config.validate();
  net.validate();
  if (samples.empty()) throw Error(ErrorCode::InsufficientHistory, "no training samples");
  for (const auto& s : samples) {
    if (!s.target || s.rows.cols() != samples.front().rows.cols() ||
        s.rows.rows() != samples.front().rows.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "training samples are not homogeneous");
    }
  }

  TrainResult result;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sample_loss(samples.size(), 0.0);

  LstmNetwork second_moment = LstmNetwork::zeros_like(net);
  auto params = parameter_views(net);
  auto moments = parameter_views(second_moment);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      LstmNetwork batch_grad = LstmNetwork::zeros_like(net);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t id = order[k];
        double loss = 0.0;
        try {
          loss = backprop_into(net, samples[id], forward(net, samples[id]), batch_grad);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NonFiniteActivation) throw;
          throw TrainingDiverged("epoch " + std::to_string(epoch + 1) + ": " + e.what(),
                                 result.loss_history);
        }
        if (!std::isfinite(loss)) {
          throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch + 1),
                                 result.loss_history);
        }
        sample_loss[id] = loss;
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      auto grads = parameter_views(batch_grad);
      for (auto& v : grads) v.values *= inv;
      clip_gradients(batch_grad, config.clip_norm);

      for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k].values;
        const auto& gk = grads[k].values;
        if (config.optimizer == Optimizer::Sgd) {
          p -= config.learning_rate * gk;
        } else {
          auto& s = moments[k].values;
          s = config.decay * s + (1.0 - config.decay) * gk.cwiseAbs2();
          p.array() -= config.learning_rate * gk.array() / (s.array().sqrt() + config.epsilon);
        }
      }
    }
    // Summed in sample order so a frozen network reports an identical loss.
    const double epoch_loss = std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) /
                              static_cast<double>(samples.size());
    result.loss_history.push_back(epoch_loss);
  }
  for (const auto& v : params) {
    if (!v.values.allFinite()) {
      throw TrainingDiverged("parameters became non-finite", result.loss_history);
    }
  }
  result.net = std::move(net);
  return result;
}

LstmNetwork init_params(const NetworkDims& dims, std::uint64_t seed) {
  if (dims.input_dim == 0 || dims.hidden_dim == 0 || dims.layers == 0 || dims.output_dim == 0) {
    throw Error(ErrorCode::InvalidConfig, "network dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden_dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  auto fill = [&](Eigen::MatrixXd& w) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = uniform(rng);
    }
  };

  LstmNetwork net;
  net.seed = seed;
  std::size_t in = dims.input_dim;
  for (std::size_t k = 0; k < dims.layers; ++k) {
    LstmLayerParams p = LstmLayerParams::zeros(in, dims.hidden_dim);
    fill(p.w_ix);
    fill(p.w_im);
    fill(p.w_fx);
    fill(p.w_fm);
    fill(p.w_cx);
    fill(p.w_cm);
    fill(p.w_ox);
    fill(p.w_om);
    p.b_f.setOnes();
    net.layers.push_back(std::move(p));
    in = dims.hidden_dim;
  }
  net.output.w_ym = Eigen::MatrixXd::Zero(idx(dims.output_dim), idx(dims.hidden_dim));
  fill(net.output.w_ym);
  net.output.b_y = Eigen::VectorXd::Zero(idx(dims.output_dim));
  net.output.activation = dims.activation;
  return net;
}

TrafficVector predict_next(const LstmNetwork& net, const TrafficSeries& recent, std::size_t w) {
  const WindowMatrix window = last_window(recent, w);
  const Eigen::VectorXd y = predict(net, window);
  std::vector<double> values(static_cast<std::size_t>(y.size()));
  for (Eigen::Index k = 0; k < y.size(); ++k) values[static_cast<std::size_t>(k)] = std::max(0.0, y(k));
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(values.size()))));
  return TrafficVector(n, std::move(values));
}

}  // namespace tmpredict
