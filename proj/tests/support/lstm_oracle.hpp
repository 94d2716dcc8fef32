#ifndef TMPREDICT_LSTM_ORACLE_HPP
#define TMPREDICT_LSTM_ORACLE_HPP

// Independent scalar LSTM forward pass and random fixtures, shared by the
// unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tmpredict/lstm.hpp"

namespace tmpredict::testing {

inline WindowMatrix random_window(std::mt19937_64& rng, std::size_t w, std::size_t width, std::size_t out_dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WindowMatrix win;
  win.w = w;
  win.n2 = width;
  win.rows = Eigen::MatrixXd(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(width));
  for (Eigen::Index r = 0; r < win.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < win.rows.cols(); ++c) win.rows(r, c) = u(rng);
  }
  Eigen::VectorXd target(static_cast<Eigen::Index>(out_dim));
  for (Eigen::Index k = 0; k < target.size(); ++k) target(k) = u(rng);
  win.target = target;
  return win;
}

// Randomizes every parameter, peepholes and biases included, so the
// checks below exercise every term.
inline void scramble(LstmNetwork& net, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : parameter_views(net)) {
    for (Eigen::Index k = 0; k < v.values.size(); ++k) v.values(k) = u(rng);
  }
}

inline LstmNetwork random_net(std::mt19937_64& rng, std::size_t in, std::size_t hidden, std::size_t layers,
                       std::size_t out, double scale = 0.5) {
  NetworkDims d;
  d.input_dim = in;
  d.hidden_dim = hidden;
  d.layers = layers;
  d.output_dim = out;
  auto net = init_params(d, rng());
  scramble(net, rng, scale);
  return net;
}

inline double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Straight-line scalar transcription of the cell equations.
inline std::vector<double> oracle_forward(const LstmNetwork& net, const Eigen::MatrixXd& rows) {
  const std::size_t steps = static_cast<std::size_t>(rows.rows());
  std::vector<std::vector<double>> inputs(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) inputs[t].push_back(rows(static_cast<Eigen::Index>(t), c));
  }
  for (const auto& L : net.layers) {
    const std::size_t h = L.hidden_dim;
    std::vector<double> c(h, 0.0), m(h, 0.0);
    std::vector<std::vector<double>> outputs(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto& x = inputs[t];
      std::vector<double> nc(h), nm(h);
      for (std::size_t r = 0; r < h; ++r) {
        const auto R = static_cast<Eigen::Index>(r);
        double ai = L.b_i(R) + L.w_ic(R) * c[r];
        double af = L.b_f(R) + L.w_fc(R) * c[r];
        double ag = L.b_c(R);
        double ao = L.b_o(R);
        for (std::size_t k = 0; k < x.size(); ++k) {
          const auto K = static_cast<Eigen::Index>(k);
          ai += L.w_ix(R, K) * x[k];
          af += L.w_fx(R, K) * x[k];
          ag += L.w_cx(R, K) * x[k];
          ao += L.w_ox(R, K) * x[k];
        }
        for (std::size_t k = 0; k < h; ++k) {
          const auto K = static_cast<Eigen::Index>(k);
          ai += L.w_im(R, K) * m[k];
          af += L.w_fm(R, K) * m[k];
          ag += L.w_cm(R, K) * m[k];
          ao += L.w_om(R, K) * m[k];
        }
        nc[r] = sig(af) * c[r] + sig(ai) * std::tanh(ag);
        ao += L.w_oc(R) * nc[r];
        nm[r] = sig(ao) * std::tanh(nc[r]);
      }
      c = nc;
      m = nm;
      outputs[t] = nm;
    }
    inputs = outputs;
  }
  const auto& top = inputs.back();
  std::vector<double> y;
  for (Eigen::Index r = 0; r < net.output.b_y.size(); ++r) {
    double z = net.output.b_y(r);
    for (std::size_t k = 0; k < top.size(); ++k) z += net.output.w_ym(r, static_cast<Eigen::Index>(k)) * top[k];
    y.push_back(net.output.activation == OutputActivation::Sigmoid ? sig(z) : z);
  }
  return y;
}

inline double loss_of(const LstmNetwork& net, const WindowMatrix& win) {
  const Eigen::VectorXd r = predict(net, win) - *win.target;
  return r.squaredNorm() / static_cast<double>(r.size());
}

struct GradientCheck {
  double worst_relative = 0.0;
  std::size_t checked = 0;
};

/// Central differences against bptt_gradients for every parameter. The
/// relative error uses max(|analytic|, |numeric|, 1e-6) as its scale.
inline GradientCheck check_gradients(LstmNetwork net, const WindowMatrix& win, double eps = 1e-5) {
  auto grads = bptt_gradients(net, win).gradients;
  auto gviews = parameter_views(grads);
  auto pviews = parameter_views(net);
  GradientCheck out;
  for (std::size_t a = 0; a < pviews.size(); ++a) {
    for (Eigen::Index k = 0; k < pviews[a].values.size(); ++k) {
      const double saved = pviews[a].values(k);
      pviews[a].values(k) = saved + eps;
      const double up = loss_of(net, win);
      pviews[a].values(k) = saved - eps;
      const double down = loss_of(net, win);
      pviews[a].values(k) = saved;
      const double numeric = (up - down) / (2 * eps);
      const double g = gviews[a].values(k);
      const double scale = std::max({std::abs(g), std::abs(numeric), 1e-6});
      out.worst_relative = std::max(out.worst_relative, std::abs(g - numeric) / scale);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace tmpredict::testing

#endif  // TMPREDICT_LSTM_ORACLE_HPP
