#ifndef TMPREDICT_LSTM_HPP
#define TMPREDICT_LSTM_HPP

// Stacked peephole LSTM regressor mapping a window of traffic vectors to the
// next traffic vector.
//
// Per layer and time step:
//   i_t = sigmoid(W_ix x_t + W_im m_{t-1} + w_ic . c_{t-1} + b_i)
//   f_t = sigmoid(W_fx x_t + W_fm m_{t-1} + w_fc . c_{t-1} + b_f)
//   c_t = f_t . c_{t-1} + i_t . tanh(W_cx x_t + W_cm m_{t-1} + b_c)
//   o_t = sigmoid(W_ox x_t + W_om m_{t-1} + w_oc . c_t + b_o)
//   m_t = o_t . tanh(c_t)
// and the head is y = act(W_ym m_T + b_y) on the top layer's last output.
// Peephole weights are diagonal, stored as vectors.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tmpredict/error.hpp"
#include "tmpredict/traffic.hpp"

namespace tmpredict {

struct LstmLayerParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Eigen::MatrixXd w_ix, w_im;
  Eigen::VectorXd w_ic, b_i;
  Eigen::MatrixXd w_fx, w_fm;
  Eigen::VectorXd w_fc, b_f;
  Eigen::MatrixXd w_cx, w_cm;
  Eigen::VectorXd b_c;
  Eigen::MatrixXd w_ox, w_om;
  Eigen::VectorXd w_oc, b_o;

  static LstmLayerParams zeros(std::size_t input_dim, std::size_t hidden_dim);
};

enum class OutputActivation { Identity, Sigmoid };

OutputActivation parse_output_activation(const std::string& name);
std::string to_string(OutputActivation activation);

struct OutputLayerParams {
  Eigen::MatrixXd w_ym;
  Eigen::VectorXd b_y;
  OutputActivation activation = OutputActivation::Identity;
};

struct NetworkDims {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 64;
  std::size_t layers = 1;
  std::size_t output_dim = 0;
  OutputActivation activation = OutputActivation::Identity;
};

struct LstmNetwork {
  std::vector<LstmLayerParams> layers;
  OutputLayerParams output;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
  std::size_t output_dim() const { return static_cast<std::size_t>(output.b_y.size()); }
  NetworkDims dims() const;

  /// Same shapes, every value zero. Used as a gradient accumulator.
  static LstmNetwork zeros_like(const LstmNetwork& net);

  /// Throws ShapeMismatch unless every array agrees with the layer dims.
  void validate() const;
};

/// Named views over every parameter array in a fixed order.
struct ParamView {
  std::string name;
  Eigen::Map<Eigen::VectorXd> values;
};
std::vector<ParamView> parameter_views(LstmNetwork& net);
std::size_t parameter_count(const LstmNetwork& net);

struct LayerState {
  Eigen::VectorXd c;
  Eigen::VectorXd m;

  static LayerState zeros(std::size_t hidden_dim);
};

struct CellStep {
  Eigen::VectorXd i, f, g, o;  // gates and candidate (post-activation)
  Eigen::VectorXd c, tanh_c, m;
};

/// One time step of one layer.
CellStep cell_forward(const LstmLayerParams& params, const Eigen::VectorXd& x,
                      const LayerState& prev);

/// Intermediate activations of one forward pass, retained for BPTT.
struct ForwardCache {
  std::vector<std::vector<Eigen::VectorXd>> inputs;  // [layer][t]
  std::vector<std::vector<CellStep>> steps;          // [layer][t]
  Eigen::VectorXd y;
};

/// Feeds the window rows in time order from zero state; returns the head
/// output for the last step.
ForwardCache forward(const LstmNetwork& net, const WindowMatrix& window);

/// Output only.
Eigen::VectorXd predict(const LstmNetwork& net, const WindowMatrix& window);

struct GradientResult {
  LstmNetwork gradients;  // same shapes as the network
  double loss = 0.0;
};

/// Mean squared error over the output vector and its exact gradient with
/// respect to every parameter, unrolled over the full window.
GradientResult bptt_gradients(const LstmNetwork& net, const WindowMatrix& window);

/// Same, reusing a forward cache already computed for `window`.
GradientResult bptt_gradients(const LstmNetwork& net, const WindowMatrix& window,
                              const ForwardCache& cache);

enum class Optimizer { Sgd, Adaptive };

Optimizer parse_optimizer(const std::string& name);
std::string to_string(Optimizer optimizer);

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adaptive;
  double clip_norm = 5.0;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  /// Decay of the running squared-gradient average (adaptive optimizer).
  double decay = 0.9;
  double epsilon = 1e-8;

  void validate() const;
};

struct TrainResult {
  LstmNetwork net;
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Thrown when the loss turns non-finite; carries the epochs completed.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& message, std::vector<double> partial)
      : Error(ErrorCode::DivergenceDetected, message), partial_(std::move(partial)) {}
  const std::vector<double>& loss_history() const { return partial_; }

 private:
  std::vector<double> partial_;
};

/// Global L2 norm over all gradient arrays.
double global_norm(const LstmNetwork& grads);

/// Scales `grads` so its global norm is at most `clip_norm`; returns the
/// pre-clip norm. Leaves `grads` untouched when already within the bound.
double clip_gradients(LstmNetwork& grads, double clip_norm);

/// Mini-batch training with a seed-derived shuffle per epoch.
TrainResult train(LstmNetwork net, const std::vector<WindowMatrix>& samples,
                  const TrainConfig& config);

/// Uniform [-s, s] weights with s = 1/sqrt(hidden_dim); forget bias 1;
/// other biases and all peepholes 0.
LstmNetwork init_params(const NetworkDims& dims, std::uint64_t seed);

/// Window from the last `w` matrices of `recent`, forward, negatives floored.
TrafficVector predict_next(const LstmNetwork& net, const TrafficSeries& recent, std::size_t w);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  LstmNetwork net;
  NormParams norm;
  std::size_t window = 10;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tmpredict

#endif  // TMPREDICT_LSTM_HPP
