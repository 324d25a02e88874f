#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sketchrl {

using Rng = std::mt19937_64;

enum class Activation { Identity, Tanh, Relu };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Identity;
};

struct LayerGradient {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Parameter gradients, laid out like DenseNetwork's layers.
struct NetworkGradient {
  std::vector<LayerGradient> layers;

  std::vector<double> flatten() const;
  NetworkGradient& operator+=(const NetworkGradient& other);
  NetworkGradient& operator*=(double s);
};

/// Fully connected feed-forward network. Batches are column-major: one
/// sample per column.
class DenseNetwork {
 public:
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;   // input to each layer
    std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
  };

  DenseNetwork() = default;

  /// sizes = {in, hidden..., out}. He init for relu layers, Xavier otherwise.
  DenseNetwork(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng);

  explicit DenseNetwork(std::vector<DenseLayer> layers);

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape& tape) const;

  /// Reverse pass for the scalar sum(output .* upstream). Input gradient is
  /// written when requested.
  NetworkGradient backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* input_grad = nullptr) const;

  NetworkGradient zero_gradient() const;

  /// Flat view: per layer, weight (column-major) then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

 private:
  void check_dims() const;

  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over the parameters of one network.
class Adam {
 public:
  Adam() = default;
  Adam(const DenseNetwork& net, AdamConfig cfg);

  void step(DenseNetwork& net, const NetworkGradient& grad);
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  NetworkGradient m_, v_;
  long long t_ = 0;
};

/// Adam for a single scalar parameter.
class ScalarAdam {
 public:
  ScalarAdam() = default;
  explicit ScalarAdam(AdamConfig cfg) : cfg_(cfg) {}
  void step(double& value, double grad);

 private:
  AdamConfig cfg_;
  double m_ = 0.0, v_ = 0.0;
  long long t_ = 0;
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Tanh-squashed diagonal Gaussian driven by a head whose rows are
/// [mean (A rows); raw log-std (A rows)].
struct SquashedGaussianSample {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd log_std;       // clamped
  Eigen::MatrixXd log_std_live;  // 1 where the clamp is inactive
  Eigen::MatrixXd noise;
  Eigen::MatrixXd pre_tanh;
  Eigen::MatrixXd action;        // in (-1, 1)
  Eigen::VectorXd log_prob;      // per sample (column)
};

/// Reparameterized sample u = mean + std * noise, a = tanh(u). Passing a zero
/// noise matrix with deterministic = true yields tanh(mean).
SquashedGaussianSample squashed_gaussian(const Eigen::MatrixXd& head, const Eigen::MatrixXd& noise);

/// Gradient w.r.t. the head for upstream d(action) and d(log_prob), noise held fixed.
Eigen::MatrixXd squashed_gaussian_backward(const SquashedGaussianSample& s,
                                           const Eigen::MatrixXd& d_action,
                                           const Eigen::VectorXd& d_log_prob);

/// Log density of a given squashed action (|a| < 1) for a single dimension.
double squashed_gaussian_log_density(double mean, double log_std, double action);

Eigen::MatrixXd standard_normal(int rows, int cols, Rng& rng);

}  // namespace sketchrl
