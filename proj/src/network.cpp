#include "sketchrl/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sketchrl {

namespace {

void apply_activation(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::Identity:
      break;
    case Activation::Tanh:
      z = z.array().tanh();
      break;
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
  }
}

// Derivative expressed through the activation output y.
Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& y, Activation a) {
  switch (a) {
    case Activation::Identity:
      return Eigen::MatrixXd::Ones(y.rows(), y.cols());
    case Activation::Tanh:
      return (1.0 - y.array().square()).matrix();
    case Activation::Relu:
      return (y.array() > 0.0).cast<double>().matrix();
  }
  return {};
}

// log(1 - tanh(u)^2) without cancellation for large |u|.
double log_one_minus_tanh_sq(double u) {
  const double x = -2.0 * u;
  const double softplus = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return 2.0 * (std::numbers::ln2 - u - softplus);
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity:
      return "identity";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::vector<double> NetworkGradient::flatten() const {
  std::vector<double> out;
  for (const auto& l : layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

NetworkGradient& NetworkGradient::operator+=(const NetworkGradient& other) {
  if (other.layers.size() != layers.size()) throw std::invalid_argument("gradient layout mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

NetworkGradient& NetworkGradient::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

DenseNetwork::DenseNetwork(std::span<const int> sizes, Activation hidden, Activation output,
                           Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i], out = sizes[i + 1];
    if (in <= 0 || out <= 0) throw std::invalid_argument("layer sizes must be positive");
    DenseLayer layer;
    layer.activation = (i + 2 == sizes.size()) ? output : hidden;
    layer.weight.resize(out, in);
    layer.bias = Eigen::VectorXd::Zero(out);
    if (layer.activation == Activation::Relu) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
      for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = dist(rng);
    } else {
      const double limit = std::sqrt(6.0 / (in + out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = dist(rng);
    }
    layers_.push_back(std::move(layer));
  }
}

DenseNetwork::DenseNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  check_dims();
}

void DenseNetwork::check_dims() const {
  if (layers_.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": bias size != weight rows");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": input width " +
                                  std::to_string(l.weight.cols()) + " != previous output " +
                                  std::to_string(layers_[i - 1].weight.rows()));
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw std::invalid_argument("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
}

int DenseNetwork::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNetwork::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("network input has " + std::to_string(input.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd x = input;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weight * x;
    z.colwise() += l.bias;
    apply_activation(z, l.activation);
    x = std::move(z);
  }
  return x;
}

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& input, Tape& tape) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("network input has " + std::to_string(input.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  }
  tape.inputs.resize(layers_.size());
  tape.outputs.resize(layers_.size());
  const Eigen::MatrixXd* x = &input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    tape.inputs[i] = *x;
    Eigen::MatrixXd z = l.weight * (*x);
    z.colwise() += l.bias;
    apply_activation(z, l.activation);
    tape.outputs[i] = std::move(z);
    x = &tape.outputs[i];
  }
  return tape.outputs.back();
}

NetworkGradient DenseNetwork::backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                                       Eigen::MatrixXd* input_grad) const {
  if (tape.outputs.size() != layers_.size()) throw std::invalid_argument("tape does not match network");
  if (upstream.rows() != output_dim() || upstream.cols() != tape.outputs.back().cols()) {
    throw std::invalid_argument("upstream gradient shape does not match network output");
  }
  NetworkGradient grad;
  grad.layers.resize(layers_.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    Eigen::MatrixXd dz = delta.cwiseProduct(activation_slope(tape.outputs[k], l.activation));
    grad.layers[k].weight.noalias() = dz * tape.inputs[k].transpose();
    grad.layers[k].bias = dz.rowwise().sum();
    if (k > 0 || input_grad) {
      Eigen::MatrixXd next = l.weight.transpose() * dz;
      if (k == 0) {
        *input_grad = std::move(next);
      } else {
        delta = std::move(next);
      }
    }
  }
  return grad;
}

NetworkGradient DenseNetwork::zero_gradient() const {
  NetworkGradient g;
  for (const auto& l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

std::vector<double> DenseNetwork::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void DenseNetwork::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  for (auto& l : layers_) {
    std::copy_n(flat.begin() + pos, l.weight.size(), l.weight.data());
    pos += l.weight.size();
    std::copy_n(flat.begin() + pos, l.bias.size(), l.bias.data());
    pos += l.bias.size();
  }
}

Adam::Adam(const DenseNetwork& net, AdamConfig cfg)
    : cfg_(cfg), m_(net.zero_gradient()), v_(net.zero_gradient()) {}

void Adam::step(DenseNetwork& net, const NetworkGradient& grad) {
  auto& layers = net.layers();
  if (grad.layers.size() != layers.size() || m_.layers.size() != layers.size()) {
    throw std::invalid_argument("Adam: gradient layout does not match network");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double lr = cfg_.learning_rate * std::sqrt(c2) / c1;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    param.array() -= lr * m.array() / (v.array().sqrt() + cfg_.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, m_.layers[i].weight, v_.layers[i].weight, grad.layers[i].weight);
    update(layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grad.layers[i].bias);
  }
}

void ScalarAdam::step(double& value, double grad) {
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad * grad;
  const double mhat = m_ / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const double vhat = v_ / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  value -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
}

SquashedGaussianSample squashed_gaussian(const Eigen::MatrixXd& head, const Eigen::MatrixXd& noise) {
  if (head.rows() % 2 != 0) throw std::invalid_argument("policy head needs an even number of rows");
  const Eigen::Index a = head.rows() / 2, b = head.cols();
  if (noise.rows() != a || noise.cols() != b) throw std::invalid_argument("noise shape mismatch");
  SquashedGaussianSample s;
  s.mean = head.topRows(a);
  const Eigen::MatrixXd raw = head.bottomRows(a);
  s.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.log_std_live = ((raw.array() >= kLogStdMin) && (raw.array() <= kLogStdMax)).cast<double>().matrix();
  s.noise = noise;
  s.pre_tanh = s.mean + (s.log_std.array().exp() * noise.array()).matrix();
  s.action = s.pre_tanh.array().tanh();
  constexpr double half_log_2pi = 0.91893853320467274178;
  s.log_prob.resize(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < a; ++i) {
      const double xi = noise(i, j);
      lp += -0.5 * xi * xi - s.log_std(i, j) - half_log_2pi - log_one_minus_tanh_sq(s.pre_tanh(i, j));
    }
    s.log_prob(j) = lp;
  }
  return s;
}

Eigen::MatrixXd squashed_gaussian_backward(const SquashedGaussianSample& s,
                                           const Eigen::MatrixXd& d_action,
                                           const Eigen::VectorXd& d_log_prob) {
  const Eigen::Index a = s.mean.rows(), b = s.mean.cols();
  if (d_action.rows() != a || d_action.cols() != b || d_log_prob.size() != b) {
    throw std::invalid_argument("squashed_gaussian_backward: shape mismatch");
  }
  Eigen::MatrixXd grad(2 * a, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < a; ++i) {
      const double act = s.action(i, j);
      const double sigma_xi = std::exp(s.log_std(i, j)) * s.noise(i, j);
      // d logp / du = 2 tanh(u) from the change-of-variables term.
      const double du = d_action(i, j) * (1.0 - act * act) + d_log_prob(j) * 2.0 * act;
      grad(i, j) = du;
      const double dls = du * sigma_xi - d_log_prob(j);
      grad(a + i, j) = dls * s.log_std_live(i, j);
    }
  }
  return grad;
}

double squashed_gaussian_log_density(double mean, double log_std, double action) {
  if (!(std::abs(action) < 1.0)) throw std::invalid_argument("squashed action must lie in (-1, 1)");
  const double ls = std::clamp(log_std, kLogStdMin, kLogStdMax);
  const double u = std::atanh(action);
  const double xi = (u - mean) / std::exp(ls);
  constexpr double half_log_2pi = 0.91893853320467274178;
  return -0.5 * xi * xi - ls - half_log_2pi - std::log1p(-action * action);
}

Eigen::MatrixXd standard_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order keeps draws reproducible per sample.
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

}  // namespace sketchrl
