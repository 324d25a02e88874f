#include "sketchrl/similarity.hpp"

#include <cmath>
#include <stdexcept>

namespace sketchrl {

namespace {

constexpr double kDegenerateSigma = 1e-12;

Eigen::VectorXd start_vector(Eigen::Index n) {
  Eigen::VectorXd u(n);
  // Deterministic and never orthogonal to a generic singular vector.
  for (Eigen::Index i = 0; i < n; ++i) u(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
  return u.normalized();
}

void power_step(const Eigen::MatrixXd& w, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  Eigen::VectorXd nv = w.transpose() * u;
  const double nvn = nv.norm();
  if (nvn > 0) v = nv / nvn;
  Eigen::VectorXd nu = w * v;
  const double nun = nu.norm();
  if (nun > 0) u = nu / nun;
}

constexpr int kSettleIterations = 50;
constexpr double kSettleTolerance = 1e-9;

// Exact leading singular pair from the smaller Gram matrix. The sign follows
// the previous left vector so u and v move continuously between refreshes.
void top_singular_pair(const Eigen::MatrixXd& w, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  if (w.rows() <= w.cols()) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
    Eigen::VectorXd nu = es.eigenvectors().col(w.rows() - 1);
    if (nu.dot(u) < 0) nu = -nu;
    u = nu;
    const Eigen::VectorXd nv = w.transpose() * u;
    const double n = nv.norm();
    v = n > 0 ? Eigen::VectorXd(nv / n) : Eigen::VectorXd::Zero(w.cols());
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.transpose() * w);
    v = es.eigenvectors().col(w.cols() - 1);
    Eigen::VectorXd nu = w * v;
    const double n = nu.norm();
    if (n > 0) {
      nu /= n;
      if (nu.dot(u) < 0) {
        nu = -nu;
        v = -v;
      }
      u = nu;
    }
  }
}

}  // namespace

double l2_score(const Canvas& canvas, const Canvas& target) {
  if (!canvas.same_shape(target)) {
    throw std::invalid_argument("similarity: canvas " + std::to_string(canvas.width()) + "x" +
                                std::to_string(canvas.height()) + " vs target " +
                                std::to_string(target.width()) + "x" +
                                std::to_string(target.height()));
  }
  const auto a = canvas.cells(), b = target.cells();
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] != b[i]);
  // Binary cells: squared difference equals inequality.
  return -static_cast<double>(diff) / static_cast<double>(a.size());
}

double power_iteration_norm(const Eigen::MatrixXd& weight, int iterations) {
  if (weight.size() == 0) return 0.0;
  Eigen::VectorXd u = start_vector(weight.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(weight.cols());
  for (int i = 0; i < std::max(iterations, 1); ++i) power_step(weight, u, v);
  return u.dot(weight * v);
}

SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight, int power_iterations) {
  if (power_iterations < 1) throw std::invalid_argument("power_iterations must be >= 1");
  if (!weight.allFinite()) throw std::invalid_argument("spectral_normalize: non-finite matrix");
  SpectralNormResult r;
  r.sigma = power_iteration_norm(weight, power_iterations);
  if (!(r.sigma > kDegenerateSigma)) {
    r.normalized = weight;
    r.degenerate = true;
    return r;
  }
  r.normalized = weight / r.sigma;
  return r;
}

Discriminator::Discriminator(int width, int height, DiscriminatorConfig cfg, Rng& rng)
    : width_(width), height_(height), cfg_(std::move(cfg)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("discriminator: bad canvas size");
  if (cfg_.power_iterations < 1) throw std::invalid_argument("power_iterations must be >= 1");
  std::vector<int> sizes{2 * width * height};
  sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  sizes.push_back(1);
  net_ = DenseNetwork(sizes, Activation::Relu, Activation::Identity, rng);
  if (cfg_.zero_init_output) net_.layers().back().weight.setZero();
  for (const auto& l : net_.layers()) {
    u_.push_back(start_vector(l.weight.rows()));
    v_.push_back(Eigen::VectorXd::Zero(l.weight.cols()));
  }
  refresh_singular_vectors();
  adam_ = Adam(net_, AdamConfig{cfg_.learning_rate, cfg_.beta1, cfg_.beta2, 1e-8});
}

void Discriminator::refresh_singular_vectors() {
  for (std::size_t k = 0; k < net_.layers().size(); ++k) {
    const auto& w = net_.layers()[k].weight;
    for (int i = 0; i < cfg_.power_iterations; ++i) power_step(w, u_[k], v_[k]);
    double prev = sigma(k);
    bool settled = false;
    for (int i = 0; i < kSettleIterations && !settled; ++i) {
      power_step(w, u_[k], v_[k]);
      const double now = sigma(k);
      settled = std::abs(now - prev) <= kSettleTolerance * std::abs(now);
      prev = now;
    }
    // Clustered leading singular values converge slowly; solve exactly then.
    if (!settled) top_singular_pair(w, u_[k], v_[k]);
  }
  rebuild();
}

void Discriminator::set_raw_parameters(std::span<const double> flat) {
  net_.set_parameters(flat);
  rebuild();
}

void Discriminator::set_singular_vectors(std::vector<Eigen::VectorXd> u, std::vector<Eigen::VectorXd> v) {
  if (u.size() != net_.layers().size() || v.size() != net_.layers().size()) {
    throw std::invalid_argument("singular vector count mismatch");
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k].size() != net_.layers()[k].weight.rows() || v[k].size() != net_.layers()[k].weight.cols()) {
      throw std::invalid_argument("singular vector size mismatch");
    }
  }
  u_ = std::move(u);
  v_ = std::move(v);
  rebuild();
}

double Discriminator::sigma(std::size_t layer) const {
  return u_[layer].dot(net_.layers()[layer].weight * v_[layer]);
}

DenseNetwork Discriminator::build_normalized() const {
  DenseNetwork out = net_;
  for (std::size_t k = 0; k < out.layers().size(); ++k) {
    const double s = sigma(k);
    if (s > kDegenerateSigma) out.layers()[k].weight /= s;
  }
  return out;
}

Eigen::MatrixXd Discriminator::encode(const std::vector<CanvasPair>& pairs) const {
  const Eigen::Index n = static_cast<Eigen::Index>(width_) * height_;
  Eigen::MatrixXd x(2 * n, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& p = pairs[j];
    if (!p.canvas || !p.target) throw std::invalid_argument("discriminator: null canvas");
    if (p.canvas->width() != width_ || p.canvas->height() != height_ || !p.canvas->same_shape(*p.target)) {
      throw std::invalid_argument("discriminator: canvas dimensions do not match");
    }
    const auto c = p.canvas->cells(), t = p.target->cells();
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, j) = c[i];
      x(n + i, j) = t[i];
    }
  }
  return x;
}

double Discriminator::score(const Canvas& canvas, const Canvas& target) const {
  const auto out = normalized_network().forward(encode({{&canvas, &target}}));
  return out(0, 0);
}

double Discriminator::hinge_loss(const std::vector<CanvasPair>& real, const std::vector<CanvasPair>& fake,
                                 NetworkGradient* grad) const {
  if (real.empty() || fake.empty()) throw std::invalid_argument("discriminator: empty batch");
  const DenseNetwork sn = build_normalized();
  std::vector<CanvasPair> all = real;
  all.insert(all.end(), fake.begin(), fake.end());
  DenseNetwork::Tape tape;
  const Eigen::MatrixXd d = sn.forward(encode(all), tape);
  const double nr = static_cast<double>(real.size()), nf = static_cast<double>(fake.size());
  double loss = 0.0;
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(1, d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    if (j < static_cast<Eigen::Index>(real.size())) {
      const double m = 1.0 - d(0, j);
      if (m > 0) {
        loss += m / nr;
        upstream(0, j) = -1.0 / nr;
      }
    } else {
      const double m = 1.0 + d(0, j);
      if (m > 0) {
        loss += m / nf;
        upstream(0, j) = 1.0 / nf;
      }
    }
  }
  if (grad) {
    *grad = sn.backward(tape, upstream);
    // W_sn = W / sigma with sigma = u^T W v and (u, v) constant:
    // dL/dW = G / sigma - <G, W> / sigma^2 * u v^T.
    for (std::size_t k = 0; k < net_.layers().size(); ++k) {
      const double s = sigma(k);
      if (!(s > kDegenerateSigma)) continue;
      auto& g = grad->layers[k].weight;
      const auto& w = net_.layers()[k].weight;
      const double inner = (g.array() * w.array()).sum();
      g = g / s - (inner / (s * s)) * (u_[k] * v_[k].transpose());
    }
  }
  return loss;
}

double Discriminator::update(const std::vector<CanvasPair>& real, const std::vector<CanvasPair>& fake) {
  NetworkGradient grad;
  const double loss = hinge_loss(real, fake, &grad);
  adam_.step(net_, grad);
  refresh_singular_vectors();
  return loss;
}

double discriminator_update(SimilarityProvider& provider,
                            const std::vector<Discriminator::CanvasPair>& real,
                            const std::vector<Discriminator::CanvasPair>& fake) {
  auto* adv = dynamic_cast<AdversarialSimilarity*>(&provider);
  if (!adv) {
    throw std::logic_error("discriminator_update requires the adversarial provider, got '" +
                           provider.name() + "'");
  }
  return adv->discriminator().update(real, fake);
}

}  // namespace sketchrl
