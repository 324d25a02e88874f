#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "sketchrl/geometry.hpp"
#include "sketchrl/network.hpp"

namespace sketchrl {

/// d(canvas, target): higher means more similar.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double score(const Canvas& canvas, const Canvas& target) const = 0;
  virtual std::string name() const = 0;
};

/// Negative mean squared pixel difference.
double l2_score(const Canvas& canvas, const Canvas& target);

/// Mean squared pixel difference; the "L2 distance" reported by evaluation.
inline double l2_distance(const Canvas& canvas, const Canvas& target) {
  return -l2_score(canvas, target);
}

class L2Similarity final : public SimilarityProvider {
 public:
  double score(const Canvas& canvas, const Canvas& target) const override {
    return l2_score(canvas, target);
  }
  std::string name() const override { return "l2"; }
};

struct SpectralNormResult {
  Eigen::MatrixXd normalized;
  double sigma = 0.0;
  bool degenerate = false;  // zero matrix: returned unchanged
};

/// Divides by the largest singular value estimated with power iteration.
SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight, int power_iterations = 50);

/// Largest singular value by power iteration from a fixed start vector.
double power_iteration_norm(const Eigen::MatrixXd& weight, int iterations);

struct DiscriminatorConfig {
  std::vector<int> hidden = {128, 64};
  int power_iterations = 1;  // warm-started steps per refresh before the settle check
  double learning_rate = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  bool zero_init_output = true;
};

/// Conditional discriminator over the stacked (canvas, target) pair with
/// spectrally normalized dense layers, trained with the hinge loss.
class Discriminator {
 public:
  struct CanvasPair {
    const Canvas* canvas;
    const Canvas* target;
  };

  Discriminator(int width, int height, DiscriminatorConfig cfg, Rng& rng);

  int width() const { return width_; }
  int height() const { return height_; }
  const DiscriminatorConfig& config() const { return cfg_; }

  /// Raw output for one pair with the current normalized weights.
  double score(const Canvas& canvas, const Canvas& target) const;

  /// Hinge loss mean(relu(1 - d(real))) + mean(relu(1 + d(fake))) with the
  /// singular vectors held fixed. Gradient is w.r.t. the raw weights.
  double hinge_loss(const std::vector<CanvasPair>& real, const std::vector<CanvasPair>& fake,
                    NetworkGradient* grad = nullptr) const;

  /// One Adam step on the hinge loss, then a refresh of the singular vectors
  /// for the new weights. Returns the loss evaluated before the step.
  double update(const std::vector<CanvasPair>& real, const std::vector<CanvasPair>& fake);

  /// Warm-started power iteration until sigma settles to 1e-9, falling back to
  /// an exact leading-pair solve when it does not.
  void refresh_singular_vectors();

  /// Network with every layer divided by its current sigma estimate.
  const DenseNetwork& normalized_network() const { return normalized_; }

  const DenseNetwork& raw_network() const { return net_; }
  void set_raw_parameters(std::span<const double> flat);

  const std::vector<Eigen::VectorXd>& left_vectors() const { return u_; }
  const std::vector<Eigen::VectorXd>& right_vectors() const { return v_; }
  void set_singular_vectors(std::vector<Eigen::VectorXd> u, std::vector<Eigen::VectorXd> v);

  Eigen::MatrixXd encode(const std::vector<CanvasPair>& pairs) const;

 private:
  double sigma(std::size_t layer) const;
  DenseNetwork build_normalized() const;
  void rebuild() { normalized_ = build_normalized(); }

  int width_, height_;
  DiscriminatorConfig cfg_;
  DenseNetwork net_;
  DenseNetwork normalized_;
  std::vector<Eigen::VectorXd> u_, v_;
  Adam adam_;
};

class AdversarialSimilarity final : public SimilarityProvider {
 public:
  explicit AdversarialSimilarity(std::shared_ptr<Discriminator> d) : d_(std::move(d)) {}
  double score(const Canvas& canvas, const Canvas& target) const override {
    return d_->score(canvas, target);
  }
  std::string name() const override { return "adversarial"; }
  Discriminator& discriminator() { return *d_; }
  const Discriminator& discriminator() const { return *d_; }

 private:
  std::shared_ptr<Discriminator> d_;
};

}  // namespace sketchrl

namespace sketchrl {

/// One hinge-loss step on an adversarial provider; throws for other variants
/// or empty batches.
double discriminator_update(SimilarityProvider& provider,
                            const std::vector<Discriminator::CanvasPair>& real,
                            const std::vector<Discriminator::CanvasPair>& fake);

}  // namespace sketchrl
