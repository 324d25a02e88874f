#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sketchrl/similarity.hpp"

using namespace sketchrl;

TEST(L2, Examples) {
  Canvas a(4, 4), b(4, 4);
  EXPECT_EQ(l2_score(a, b), 0.0);
  b.set({2, 1});
  EXPECT_DOUBLE_EQ(l2_score(a, b), -1.0 / 16);
  EXPECT_DOUBLE_EQ(l2_score(b, a), l2_score(a, b));
  EXPECT_DOUBLE_EQ(l2_distance(a, b), 1.0 / 16);
  EXPECT_THROW(l2_score(a, Canvas(4, 5)), std::invalid_argument);
  EXPECT_EQ(L2Similarity().name(), "l2");
}

TEST(SpectralNorm, Examples) {
  const auto id = spectral_normalize(Eigen::Matrix3d::Identity());
  EXPECT_TRUE(id.normalized.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  Eigen::Matrix2d d = Eigen::Vector2d(2, 1).asDiagonal();
  const auto r = spectral_normalize(d);
  EXPECT_NEAR(r.sigma, 2.0, 1e-9);
  EXPECT_NEAR(r.normalized(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(r.normalized(1, 1), 0.5, 1e-9);
  EXPECT_NEAR(r.normalized(0, 1), 0.0, 1e-12);
}

TEST(SpectralNorm, HomogeneityAndBound) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    std::normal_distribution<double> n;
    Eigen::MatrixXd w(3 + i % 5, 2 + i % 7);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = n(rng);
    const auto r = spectral_normalize(w);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.normalized);
    EXPECT_LE(svd.singularValues()(0), 1.0 + 1e-3);
    EXPECT_LE(power_iteration_norm(r.normalized, 50), 1.0 + 1e-3);
    const auto twice = spectral_normalize(2.0 * r.normalized);
    EXPECT_TRUE(twice.normalized.isApprox(spectral_normalize(r.normalized).normalized, 1e-9));
  }
}

TEST(SpectralNorm, ZeroAndInvalid) {
  const auto z = spectral_normalize(Eigen::MatrixXd::Zero(3, 2));
  EXPECT_TRUE(z.degenerate);
  EXPECT_TRUE(z.normalized.isZero());
  EXPECT_THROW(spectral_normalize(Eigen::Matrix2d::Identity(), 0), std::invalid_argument);
  Eigen::Matrix2d bad = Eigen::Matrix2d::Identity();
  bad(0, 1) = std::nan("");
  EXPECT_THROW(spectral_normalize(bad), std::invalid_argument);
}

namespace {

struct Pairs {
  std::vector<Canvas> canvases, targets;
  std::vector<Discriminator::CanvasPair> real, fake;
};

Pairs make_pairs(int n, int side, std::uint64_t seed) {
  Pairs p;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, side - 1);
  for (int i = 0; i < n; ++i) {
    Canvas t(side, side), c(side, side);
    rasterize_segment(t, {u(rng), u(rng)}, {u(rng), u(rng)}, true);
    rasterize_segment(c, {u(rng), u(rng)}, {u(rng), u(rng)}, true);
    p.targets.push_back(t);
    p.canvases.push_back(c);
  }
  for (int i = 0; i < n; ++i) {
    p.real.push_back({&p.targets[i], &p.targets[i]});
    p.fake.push_back({&p.canvases[i], &p.targets[i]});
  }
  return p;
}

}  // namespace

TEST(Discriminator, FreshLossIsTwo) {
  Rng rng(2);
  Discriminator d(8, 8, {}, rng);
  const auto p = make_pairs(6, 8, 4);
  EXPECT_DOUBLE_EQ(d.hinge_loss(p.real, p.fake), 2.0);
  EXPECT_EQ(d.score(p.canvases[0], p.targets[0]), 0.0);
}

TEST(Discriminator, EmptyBatchAndWrongVariant) {
  Rng rng(2);
  auto d = std::make_shared<Discriminator>(8, 8, DiscriminatorConfig{}, rng);
  const auto p = make_pairs(2, 8, 4);
  EXPECT_THROW(d->hinge_loss({}, p.fake), std::invalid_argument);
  EXPECT_THROW(d->update(p.real, {}), std::invalid_argument);
  L2Similarity l2;
  EXPECT_THROW(discriminator_update(l2, p.real, p.fake), std::logic_error);
  AdversarialSimilarity adv(d);
  EXPECT_EQ(adv.name(), "adversarial");
  EXPECT_NO_THROW(discriminator_update(adv, p.real, p.fake));
}

TEST(Discriminator, LossDecreasesAndNormsStayBounded) {
  Rng rng(7);
  DiscriminatorConfig cfg;
  cfg.hidden = {32, 16};
  cfg.learning_rate = 1e-3;
  Discriminator d(8, 8, cfg, rng);
  const auto p = make_pairs(16, 8, 9);
  double prev = d.hinge_loss(p.real, p.fake);
  int non_increasing = 0;
  for (int i = 0; i < 50; ++i) {
    d.update(p.real, p.fake);
    const double now = d.hinge_loss(p.real, p.fake);
    if (now <= prev + 1e-12) ++non_increasing;
    prev = now;
    for (const auto& layer : d.normalized_network().layers()) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(layer.weight);
      EXPECT_LE(svd.singularValues()(0), 1.0 + 1e-3) << "step " << i << " layer " << layer.weight.rows() << "x" << layer.weight.cols() << " s2 " << svd.singularValues()(std::min<Eigen::Index>(1, svd.singularValues().size() - 1));
    }
  }
  EXPECT_GE(non_increasing, 45);
  EXPECT_LT(prev, 2.0);
}

TEST(Discriminator, HingeGradientMatchesFiniteDifferences) {
  Rng rng(11);
  DiscriminatorConfig cfg;
  cfg.hidden = {6, 5};
  cfg.zero_init_output = false;
  Discriminator d(3, 3, cfg, rng);
  oracle::randomize_biases(d, rng);
  const auto p = make_pairs(4, 3, 13);
  NetworkGradient g;
  d.hinge_loss(p.real, p.fake, &g);
  const auto analytic = g.flatten();
  const auto x0 = d.raw_network().parameters();
  auto f = [&](const std::vector<double>& x) {
    Discriminator copy = d;
    copy.set_raw_parameters(x);
    return copy.hinge_loss(p.real, p.fake);
  };
  const auto numeric = oracle::finite_difference(f, x0);
  EXPECT_LT(oracle::max_relative_error(analytic, numeric), 1e-4);
}
