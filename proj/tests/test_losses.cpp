#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "handpose/losses.hpp"
#include "handpose/rng.hpp"

using namespace handpose;

namespace {

constexpr double kFdStep = 1e-5;

// Central finite difference of a scalar loss in one prediction coordinate.
template <class Loss>
double fd_gradient(const Loss& loss, std::vector<double> pred, std::size_t i) {
  pred[i] += kFdStep;
  const double up = loss(pred);
  pred[i] -= 2.0 * kFdStep;
  const double down = loss(pred);
  return (up - down) / (2.0 * kFdStep);
}

void check_gradient(const std::vector<double>& analytic,
                    const std::vector<double>& target, const std::vector<double>& pred,
                    const std::function<double(const std::vector<double>&)>& loss,
                    double tol, double skip_when_kink = -1.0) {
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (skip_when_kink > 0.0 && std::abs(target[i] - pred[i]) < skip_when_kink) continue;
    const double fd = fd_gradient(loss, pred, i);
    const double scale = std::max({1.0, std::abs(fd), std::abs(analytic[i])});
    REQUIRE(std::abs(analytic[i] - fd) / scale < tol);
  }
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("l1 value on the worked example") {
  const std::vector<double> x{1.0, 2.0}, xh{0.0, 0.0};
  const LossResult r = l1_loss(std::span<const double>(x), std::span<const double>(xh));
  CHECK(r.value == 3.0);
  REQUIRE(r.gradient.size() == 2);
  CHECK(r.gradient[0] == -1.0);
  CHECK(r.gradient[1] == -1.0);
}

TEST_CASE("l1 of identical inputs is zero with zero gradient") {
  const std::vector<double> x{0.3, 0.0, 0.9};
  const LossResult r = l1_loss(std::span<const double>(x), std::span<const double>(x));
  CHECK(r.value == 0.0);
  for (double g : r.gradient) CHECK(g == 0.0);
}

TEST_CASE("l1 gradient sign convention") {
  const std::vector<double> x{1.0, 0.0}, xh{0.0, 1.0};
  const LossResult r = l1_loss(std::span<const double>(x), std::span<const double>(xh));
  CHECK(r.gradient[0] == -1.0);  // pred below target: decrease loss by growing pred
  CHECK(r.gradient[1] == 1.0);
}

TEST_CASE("l1 rejects mismatched shapes") {
  const std::vector<double> x{1.0, 2.0}, xh{0.0};
  CHECK_THROWS_AS(l1_loss(std::span<const double>(x), std::span<const double>(xh)), ShapeError);
}

TEST_CASE("soft dice on the worked examples") {
  const std::vector<double> x1{1.0, 0.0, 0.0}, d{0.0, 0.0, 1.0};
  CHECK(soft_dice_loss(std::span<const double>(x1), std::span<const double>(d)).value == 1.0);

  const std::vector<double> overlap{1.0, 1.0, 0.0};
  CHECK(soft_dice_loss(std::span<const double>(x1), std::span<const double>(overlap)).value ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const std::vector<double> same{0.4, 0.1, 0.8};
  CHECK(soft_dice_loss(std::span<const double>(same), std::span<const double>(same)).value ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("soft dice of two empty masks is a perfect match") {
  const std::vector<double> zero{0.0, 0.0, 0.0, 0.0};
  const LossResult r = soft_dice_loss(std::span<const double>(zero), std::span<const double>(zero));
  CHECK(r.value == 0.0);
  for (double g : r.gradient) CHECK(g == 0.0);
}

TEST_CASE("soft dice stays within [0,1] for non-negative inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> x = random_vector(16, rng);
    const std::vector<double> xh = random_vector(16, rng);
    const double v =
        soft_dice_loss(std::span<const double>(x), std::span<const double>(xh)).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("combined loss mixes the components with its weights") {
  const std::vector<double> x{1.0, 0.0, 0.0, 0.0}, xh{0.0, 0.0, 0.0, 0.0};
  CombinedLossConfig cfg;  // 0.4, 0.6
  const LossResult r =
      combined_loss(std::span<const double>(x), std::span<const double>(xh), cfg);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));

  const LossResult zero =
      combined_loss(std::span<const double>(x), std::span<const double>(x), cfg);
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("combined loss with (1,0) weights degenerates to l1") {
  Rng rng(17);
  const std::vector<double> x = random_vector(12, rng);
  const std::vector<double> xh = random_vector(12, rng);
  CombinedLossConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 0.0;
  const LossResult c =
      combined_loss(std::span<const double>(x), std::span<const double>(xh), cfg);
  const LossResult l = l1_loss(std::span<const double>(x), std::span<const double>(xh));
  CHECK(c.value == doctest::Approx(l.value).epsilon(1e-12));
  for (std::size_t i = 0; i < xh.size(); ++i)
    CHECK(c.gradient[i] == doctest::Approx(l.gradient[i]).epsilon(1e-12));
}

TEST_CASE("grid overloads agree with the flat forms") {
  Grid x(3, 2, 0.0), xh(3, 2, 0.0);
  x.at(0, 0) = 1.0;
  xh.at(2, 1) = 0.5;
  const LossResult flat =
      l1_loss(std::span<const double>(x.values()), std::span<const double>(xh.values()));
  const LossResult grid = l1_loss(x, xh);
  CHECK(grid.value == flat.value);
  CHECK(grid.gradient == flat.gradient);
}

TEST_CASE("l1 gradient matches finite differences away from kinks") {
  Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<double> x = random_vector(64, rng);
    const std::vector<double> xh = random_vector(64, rng);
    const LossResult r = l1_loss(std::span<const double>(x), std::span<const double>(xh));
    check_gradient(
        r.gradient, x, xh,
        [&](const std::vector<double>& p) {
          return l1_loss(std::span<const double>(x), std::span<const double>(p)).value;
        },
        1e-4, 1e-4);
  }
}

TEST_CASE("soft dice gradient matches finite differences") {
  Rng rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<double> x = random_vector(64, rng);
    const std::vector<double> xh = random_vector(64, rng, 0.05, 1.0);
    const LossResult r = soft_dice_loss(std::span<const double>(x), std::span<const double>(xh));
    check_gradient(
        r.gradient, x, xh,
        [&](const std::vector<double>& p) {
          return soft_dice_loss(std::span<const double>(x), std::span<const double>(p)).value;
        },
        1e-4);
  }
}

TEST_CASE("combined gradient matches finite differences") {
  Rng rng(47);
  CombinedLossConfig cfg;
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<double> x = random_vector(48, rng);
    const std::vector<double> xh = random_vector(48, rng);
    const LossResult r =
        combined_loss(std::span<const double>(x), std::span<const double>(xh), cfg);
    check_gradient(
        r.gradient, x, xh,
        [&](const std::vector<double>& p) {
          return combined_loss(std::span<const double>(x), std::span<const double>(p), cfg).value;
        },
        1e-4, 1e-4);
  }
}

namespace {

std::vector<Tensor> random_pyramid(Rng& rng, const std::vector<int>& sizes) {
  std::vector<Tensor> levels;
  for (int s : sizes) {
    Tensor t(1, 2, s, s);
    for (double& v : t.data()) v = rng.uniform();
    levels.push_back(std::move(t));
  }
  return levels;
}

}  // namespace

TEST_CASE("multi-scale loss on the worked example") {
  // Level sums of squared error 2 and 4 with weights (1, 1/2) total 4.
  Tensor t0(1, 1, 1, 2, 0.0), p0(1, 1, 1, 2, 1.0);  // squared sum 2
  Tensor t1(1, 1, 2, 2, 0.0), p1(1, 1, 2, 2, 1.0);  // squared sum 4
  MultiScaleLossConfig cfg;
  cfg.weights = {1.0, 0.5};
  const MultiScaleLossResult r = multi_scale_loss({t0, t1}, {p0, p1}, cfg);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-12));
  REQUIRE(r.gradients.size() == 2);
  // d/dpred of w * (pred-target)^2 = 2w(pred-target)
  CHECK(r.gradients[0].at(0, 0, 0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.gradients[1].at(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("multi-scale loss vanishes when all levels match") {
  Rng rng(53);
  const std::vector<Tensor> targets = random_pyramid(rng, {4, 2});
  MultiScaleLossConfig cfg;
  cfg.weights = {1.0, 0.25};
  const MultiScaleLossResult r = multi_scale_loss(targets, targets, cfg);
  CHECK(r.value == 0.0);
  for (const Tensor& g : r.gradients) {
    for (double v : g.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("multi-scale loss is homogeneous in the weights") {
  Rng rng(59);
  const std::vector<Tensor> targets = random_pyramid(rng, {4, 2, 4});
  const std::vector<Tensor> preds = random_pyramid(rng, {4, 2, 4});
  MultiScaleLossConfig cfg;
  cfg.weights = {1.0, 0.5, 0.25};
  MultiScaleLossConfig scaled = cfg;
  for (double& w : scaled.weights) w *= 3.0;
  const MultiScaleLossResult a = multi_scale_loss(targets, preds, cfg);
  const MultiScaleLossResult b = multi_scale_loss(targets, preds, scaled);
  CHECK(b.value == doctest::Approx(3.0 * a.value).epsilon(1e-12));
  for (std::size_t l = 0; l < a.gradients.size(); ++l) {
    for (std::size_t i = 0; i < a.gradients[l].data().size(); ++i)
      CHECK(b.gradients[l].data()[i] ==
            doctest::Approx(3.0 * a.gradients[l].data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("multi-scale gradient matches finite differences") {
  Rng rng(61);
  MultiScaleLossConfig cfg;
  cfg.weights = {1.0, 0.5, 0.25};
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Tensor> targets = random_pyramid(rng, {4, 2, 3});
    std::vector<Tensor> preds = random_pyramid(rng, {4, 2, 3});
    const MultiScaleLossResult r = multi_scale_loss(targets, preds, cfg);
    for (std::size_t level = 0; level < preds.size(); ++level) {
      for (std::size_t i = 0; i < preds[level].data().size(); i += 3) {
        const double keep = preds[level].data()[i];
        preds[level].data()[i] = keep + kFdStep;
        const double up = multi_scale_loss(targets, preds, cfg).value;
        preds[level].data()[i] = keep - kFdStep;
        const double down = multi_scale_loss(targets, preds, cfg).value;
        preds[level].data()[i] = keep;
        const double fd = (up - down) / (2.0 * kFdStep);
        const double analytic = r.gradients[level].data()[i];
        const double scale = std::max({1.0, std::abs(fd), std::abs(analytic)});
        REQUIRE(std::abs(analytic - fd) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("multi-scale loss validates levels") {
  Tensor a(1, 1, 2, 2), b(1, 1, 3, 3);
  MultiScaleLossConfig cfg;
  cfg.weights = {1.0, 0.5};
  CHECK_THROWS_AS(multi_scale_loss({a}, {a, a}, cfg), ShapeError);
  CHECK_THROWS_AS(multi_scale_loss({a, b}, {a, a}, cfg), ShapeError);
  MultiScaleLossConfig short_cfg;
  short_cfg.weights = {1.0};
  CHECK_THROWS_AS(multi_scale_loss({a, a}, {a, a}, short_cfg), ShapeError);
  MultiScaleLossConfig bad_weight;
  bad_weight.weights = {1.0, 0.0};
  CHECK_THROWS_AS(multi_scale_loss({a, a}, {a, a}, bad_weight), InvalidInputError);
}
