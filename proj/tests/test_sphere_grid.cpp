#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "isoflow/body_zoo.hpp"
#include "isoflow/sphere_grid.hpp"

using namespace isoflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Ambient test function F(y) = exp(0.3 y1 + 0.5 y3) + y1 y2 with its
// Euclidean gradient and Hessian; tangential projections give the oracle.
double F(const Vec3& y) { return std::exp(0.3 * y[0] + 0.5 * y[2]) + y[0] * y[1]; }
Vec3 dF(const Vec3& y) {
  const double e = std::exp(0.3 * y[0] + 0.5 * y[2]);
  return {0.3 * e + y[1], y[0], 0.5 * e};
}
Eigen::Matrix3d d2F(const Vec3& y) {
  const double e = std::exp(0.3 * y[0] + 0.5 * y[2]);
  Eigen::Matrix3d m;
  m << 0.09 * e, 1.0, 0.15 * e, 1.0, 0.0, 0.0, 0.15 * e, 0.0, 0.25 * e;
  return m;
}

struct Errors {
  double grad = 0.0, hess = 0.0;
};

Errors derivative_errors(const GridPtr& grid) {
  const auto f = ScalarField::sample(grid, F);
  const auto g = grad(f);
  const auto H = hess(f);
  Errors e;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Vec3& x = grid->node(i);
    const Vec3 df = dF(x);
    const FrameVec exact_g = grid->to_frame(i, df);
    e.grad = std::max({e.grad, std::abs(g.v[i][0] - exact_g[0]), std::abs(g.v[i][1] - exact_g[1])});
    const auto& fr = grid->frame(i);
    const Eigen::Matrix3d D = d2F(x);
    const double radial = dot(x, df);
    auto second = [&](int a, int b) {
      const Eigen::Vector3d u(fr[a][0], fr[a][1], fr[a][2]), v(fr[b][0], fr[b][1], fr[b][2]);
      return u.dot(D * v) - radial * u.dot(v);
    };
    const int n = grid->dim();
    e.hess = std::max(e.hess, std::abs(H.m[i].a11 - second(0, 0)));
    if (n == 2) {
      e.hess = std::max({e.hess, std::abs(H.m[i].a12 - second(0, 1)), std::abs(H.m[i].a22 - second(1, 1))});
    }
  }
  return e;
}

}  // namespace

TEST(Resolution, ParsesBothForms) {
  EXPECT_EQ(parse_resolution("256"), (Resolution{0, 256}));
  EXPECT_EQ(parse_resolution("64x128"), (Resolution{64, 128}));
  EXPECT_THROW(parse_resolution("64x"), ParseError);
  EXPECT_THROW(parse_resolution("abc"), ParseError);
  EXPECT_THROW(parse_resolution("12x34x5"), ParseError);
}

TEST(Grid, RejectsBadConfigurations) {
  EXPECT_THROW(Grid::build(3, {16, 32}), Error);
  EXPECT_THROW(Grid::build(2, {8, 32}), Error);
  EXPECT_THROW(Grid::build(1, {0, 8}), Error);
  EXPECT_THROW(Grid::build(2, {16, 33}), Error);
  EXPECT_THROW(parse_scheme("fd2"), ParseError);
}

TEST(Grid, QuadratureIntegratesPolynomialsExactly) {
  for (auto scheme : {DiffScheme::FiniteDifference4, DiffScheme::Spectral}) {
    const auto s2 = Grid::build(2, {16, 32}, scheme);
    EXPECT_NEAR(integrate(ScalarField::constant(s2, 1.0)), 4.0 * kPi, 1e-13);
    EXPECT_NEAR(integrate(ScalarField::sample(s2, [](const Vec3& x) { return x[2] * x[2]; })), 4.0 * kPi / 3.0, 1e-13);
    EXPECT_NEAR(integrate(ScalarField::sample(s2, [](const Vec3& x) { return x[0] * x[0] * x[1] * x[1]; })),
                4.0 * kPi / 15.0, 1e-13);
    const auto s1 = Grid::build(1, {0, 16}, scheme);
    EXPECT_NEAR(integrate(ScalarField::sample(s1, [](const Vec3& x) { return x[0] * x[0]; })), kPi, 1e-13);
  }
}

TEST(Grid, FramesAreOrthonormalAndTangent) {
  const auto grid = Grid::build(2, {16, 32});
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto& e = grid->frame(i);
    const Vec3& x = grid->node(i);
    EXPECT_NEAR(norm(x), 1.0, 1e-14);
    EXPECT_NEAR(dot(e[0], e[0]), 1.0, 1e-14);
    EXPECT_NEAR(dot(e[1], e[1]), 1.0, 1e-14);
    EXPECT_NEAR(dot(e[0], e[1]), 0.0, 1e-14);
    EXPECT_NEAR(dot(e[0], x), 0.0, 1e-14);
    EXPECT_NEAR(dot(e[1], x), 0.0, 1e-14);
  }
}

TEST(Grid, FornbergReproducesCentralStencil) {
  const auto c = detail::fornberg_weights(0.0, {-2.0, -1.0, 0.0, 1.0, 2.0});
  const double d1[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  const double d2[] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(c[i][0], i == 2 ? 1.0 : 0.0, 1e-15);
    EXPECT_NEAR(c[i][1], d1[i], 1e-14);
    EXPECT_NEAR(c[i][2], d2[i], 1e-14);
  }
}

TEST(Grid, FourthOrderGradientConvergence) {
  const auto e16 = derivative_errors(Grid::build(2, {16, 32}));
  const auto e32 = derivative_errors(Grid::build(2, {32, 64}));
  const auto e64 = derivative_errors(Grid::build(2, {64, 128}));
  EXPECT_GT(std::log2(e32.grad / e64.grad), 3.7);
  EXPECT_GT(std::log2(e16.grad / e32.grad), 3.5);
  // second derivatives lose some order to the 1/sin factors near the poles
  EXPECT_GT(std::log2(e32.hess / e64.hess), 2.9);
  EXPECT_LT(e64.hess, 1e-4);
}

TEST(Grid, SpectralDerivativesAreNearRoundoff) {
  const auto e = derivative_errors(Grid::build(2, {32, 64}, DiffScheme::Spectral));
  EXPECT_LT(e.grad, 1e-12);
  EXPECT_LT(e.hess, 1e-9);
  const auto c = derivative_errors(Grid::build(1, {0, 64}, DiffScheme::Spectral));
  EXPECT_LT(c.grad, 1e-12);
  EXPECT_LT(c.hess, 1e-10);
}

TEST(Grid, LaplacianOfHarmonicsIsEigen) {
  const auto grid = Grid::build(2, {32, 64}, DiffScheme::Spectral);
  for (int l = 1; l <= 5; ++l)
    for (int m : {-l, 0, l}) {
      const auto y = ScalarField::sample(grid, [&](const Vec3& x) { return real_harmonic(2, l, m, x); });
      const auto lap = laplacian(y);
      double err = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(lap[i] + l * (l + 1.0) * y[i]));
      EXPECT_LT(err, 1e-9) << "l=" << l << " m=" << m;
    }
}

TEST(Grid, CircleDerivatives) {
  for (auto scheme : {DiffScheme::FiniteDifference4, DiffScheme::Spectral}) {
    const auto grid = Grid::build(1, {0, 128}, scheme);
    const auto f = ScalarField::sample(grid, [](const Vec3& x) { return std::cos(3.0 * std::atan2(x[1], x[0])); });
    const auto g = grad(f);
    const auto H = hess(f);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double p = grid->phi(i);
      e1 = std::max(e1, std::abs(g.v[i][0] + 3.0 * std::sin(3.0 * p)));
      e2 = std::max(e2, std::abs(H.m[i].a11 + 9.0 * std::cos(3.0 * p)));
    }
    const double tol = scheme == DiffScheme::Spectral ? 1e-11 : 1e-4;
    EXPECT_LT(e1, tol);
    EXPECT_LT(e2, tol);
  }
}

TEST(ScalarField, ValidatesInput) {
  const auto grid = Grid::build(1, {0, 16});
  EXPECT_THROW(ScalarField(grid, std::vector<double>(3, 1.0)), Error);
  std::vector<double> v(16, 1.0);
  v[3] = std::nan("");
  EXPECT_THROW(ScalarField(grid, v), Error);
  const auto other = Grid::build(1, {0, 32});
  EXPECT_THROW(ScalarField::constant(grid, 1.0) + ScalarField::constant(other, 1.0), Error);
}
