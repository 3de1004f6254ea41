// Mixed discriminants, mixed volumes, the measures dV_k = h sigma_k dmu,
// volume and centroid, and numerically calibrated normalisation constants.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "isoflow/body_calculus.hpp"

namespace isoflow {

/// Mixed discriminant by the permutation formula
/// (1/n!) sum_{a,b} sign(a) sign(b) prod_k M_k(a(k), b(k)).
inline double mixed_discriminant(const std::vector<Eigen::MatrixXd>& mats) {
  const int n = static_cast<int>(mats.size());
  if (n == 0) throw Error("mixed discriminant of zero matrices");
  for (const auto& m : mats)
    if (m.rows() != n || m.cols() != n) throw Error("mixed discriminant: dimension mismatch");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  std::vector<int> signs;
  do {
    perms.push_back(perm);
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    signs.push_back(inversions % 2 == 0 ? 1 : -1);
  } while (std::next_permutation(perm.begin(), perm.end()));
  double total = 0.0;
  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;
  for (std::size_t a = 0; a < perms.size(); ++a)
    for (std::size_t b = 0; b < perms.size(); ++b) {
      double prod = signs[a] * signs[b];
      for (int k = 0; k < n; ++k) prod *= mats[k](perms[a][k], perms[b][k]);
      total += prod;
    }
  return total / factorial;
}

/// Per-node mixed discriminant of frame tensors (n = 1 or 2), same formula.
inline double mixed_discriminant(int n, const Sym2* const* args) {
  if (n == 1) return args[0]->a11;
  const Sym2& a = *args[0];
  const Sym2& b = *args[1];
  // identity and swap permutations for a and b: four signed products over 2!
  return 0.5 * (a.a11 * b.a22 + a.a22 * b.a11 - a.a12 * b.a12 - a.a12 * b.a12);
}

struct MixedVolumeResult {
  double value = 0.0;
  std::vector<std::string> arguments;
};

/// V(f_1, ..., f_{n+1}) = 1/(n+1) int f_1 Q(A[f_2], ..., A[f_{n+1}]) dmu.
inline MixedVolumeResult mixed_volume(const std::vector<ScalarField>& f, std::vector<std::string> names = {}) {
  if (f.empty()) throw Error("mixed volume needs arguments");
  const Grid& grid = f[0].grid();
  const int n = grid.dim();
  if (static_cast<int>(f.size()) != n + 1) throw Error("mixed volume needs n+1 arguments");
  for (const auto& x : f)
    if (!x.grid().same_as(grid)) throw Error("mixed volume arguments on different grids");
  std::vector<FrameMatrixField> a;
  for (int k = 1; k <= n; ++k) a.push_back(spherical_hessian(f[k]));
  CompensatedSum sum;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Sym2* args[2] = {&a[0].m[i], n == 2 ? &a[1].m[i] : nullptr};
    sum.add(f[0][i] * mixed_discriminant(n, args) * grid.weight(i));
  }
  if (names.empty())
    for (std::size_t k = 0; k < f.size(); ++k) names.push_back("f" + std::to_string(k + 1));
  return {sum.value() / (n + 1), std::move(names)};
}

/// V_{k+1}(f_1..f_{k+1}) = V(f_1..f_{k+1}, 1, ..., 1) with n-k ones.
inline MixedVolumeResult mixed_volume_k(int k, std::vector<ScalarField> f) {
  if (f.empty()) throw Error("mixed volume needs arguments");
  const int n = f[0].grid().dim();
  if (k < 1 || k > n || static_cast<int>(f.size()) != k + 1) throw Error("V_{k+1} needs k+1 arguments, 1 <= k <= n");
  const auto one = ScalarField::constant(f[0].grid_ptr(), 1.0);
  std::vector<std::string> names;
  for (int i = 0; i <= k; ++i) names.push_back("f" + std::to_string(i + 1));
  while (static_cast<int>(f.size()) < n + 1) {
    f.push_back(one);
    names.push_back("1");
  }
  return mixed_volume(f, std::move(names));
}

/// dV_k density h sigma_k per node.
inline ScalarField dv_density(const BodyGeometry& g, int k) {
  if (k < 1 || k > g.n) throw Error("order k out of range");
  return g.h * g.sigma[k - 1];
}

/// vol(K) = 1/(n+1) int h sigma_n dmu.
inline double body_volume(const BodyGeometry& g) { return integrate(dv_density(g, g.n)) / (g.n + 1); }

/// int X dV_k.
inline Vec3 centroid_vector(const BodyGeometry& g, int k) {
  const auto dens = dv_density(g, k);
  std::vector<Vec3> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dens[i] * g.X[i];
  return integrate(g.grid(), v);
}

/// Centroid of K: int X dV / ((n+2) vol).
inline Vec3 centroid(const BodyGeometry& g) {
  return (1.0 / ((g.n + 2) * body_volume(g))) * centroid_vector(g, g.n);
}

/// int x sigma_k dmu (vanishes for every closed convex body).
inline Vec3 minkowski_vector(const BodyGeometry& g, int k) {
  std::vector<Vec3> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.sigma_at(k, i) * g.grid().node(i);
  return integrate(g.grid(), v);
}

/// Translates the body so that its centroid is at the origin. The discrete
/// translation is not exactly geometry-preserving under finite differences,
/// so it is repeated until the shift reaches roundoff or stops shrinking.
inline ScalarField recenter(const ScalarField& h, int max_iterations = 8) {
  ScalarField out = h;
  const double floor = 1e-13 * std::max(1.0, h.max_abs());
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const auto g = assemble(out);
    const Vec3 c = centroid(g);
    const double shift = norm(c);
    if (shift <= floor || shift > 0.5 * previous) break;
    out = out.map([&](double v, const Vec3& x) { return v - dot(x, c); });
    previous = shift;
  }
  return out;
}

/// c_k V_{k+1}(fh, fh, h..h) = int f h sigma_k^{ij} A[fh]_ij dmu and
/// c'_k V_{k+1}(fh, h..h) = int f h sigma_k dmu; index k-1.
struct ConstantsTable {
  int n = 0;
  std::vector<double> c;
  std::vector<double> c_prime;
};

namespace detail {

struct ConstantRatios {
  std::vector<double> c, c_prime;
};

inline ConstantRatios constant_ratios(const ScalarField& h, const ScalarField& f) {
  const auto g = assemble(h);
  const int n = g.n;
  const auto fh = f * h;
  const auto a_fh = spherical_hessian(fh);
  ConstantRatios out;
  for (int k = 1; k <= n; ++k) {
    std::vector<ScalarField> args1{fh};
    std::vector<ScalarField> args2{fh, fh};
    for (int i = 0; i < k; ++i) args1.push_back(h);
    for (int i = 0; i < k - 1; ++i) args2.push_back(h);
    const double v1 = mixed_volume_k(k, args1).value;
    const double v2 = mixed_volume_k(k, args2).value;
    const double rhs1 = integrate(f * dv_density(g, k));
    std::vector<double> integrand(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      integrand[i] = fh[i] * frobenius(n, g.sigma_grad[k - 1].m[i], a_fh.m[i]);
    const double rhs2 = integrate(ScalarField(g.grid_ptr(), std::move(integrand)));
    out.c_prime.push_back(rhs1 / v1);
    out.c.push_back(rhs2 / v2);
  }
  return out;
}

}  // namespace detail

/// Calibrates c_k, c'_k on the unit ball (f = 1 and f = 1 + <x, e_1>/2) and
/// validates them on an ellipsoid probe; throws on disagreement beyond 1e-9.
inline ConstantsTable calibrate_constants(const GridPtr& grid) {
  const int n = grid->dim();
  const auto ball = ScalarField::constant(grid, 1.0);
  const auto c_prime_src = detail::constant_ratios(ball, ScalarField::constant(grid, 1.0));
  const auto c_src = detail::constant_ratios(ball, ScalarField::sample(grid, [](const Vec3& x) { return 1.0 + 0.5 * x[0]; }));
  ConstantsTable table{n, c_src.c, c_prime_src.c_prime};

  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = 1.5;
  m(1, 1) = n == 2 ? 1.0 : 0.8;
  m(2, 2) = 0.8;
  const auto probe = make_body(ellipsoid_spec(n, m), grid);
  const auto f = ScalarField::sample(grid, [](const Vec3& x) { return 1.0 + 0.3 * x[0] + 0.2 * x[1] * x[1]; });
  const auto check = detail::constant_ratios(probe, f);
  for (int k = 0; k < n; ++k) {
    if (relative_residual(check.c[k], table.c[k]) > 1e-9 || relative_residual(check.c_prime[k], table.c_prime[k]) > 1e-9)
      throw Error("normalisation constants disagree across probe bodies");
  }
  return table;
}

}  // namespace isoflow
