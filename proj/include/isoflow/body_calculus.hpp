// Pointwise curvature package of a support function: tau = A[h], principal
// radii, sigma_k and their tensor derivatives, Gauss curvature, and the
// inverse Gauss map X = h x + grad h.
#pragma once

#include <vector>

#include "isoflow/body_zoo.hpp"
#include "isoflow/sphere_grid.hpp"

namespace isoflow {

class BodyGeometry {
 public:
  int n = 0;
  ScalarField h;
  FrameVectorField grad_h;
  FrameMatrixField tau;
  std::vector<std::array<double, 2>> lambdas;  ///< ascending; n = 1 repeats lambda
  std::vector<ScalarField> sigma;              ///< sigma[k-1] = sigma_k, k = 1..n
  std::vector<FrameMatrixField> sigma_grad;    ///< d sigma_k / d tau_ij
  ScalarField gauss_K;
  std::vector<Vec3> X;
  ScalarField absX;

  const Grid& grid() const { return h.grid(); }
  const GridPtr& grid_ptr() const { return h.grid_ptr(); }
  std::size_t size() const { return h.size(); }

  /// sigma_k at node i with sigma_0 = 1 and sigma_k = 0 for k > n.
  double sigma_at(int k, std::size_t i) const {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    return sigma[k - 1][i];
  }
  /// d sigma_k / d lambda_i evaluated from the eigenvalues.
  double dsigma_dlambda(int k, int which, std::size_t i) const { return dsigma(n, k, which, lambdas[i]); }

  static double dsigma(int n, int k, int which, const std::array<double, 2>& lam) {
    if (k == 0 || k > n) return 0.0;
    if (n == 1) return 1.0;
    if (k == 1) return 1.0;
    return lam[1 - which];  // n = 2, k = 2
  }
  static double sigma_from_lambdas(int n, int k, const std::array<double, 2>& lam) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (n == 1) return lam[0];
    return k == 1 ? lam[0] + lam[1] : lam[0] * lam[1];
  }
};

/// Assembles the curvature package. Throws NonPositiveError if min h <= 0 and
/// NonConvexError if A[h] has a non-positive eigenvalue.
inline BodyGeometry assemble(const ScalarField& h) {
  if (h.min() <= 0.0) throw NonPositiveError(h.min());
  const Grid& grid = h.grid();
  const int n = grid.dim();
  const std::size_t count = h.size();
  BodyGeometry g;
  g.n = n;
  g.h = h;
  g.grad_h = grad(h);
  g.tau = spherical_hessian(h);
  g.lambdas.resize(count);
  std::vector<std::vector<double>> sig(n, std::vector<double>(count));
  g.sigma_grad.assign(n, FrameMatrixField{h.grid_ptr(), std::vector<Sym2>(count)});
  std::vector<double> K(count), absx(count);
  g.X.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const Sym2& t = g.tau.m[i];
    g.lambdas[i] = t.eigenvalues(n);
    sig[0][i] = t.trace(n);
    g.sigma_grad[0].m[i] = {1.0, 0.0, n == 2 ? 1.0 : 0.0};
    if (n == 2) {
      sig[1][i] = t.det(2);
      g.sigma_grad[1].m[i] = {sig[0][i] - t.a11, -t.a12, sig[0][i] - t.a22};
    }
    K[i] = 1.0 / sig[n - 1][i];
    g.X[i] = h[i] * grid.node(i) + grid.to_ambient(i, g.grad_h.v[i]);
    absx[i] = norm(g.X[i]);
  });
  std::size_t worst = 0;
  for (std::size_t i = 1; i < count; ++i)
    if (g.lambdas[i][0] < g.lambdas[worst][0]) worst = i;
  if (!(g.lambdas[worst][0] > 0.0)) throw NonConvexError(worst, g.lambdas[worst][0]);
  for (int k = 0; k < n; ++k) g.sigma.emplace_back(h.grid_ptr(), std::move(sig[k]));
  g.gauss_K = ScalarField(h.grid_ptr(), std::move(K));
  g.absX = ScalarField(h.grid_ptr(), std::move(absx));
  return g;
}

inline double frobenius(int n, const Sym2& a, const Sym2& b) {
  return n == 1 ? a.a11 * b.a11 : a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22;
}

/// Maximum relative residuals of the pointwise curvature identities.
struct IdentityResiduals {
  double euler = 0.0;           ///< sigma_k^{ij} tau_ij = k sigma_k
  double lambda_square = 0.0;   ///< sum_i dsigma_k/dlambda_i lambda_i^2 = sigma_1 sigma_k - (k+1) sigma_{k+1}
  double recursion = 0.0;       ///< sigma_{k+1}^{ij} = sigma_k delta - tau sigma_k^{..}
  double trace = 0.0;           ///< sigma_{k+1}^{ij} g_ij = (n-k) sigma_k
  double abs_x_squared = 0.0;   ///< |X|^2 = h^2 + |grad h|^2
  double gradient_abs_x = 0.0;  ///< |X| <grad|X|, grad h> = tau(grad h, grad h), discrete grad of |X|

  double max_algebraic() const { return std::max({euler, lambda_square, recursion, trace, abs_x_squared}); }
};

inline IdentityResiduals pointwise_identity_report(const BodyGeometry& g) {
  IdentityResiduals r;
  const int n = g.n;
  const auto grad_abs = grad(g.absX);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Sym2& t = g.tau.m[i];
    const auto& lam = g.lambdas[i];
    for (int k = 1; k <= n; ++k) {
      const Sym2& sk = g.sigma_grad[k - 1].m[i];
      r.euler = std::max(r.euler, relative_residual(frobenius(n, sk, t), k * g.sigma_at(k, i)));

      double lhs = 0.0;
      for (int a = 0; a < n; ++a) lhs += BodyGeometry::dsigma(n, k, a, lam) * lam[a] * lam[a];
      const double rhs = g.sigma_at(1, i) * g.sigma_at(k, i) - (k + 1) * g.sigma_at(k + 1, i);
      r.lambda_square = std::max(r.lambda_square, relative_residual(lhs, rhs));

      // tau * sigma_k^{..} as a 2x2 product (symmetric because they commute)
      Sym2 prod;
      if (n == 1) {
        prod = {t.a11 * sk.a11, 0.0, 0.0};
      } else {
        prod = {t.a11 * sk.a11 + t.a12 * sk.a12, t.a11 * sk.a12 + t.a12 * sk.a22, t.a12 * sk.a12 + t.a22 * sk.a22};
      }
      const double sk_val = g.sigma_at(k, i);
      Sym2 expected{sk_val - prod.a11, -prod.a12, n == 2 ? sk_val - prod.a22 : 0.0};
      Sym2 next = k < n ? g.sigma_grad[k].m[i] : Sym2{};
      r.recursion = std::max({r.recursion, relative_residual(next.a11, expected.a11),
                              relative_residual(next.a12, expected.a12), relative_residual(next.a22, expected.a22)});
      for (int a = 0; a < n; ++a) {
        const double eig_lhs = BodyGeometry::dsigma(n, k + 1, a, lam);
        const double eig_rhs = sk_val - lam[a] * BodyGeometry::dsigma(n, k, a, lam);
        r.recursion = std::max(r.recursion, relative_residual(eig_lhs, eig_rhs));
      }
      r.trace = std::max(r.trace, relative_residual(next.trace(n), (n - k) * sk_val));
    }
    const double grad_sq = frame_dot(n, g.grad_h.v[i], g.grad_h.v[i]);
    r.abs_x_squared =
        std::max(r.abs_x_squared, relative_residual(g.absX[i] * g.absX[i], g.h[i] * g.h[i] + grad_sq));
    const double lhs_e = g.absX[i] * frame_dot(n, grad_abs.v[i], g.grad_h.v[i]);
    const double rhs_e = t.apply(n, g.grad_h.v[i], g.grad_h.v[i]);
    r.gradient_abs_x = std::max(r.gradient_abs_x, relative_residual(lhs_e, rhs_e));
  }
  return r;
}

/// Eigenvectors of tau at node i in frame components, ordered like lambdas.
inline std::array<FrameVec, 2> tau_eigenvectors(const BodyGeometry& g, std::size_t i) {
  if (g.n == 1) return {FrameVec{1.0, 0.0}, FrameVec{0.0, 0.0}};
  const Sym2& t = g.tau.m[i];
  const double l1 = g.lambdas[i][0];
  FrameVec a{l1 - t.a22, t.a12};
  FrameVec b{t.a12, l1 - t.a11};
  FrameVec e = std::hypot(a[0], a[1]) >= std::hypot(b[0], b[1]) ? a : b;
  const double len = std::hypot(e[0], e[1]);
  if (len == 0.0) return {FrameVec{1.0, 0.0}, FrameVec{0.0, 1.0}};
  e = {e[0] / len, e[1] / len};
  return {e, FrameVec{-e[1], e[0]}};
}

struct EmbeddingCheck {
  double residual = 0.0;          ///< max over k and nodes
  std::size_t umbilic_nodes = 0;  ///< nodes with |lambda_1 - lambda_2| < 1e-10
};

/// Compares sigma_k^{ij} d_i f d_j f for f = <X, v> (discrete gradient) with
/// sum_i dsigma_k/dlambda_i lambda_i^2 <e_i, v>^2 in the eigenframe of tau.
/// Near-umbilic nodes use the eigenvector-free form and are counted.
inline EmbeddingCheck embedding_check(const BodyGeometry& g, const Vec3& v) {
  const Grid& grid = g.grid();
  const int n = g.n;
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = dot(g.X[i], v);
  const auto df = grad(ScalarField(g.grid_ptr(), std::move(f)));
  EmbeddingCheck out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& lam = g.lambdas[i];
    const bool umbilic = n == 2 && std::abs(lam[1] - lam[0]) < 1e-10;
    if (umbilic) ++out.umbilic_nodes;
    const FrameVec vt = grid.to_frame(i, v);
    const auto evec = tau_eigenvectors(g, i);
    for (int k = 1; k <= n; ++k) {
      const double lhs = g.sigma_grad[k - 1].m[i].apply(n, df.v[i], df.v[i]);
      double rhs = 0.0;
      if (umbilic) {
        const double lm = 0.5 * (lam[0] + lam[1]);
        rhs = BodyGeometry::dsigma(n, k, 0, {lm, lm}) * lm * lm * frame_dot(n, vt, vt);
      } else {
        for (int a = 0; a < n; ++a) {
          const double proj = frame_dot(n, evec[a], vt);
          rhs += BodyGeometry::dsigma(n, k, a, lam) * lam[a] * lam[a] * proj * proj;
        }
      }
      out.residual = std::max(out.residual, relative_residual(lhs, rhs));
    }
  }
  return out;
}

}  // namespace isoflow
