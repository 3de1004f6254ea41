// Numerical checks of the support-function inequalities and integral
// identities, each producing a SlackReport. Convention: every inequality is
// written lhs <= rhs and slack = rhs - lhs, so slack >= 0 means it holds.
#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "isoflow/integral_geometry.hpp"
#include "json.hpp"

namespace isoflow {

/// Tolerances shared by all checks. tol_grid was fixed from a refinement
/// study on the ellipsoid family at the reference resolutions (S^1: 256,
/// S^2: 64x128); ISOFLOW_TOL_OVERRIDE multiplies every entry.
struct SuiteConfig {
  double tol_grid = 1e-6;        ///< inequality slack floor (-tol) and identity residual ceiling
  double constraint_tol = 1e-6;  ///< how closely a body must satisfy a soliton equation
  double sphere_tol = 1e-6;      ///< limit-shape certification, sphere distance
  double ellipsoid_tol = 1e-5;   ///< limit-shape certification, ellipsoid distance

  static SuiteConfig from_environment() {
    SuiteConfig cfg;
    if (const char* env = std::getenv("ISOFLOW_TOL_OVERRIDE")) {
      char* end = nullptr;
      const double scale = std::strtod(env, &end);
      if (end != env && scale > 0.0) {
        cfg.tol_grid *= scale;
        cfg.constraint_tol *= scale;
        cfg.sphere_tol *= scale;
        cfg.ellipsoid_tol *= scale;
      }
    }
    return cfg;
  }
};

struct SlackReport {
  enum class Kind { Inequality, Identity, Both };

  std::string name;
  Kind kind = Kind::Inequality;
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double residual = 0.0;
  std::string body_hash;
  std::string grid;
  double tol = 0.0;
  bool applicable = true;  ///< false when the check's precondition did not hold
  bool equality = false;   ///< equality witness: |slack| <= tol required
  std::map<std::string, double> extra;

  bool passed() const {
    if (!applicable) return true;
    const bool ineq_ok = equality ? std::abs(slack) <= tol : slack >= -tol;
    const bool ident_ok = residual <= tol;
    switch (kind) {
      case Kind::Inequality: return ineq_ok;
      case Kind::Identity: return ident_ok;
      case Kind::Both: return ineq_ok && ident_ok;
    }
    return false;
  }
};

inline std::string to_string(SlackReport::Kind k) {
  switch (k) {
    case SlackReport::Kind::Inequality: return "inequality";
    case SlackReport::Kind::Identity: return "identity";
    case SlackReport::Kind::Both: return "both";
  }
  return "unknown";
}

inline std::string body_hash(const ScalarField& h) {
  return fnv1a_hex(h.values().data(), h.values().size() * sizeof(double));
}

inline nlohmann::ordered_json to_json(const SlackReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["k"] = r.k;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["slack"] = r.slack;
  j["residual"] = r.residual;
  j["body_hash"] = r.body_hash;
  j["grid"] = r.grid;
  j["tol"] = r.tol;
  j["kind"] = to_string(r.kind);
  j["applicable"] = r.applicable;
  if (r.equality) j["equality"] = true;
  j["passed"] = r.passed();
  if (!r.extra.empty()) {
    nlohmann::ordered_json e = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.extra) e[key] = value;
    j["extra"] = e;
  }
  return j;
}

/// Suite summary: worst slack and residual per check family.
inline nlohmann::ordered_json summarize(const std::vector<SlackReport>& reports) {
  std::map<std::string, std::pair<double, double>> worst;
  for (const auto& r : reports) {
    if (!r.applicable) continue;
    auto [it, inserted] = worst.try_emplace(r.name, r.slack, r.residual);
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.slack);
      it->second.second = std::max(it->second.second, r.residual);
    }
  }
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, w] : worst) out[name] = {{"worst_slack", w.first}, {"worst_residual", w.second}};
  return out;
}

namespace detail {

inline SlackReport make_report(const BodyGeometry& g, std::string name, SlackReport::Kind kind, int k,
                               const SuiteConfig& cfg) {
  SlackReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.k = k;
  r.body_hash = body_hash(g.h);
  r.grid = g.grid().describe() + "/" + to_string(g.grid().scheme());
  r.tol = cfg.tol_grid;
  return r;
}

inline void check_order(const BodyGeometry& g, int k) {
  if (k < 1 || k > g.n) throw Error("order k must satisfy 1 <= k <= n");
}

/// Ambient gradient of log(h^{n+2}/K) = (n+2) grad log h + grad log sigma_n.
inline std::vector<Vec3> log_affine_gradient(const BodyGeometry& g) {
  const auto dlogh = grad(g.h.map([](double v) { return std::log(v); }));
  const auto dlogs = grad(g.sigma[g.n - 1].map([](double v) { return std::log(v); }));
  std::vector<Vec3> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const FrameVec v{(g.n + 2) * dlogh.v[i][0] + dlogs.v[i][0], (g.n + 2) * dlogh.v[i][1] + dlogs.v[i][1]};
    out[i] = g.grid().to_ambient(i, v);
  }
  return out;
}

inline double grad_sq(const BodyGeometry& g, std::size_t i) { return frame_dot(g.n, g.grad_h.v[i], g.grad_h.v[i]); }

}  // namespace detail

/// Local Alexandrov-Fenchel: V_{k+1}(fh,fh,h..h) V_{k+1}(h..h) <= V_{k+1}(fh,h..h)^2.
inline SlackReport af_local(const BodyGeometry& g, const ScalarField& f, int k, const SuiteConfig& cfg = {}) {
  detail::check_order(g, k);
  const auto fh = f * g.h;
  std::vector<ScalarField> a1{fh}, a2{fh, fh}, a0;
  for (int i = 0; i < k; ++i) a1.push_back(g.h);
  for (int i = 0; i < k - 1; ++i) a2.push_back(g.h);
  for (int i = 0; i <= k; ++i) a0.push_back(g.h);
  const double v1 = mixed_volume_k(k, a1).value;
  const double v2 = mixed_volume_k(k, a2).value;
  const double v0 = mixed_volume_k(k, a0).value;
  auto r = detail::make_report(g, "af_local", SlackReport::Kind::Inequality, k, cfg);
  r.lhs = v2 * v0;
  r.rhs = v1 * v1;
  r.slack = r.rhs - r.lhs;
  r.extra = {{"V_fh", v1}, {"V_fh_fh", v2}, {"V_h", v0}};
  return r;
}

/// Projects f so that int f h sigma_k dmu = 0.
inline ScalarField project_out_mean(const BodyGeometry& g, const ScalarField& f, int k) {
  const auto dens = dv_density(g, k);
  const double shift = integrate(f * dens) / integrate(dens);
  return f - shift;
}

/// Spectral estimate: k int f^2 h sigma_k <= int h^2 sigma_k^{ij} f_i f_j after
/// projection; residual cross-checks c_k V_{k+1}(fh,fh,h..h) = lhs - rhs.
inline SlackReport spectral_gap(const BodyGeometry& g, const ScalarField& f_in, int k, const ConstantsTable& constants,
                                const SuiteConfig& cfg = {}) {
  detail::check_order(g, k);
  const auto f = project_out_mean(g, f_in, k);
  const auto df = grad(f);
  const int n = g.n;
  std::vector<double> quad(g.size()), dir(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    quad[i] = k * f[i] * f[i] * g.h[i] * g.sigma[k - 1][i];
    dir[i] = g.h[i] * g.h[i] * g.sigma_grad[k - 1].m[i].apply(n, df.v[i], df.v[i]);
  }
  auto r = detail::make_report(g, "spectral_gap", SlackReport::Kind::Both, k, cfg);
  r.lhs = integrate(ScalarField(g.grid_ptr(), std::move(quad)));
  r.rhs = integrate(ScalarField(g.grid_ptr(), std::move(dir)));
  r.slack = r.rhs - r.lhs;
  const auto fh = f * g.h;
  std::vector<ScalarField> args{fh, fh};
  for (int i = 0; i < k - 1; ++i) args.push_back(g.h);
  const double mixed = constants.c[k - 1] * mixed_volume_k(k, args).value;
  r.residual = relative_residual(mixed, r.lhs - r.rhs);
  r.extra = {{"c_k_V", mixed}};
  return r;
}

/// k int |X|^2 dV_k <= int h (sigma_1 - (k+1) sigma_{k+1}/sigma_k) dV_k + k |int X dV_k|^2 / int dV_k.
/// For k = n the Laplacian form of the right side is evaluated too and their
/// agreement stored as the residual.
inline SlackReport main_lemma(const BodyGeometry& g, int k, const SuiteConfig& cfg = {}) {
  detail::check_order(g, k);
  const int n = g.n;
  const auto dens = dv_density(g, k);
  std::vector<double> lhs_i(g.size()), rhs_i(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    lhs_i[i] = k * g.absX[i] * g.absX[i] * dens[i];
    rhs_i[i] = g.h[i] * (g.sigma_at(1, i) - (k + 1) * g.sigma_at(k + 1, i) / g.sigma_at(k, i)) * dens[i];
  }
  const double mass = integrate(dens);
  const Vec3 cx = centroid_vector(g, k);
  const double centroid_term = k * dot(cx, cx) / mass;
  auto r = detail::make_report(g, "main_lemma", SlackReport::Kind::Inequality, k, cfg);
  r.lhs = integrate(ScalarField(g.grid_ptr(), std::move(lhs_i)));
  r.rhs = integrate(ScalarField(g.grid_ptr(), std::move(rhs_i))) + centroid_term;
  r.slack = r.rhs - r.lhs;
  r.extra = {{"centroid_term", centroid_term}};
  if (k == n) {
    const auto lap = laplacian(g.h);
    std::vector<double> alt(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) alt[i] = g.h[i] * (lap[i] + n * g.h[i]) * dens[i];
    const double rhs_laplacian = integrate(ScalarField(g.grid_ptr(), std::move(alt))) + centroid_term;
    r.kind = SlackReport::Kind::Both;
    r.residual = relative_residual(r.rhs, rhs_laplacian);
    r.extra["rhs_laplacian_form"] = rhs_laplacian;
  }
  return r;
}

/// int <hX, grad log(h^{n+2}/K)> dV = int (n|grad h|^2 - h Lap h) dV <= n |int X dV|^2 / int dV.
/// lhs is the second integral; residual compares it with the first.
inline SlackReport affine_identity(const BodyGeometry& g, const SuiteConfig& cfg = {}) {
  const int n = g.n;
  const auto dens = dv_density(g, n);
  const auto dlog = detail::log_affine_gradient(g);
  const auto lap = laplacian(g.h);
  std::vector<double> first(g.size()), second(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    first[i] = g.h[i] * dot(g.X[i], dlog[i]) * dens[i];
    second[i] = (n * detail::grad_sq(g, i) - g.h[i] * lap[i]) * dens[i];
  }
  const Vec3 cx = centroid_vector(g, n);
  auto r = detail::make_report(g, "affine_identity", SlackReport::Kind::Both, n, cfg);
  const double int_first = integrate(ScalarField(g.grid_ptr(), std::move(first)));
  r.lhs = integrate(ScalarField(g.grid_ptr(), std::move(second)));
  r.rhs = n * dot(cx, cx) / integrate(dens);
  r.slack = r.rhs - r.lhs;
  r.residual = relative_residual(int_first, r.lhs);
  r.extra = {{"log_gradient_form", int_first}};
  return r;
}

/// Sharp Poincare inequality n int (f - mean)^2 <= int |grad f|^2.
inline SlackReport poincare(const ScalarField& f, const SuiteConfig& cfg = {}) {
  const Grid& grid = f.grid();
  const int n = grid.dim();
  const double mean = integrate(f) / grid.sphere_area();
  const auto df = grad(f);
  std::vector<double> dev(f.size()), gsq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    dev[i] = n * (f[i] - mean) * (f[i] - mean);
    gsq[i] = frame_dot(n, df.v[i], df.v[i]);
  }
  SlackReport r;
  r.name = "poincare";
  r.kind = SlackReport::Kind::Inequality;
  r.body_hash = body_hash(f);
  r.grid = grid.describe() + "/" + to_string(grid.scheme());
  r.tol = cfg.tol_grid;
  r.lhs = integrate(ScalarField(f.grid_ptr(), std::move(dev)));
  r.rhs = integrate(ScalarField(f.grid_ptr(), std::move(gsq)));
  r.slack = r.rhs - r.lhs;
  r.extra = {{"relative_slack", r.slack / std::max(r.rhs, 1e-300)}};
  return r;
}

/// int <grad log(h^{n+2}/K), xi_M> dV = 0 with xi_M(x) = Mx - (x^T M x) x;
/// residual normalised by max(int |grad log(..)| |xi_M| dV, 1).
inline SlackReport xi_identity(const BodyGeometry& g, const Eigen::Matrix3d& M, const SuiteConfig& cfg = {}) {
  const int d = g.n + 1;
  const auto dens = dv_density(g, g.n);
  const auto dlog = detail::log_affine_gradient(g);
  std::vector<double> integrand(g.size()), scale(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& x = g.grid().node(i);
    Vec3 mx{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) mx[a] += M(a, b) * x[b];
    const Vec3 xi = mx - dot(x, mx) * x;
    integrand[i] = dot(dlog[i], xi) * dens[i];
    scale[i] = norm(dlog[i]) * norm(xi) * dens[i];
  }
  auto r = detail::make_report(g, "xi_identity", SlackReport::Kind::Identity, g.n, cfg);
  r.lhs = integrate(ScalarField(g.grid_ptr(), std::move(integrand)));
  r.rhs = 0.0;
  const double norm_scale = integrate(ScalarField(g.grid_ptr(), std::move(scale)));
  r.residual = std::abs(r.lhs) / std::max(norm_scale, 1.0);
  r.extra = {{"normalisation", norm_scale}};
  return r;
}

/// With dV = h^p dmu: int X dV = (n+1+p)/n int h^p grad h dmu for every body;
/// when K = h^{1-p} also (n+1+p)/n int |grad h|^2 dV <= |int X dV|^2 / int dV.
inline SlackReport p_chain(const BodyGeometry& g, double p, const SuiteConfig& cfg = {}) {
  const int n = g.n;
  std::vector<Vec3> xv(g.size()), gv(g.size());
  std::vector<double> hp(g.size()), gsq(g.size());
  double constraint = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    hp[i] = std::pow(g.h[i], p);
    xv[i] = hp[i] * g.X[i];
    gv[i] = hp[i] * g.grid().to_ambient(i, g.grad_h.v[i]);
    gsq[i] = hp[i] * detail::grad_sq(g, i);
    constraint = std::max(constraint, std::abs(std::log(g.sigma[n - 1][i]) - (p - 1.0) * std::log(g.h[i])));
  }
  const Vec3 ix = integrate(g.grid(), xv);
  const Vec3 ig = (n + 1.0 + p) / n * integrate(g.grid(), gv);
  const double mass = integrate(ScalarField(g.grid_ptr(), hp));
  auto r = detail::make_report(g, "p_chain", SlackReport::Kind::Identity, n, cfg);
  r.residual = norm(ix - ig) / std::max({norm(ix), norm(ig), 1.0});
  r.extra = {{"p", p},
             {"int_X_dV_norm", norm(ix)},
             {"int_X_dV_1", ix[0]},
             {"rhs_vector_1", ig[0]},
             {"constraint_residual", constraint}};
  if (constraint <= cfg.constraint_tol) {
    r.kind = SlackReport::Kind::Both;
    r.lhs = (n + 1.0 + p) / n * integrate(ScalarField(g.grid_ptr(), std::move(gsq)));
    r.rhs = dot(ix, ix) / mass;
    r.slack = r.rhs - r.lhs;
  }
  return r;
}

/// C^1 nonlinearity phi(x, y) with partial derivatives, as in phi(h, |Dh|) K = h^{n+2}.
struct Nonlinearity {
  std::string name;
  std::function<double(double, double)> value, d1, d2;
};

/// Pointwise identity |X| <grad|X|, grad h> = tau(grad h, grad h); when
/// phi(h,|X|) K = h^{n+2} holds, also min_i <X, grad(h^{n+2}/K)> - c'|grad h|^2
/// with c' = min_i (d1 phi + d2 phi lambda_min / |X|).
inline SlackReport saroglou_sign(const BodyGeometry& g, const Nonlinearity* phi, const SuiteConfig& cfg = {}) {
  const int n = g.n;
  const auto ids = pointwise_identity_report(g);
  auto r = detail::make_report(g, "saroglou_sign", SlackReport::Kind::Identity, n, cfg);
  r.residual = ids.gradient_abs_x;
  if (!phi) return r;
  double constraint = 0.0;
  double c_prime = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = phi->value(g.h[i], g.absX[i]);
    const double a = phi->d1(g.h[i], g.absX[i]);
    const double b = phi->d2(g.h[i], g.absX[i]);
    if (!std::isfinite(v) || !std::isfinite(a) || !std::isfinite(b)) throw Error("nonlinearity returned non-finite value");
    constraint = std::max(constraint, std::abs(std::log(v) + std::log(g.gauss_K[i]) - (n + 2) * std::log(g.h[i])));
    c_prime = std::min(c_prime, a + b * g.lambdas[i][0] / g.absX[i]);
  }
  r.extra = {{"constraint_residual", constraint}, {"c_prime", c_prime}};
  if (constraint > cfg.constraint_tol) return r;
  std::vector<double> psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = std::pow(g.h[i], n + 2) * g.sigma[n - 1][i];
  const auto dpsi = grad(ScalarField(g.grid_ptr(), std::move(psi)));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::min(worst, frame_dot(n, g.grad_h.v[i], dpsi.v[i]) - c_prime * detail::grad_sq(g, i));
  r.kind = SlackReport::Kind::Both;
  r.lhs = 0.0;
  r.rhs = worst;
  r.slack = worst;
  return r;
}

/// Inequality chain behind uniqueness for K = h: key estimate
/// (n+1) int |grad h|^2 <= n |int X|^2 / |S^n|, the Cauchy-Schwarz majorant
/// |int X|^2 <= |S^n| int ((h - mean)^2 + |grad h|^2), and Poincare on h.
/// The Cauchy-Schwarz step holds for every body; the key estimate only when K = h.
inline std::vector<SlackReport> uniqueness_chain(const BodyGeometry& g, const SuiteConfig& cfg = {}) {
  const int n = g.n;
  const Grid& grid = g.grid();
  const double area = grid.sphere_area();
  const double mean = integrate(g.h) / area;
  std::vector<double> gsq(g.size()), cs(g.size());
  double constraint = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gsq[i] = detail::grad_sq(g, i);
    cs[i] = (g.h[i] - mean) * (g.h[i] - mean) + gsq[i];
    constraint = std::max(constraint, std::abs(std::log(g.sigma[n - 1][i]) + std::log(g.h[i])));
  }
  const Vec3 ix = integrate(grid, g.X);
  auto key = detail::make_report(g, "gradient_bound", SlackReport::Kind::Inequality, n, cfg);
  key.lhs = (n + 1) * integrate(ScalarField(g.grid_ptr(), gsq));
  key.rhs = n * dot(ix, ix) / area;
  key.slack = key.rhs - key.lhs;
  key.applicable = constraint <= cfg.constraint_tol;
  key.extra = {{"constraint_residual", constraint}, {"sup_abs_h_minus_1", (g.h - 1.0).max_abs()}};

  auto schwarz = detail::make_report(g, "cauchy_schwarz", SlackReport::Kind::Inequality, n, cfg);
  schwarz.lhs = dot(ix, ix);
  schwarz.rhs = area * integrate(ScalarField(g.grid_ptr(), std::move(cs)));
  schwarz.slack = schwarz.rhs - schwarz.lhs;

  return {key, schwarz, poincare(g.h, cfg)};
}

}  // namespace isoflow
