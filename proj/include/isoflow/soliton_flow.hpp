// Normalised geometric flow on the support function for the isotropic
// soliton equations, with certification of the limit.
//
// The update is h <- h (1 + delta) exp(s) + <x, t>. The part of the residual
// orthogonal to constants (and linear functions, when translations are free)
// drives delta through the implicit smoother (I - dt beta Lap)^{-1}; the low
// modes (s, t) are updated by a damped Newton step on their own projection.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isoflow/inequality_suite.hpp"

namespace isoflow {

struct ProblemSpec {
  enum class Family { GaussPower, Lp, SigmaK };
  enum class Phi { Power, Gaussian };
  enum class Centering { None, Recenter };

  Family family = Family::GaussPower;
  double alpha = 1.0;  ///< gauss_power: K^alpha = h
  double p = 0.0;      ///< lp: K = h^{1-p}
  int k = 1;           ///< sigma_k: h sigma_k = phi(h, |X|)
  Phi phi = Phi::Power;
  double a = 1.0, b = 0.0;  ///< power phi = h^a |X|^b
  double c = 1.0;           ///< gaussian phi = c h exp(|X|^2 / 2)
  Centering centering = Centering::None;

  /// phi and its partials in (x, y) = (h, |X|).
  double phi_value(double x, double y) const {
    return phi == Phi::Power ? std::pow(x, a) * std::pow(y, b) : c * x * std::exp(0.5 * y * y);
  }

  /// Canonical problem string.
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (family) {
      case Family::GaussPower: os << "gauss_power:alpha=" << alpha; break;
      case Family::Lp: os << "lp:p=" << p; break;
      case Family::SigmaK:
        os << "sigma_k:k=" << k;
        if (phi == Phi::Power)
          os << ",phi=power,a=" << a << ",b=" << b;
        else
          os << ",phi=gaussian,c=" << c;
        break;
    }
    os << ",center=" << (centering == Centering::Recenter ? "recenter" : "none");
    return os.str();
  }

  /// Calabi case: ellipsoids rather than balls are the expected limits.
  bool affine_case(int n) const {
    if (family == Family::GaussPower) return std::abs(alpha - 1.0 / (n + 2)) < 1e-12;
    if (family == Family::Lp) return std::abs(p + (n + 1)) < 1e-12;
    return false;
  }

  /// Empty when the parameters sit inside the known uniqueness range,
  /// otherwise a note saying which hypothesis fails.
  std::string hypothesis_note(int n) const {
    switch (family) {
      case Family::GaussPower:
        if (alpha == 1.0 || (alpha >= 1.0 / (n + 2) - 1e-12 && alpha <= 0.5 + 1e-12)) return {};
        return "alpha outside {1} and [1/(n+2), 1/2]";
      case Family::Lp:
        if (p >= -(n + 1) - 1e-12 && p <= -1.0 + 1e-12) return {};
        return "p outside [-(n+1), -1]";
      case Family::SigmaK:
        if (k < 1 || k > n) return "k outside 1..n";
        if (phi == Phi::Power && (k - 1 + a < 0.0 || b < 0.0)) return "power phi violates k-1+x d1 log phi >= 0 or d2 phi >= 0";
        if (phi == Phi::Gaussian && !(c > 0.0)) return "gaussian phi needs c > 0";
        return {};
    }
    return {};
  }
};

/// Parses "gauss_power:alpha=0.5", "lp:p=-3", "sigma_k:k=1,phi=power,a=1,b=0",
/// "sigma_k:k=1,phi=gaussian,c=1"; an optional "center=none|recenter" key
/// overrides the family default (recentring for lp and sigma_k).
inline ProblemSpec parse_problem(const std::string& text) {
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError("malformed problem parameter '" + item + "'");
      if (!kv.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
        throw ParseError("duplicate problem parameter '" + item.substr(0, eq) + "'");
    }
  }
  auto number = [&](const std::string& key) -> std::optional<double> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size() || !std::isfinite(v)) throw ParseError("bad number for '" + key + "': " + it->second);
    kv.erase(it);
    return v;
  };
  ProblemSpec spec;
  if (family == "gauss_power") {
    spec.family = ProblemSpec::Family::GaussPower;
    spec.alpha = number("alpha").value_or(1.0);
    if (!(spec.alpha > 0.0)) throw ParseError("alpha must be positive");
  } else if (family == "lp") {
    spec.family = ProblemSpec::Family::Lp;
    const auto p = number("p");
    if (!p) throw ParseError("lp problem needs p");
    spec.p = *p;
    if (!(spec.p < 1.0)) throw ParseError("lp flow needs p < 1");
    spec.centering = ProblemSpec::Centering::Recenter;
  } else if (family == "sigma_k") {
    spec.family = ProblemSpec::Family::SigmaK;
    const auto k = number("k");
    if (!k || *k != std::floor(*k) || *k < 1) throw ParseError("sigma_k problem needs integer k >= 1");
    spec.k = static_cast<int>(*k);
    spec.centering = ProblemSpec::Centering::Recenter;
    auto it = kv.find("phi");
    const std::string phi = it == kv.end() ? "power" : it->second;
    if (it != kv.end()) kv.erase(it);
    if (phi == "power") {
      spec.phi = ProblemSpec::Phi::Power;
      spec.a = number("a").value_or(1.0);
      spec.b = number("b").value_or(0.0);
    } else if (phi == "gaussian") {
      spec.phi = ProblemSpec::Phi::Gaussian;
      spec.c = number("c").value_or(1.0);
      if (!(spec.c > 0.0)) throw ParseError("gaussian phi needs c > 0");
    } else {
      throw ParseError("unknown phi preset '" + phi + "'");
    }
  } else {
    throw ParseError("unknown problem family '" + family + "'");
  }
  if (auto it = kv.find("center"); it != kv.end()) {
    if (it->second == "none")
      spec.centering = ProblemSpec::Centering::None;
    else if (it->second == "recenter")
      spec.centering = ProblemSpec::Centering::Recenter;
    else
      throw ParseError("center must be none or recenter");
    kv.erase(it);
  }
  if (!kv.empty()) throw ParseError("unknown problem parameter '" + kv.begin()->first + "'");
  return spec;
}

/// R = log G - log h, zero exactly at solutions.
inline ScalarField residual_field(const BodyGeometry& g, const ProblemSpec& prob) {
  const int n = g.n;
  std::vector<double> r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lh = std::log(g.h[i]);
    switch (prob.family) {
      case ProblemSpec::Family::GaussPower:
        r[i] = -prob.alpha * std::log(g.sigma[n - 1][i]) - lh;
        break;
      case ProblemSpec::Family::Lp:
        r[i] = std::log(g.sigma[n - 1][i]) - (prob.p - 1.0) * lh;
        break;
      case ProblemSpec::Family::SigmaK: {
        if (prob.k < 1 || prob.k > n) throw Error("sigma_k order outside 1..n");
        const double phi = prob.phi_value(g.h[i], g.absX[i]);
        if (!std::isfinite(phi) || !(phi > 0.0)) throw Error("nonlinearity phi returned a non-finite or non-positive value");
        r[i] = std::log(phi / g.sigma[prob.k - 1][i]) - lh;
        break;
      }
    }
  }
  return ScalarField(g.grid_ptr(), std::move(r));
}

namespace detail {

/// Sign/scale turning R into the flow speed: the flow is d/dt log h = F
/// with F elliptic of positive symbol in the principal part.
inline double flow_factor(const ProblemSpec& prob) {
  switch (prob.family) {
    case ProblemSpec::Family::GaussPower: return -1.0;
    case ProblemSpec::Family::Lp: return 1.0 / (1.0 - prob.p);
    case ProblemSpec::Family::SigmaK: return -1.0;
  }
  return 1.0;
}

/// Upper bound of the principal coefficient of F over the body.
inline double principal_bound(const BodyGeometry& g, const ProblemSpec& prob) {
  const int n = g.n;
  const int k = prob.family == ProblemSpec::Family::SigmaK ? prob.k : n;
  const double scale = prob.family == ProblemSpec::Family::GaussPower ? prob.alpha
                       : prob.family == ProblemSpec::Family::Lp      ? 1.0 / (1.0 - prob.p)
                                                                       : 1.0;
  double beta = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto e = g.sigma_grad[k - 1].m[i].eigenvalues(n);
    beta = std::max(beta, g.h[i] * std::max(e[0], e[1]) / g.sigma[k - 1][i]);
  }
  return scale * beta;
}

/// Solves (I - w Lap) u = f on the grid, mode by mode in longitude.
class ImplicitSmoother {
 public:
  ImplicitSmoother(const GridPtr& grid, double w) : grid_(grid), w_(w) {
    const int np = grid->resolution().n_phi;
    const int modes = np / 2;
    cos_.resize(modes + 1, std::vector<double>(np));
    sin_.resize(modes + 1, std::vector<double>(np));
    for (int m = 0; m <= modes; ++m)
      for (int k = 0; k < np; ++k) {
        cos_[m][k] = std::cos(m * grid->phi(k));
        sin_[m][k] = std::sin(m * grid->phi(k));
      }
    if (grid->dim() == 1) return;
    const int nt = grid->resolution().n_theta;
    Eigen::VectorXd cot(nt), inv_s2(nt);
    for (int j = 0; j < nt; ++j) {
      const double th = grid->theta(static_cast<std::size_t>(j) * np);
      cot[j] = std::cos(th) / std::sin(th);
      inv_s2[j] = 1.0 / (std::sin(th) * std::sin(th));
    }
    for (int m = 0; m <= modes; ++m) {
      const int parity = m % 2;
      Eigen::MatrixXd lap = grid->theta_d2(parity) + cot.asDiagonal() * grid->theta_d1(parity);
      lap.diagonal() += grid->phi_d2_symbol(m) * inv_s2;
      lu_.emplace_back(Eigen::MatrixXd::Identity(nt, nt) - w * lap);
    }
  }

  ScalarField apply(const ScalarField& f) const {
    const Grid& grid = *grid_;
    const int np = grid.resolution().n_phi;
    const int rings = grid.dim() == 1 ? 1 : grid.resolution().n_theta;
    const int modes = np / 2;
    // real DFT per ring: f = sum_m A_m cos + B_m sin
    Eigen::MatrixXd A(rings, modes + 1), B(rings, modes + 1);
    for (int j = 0; j < rings; ++j) {
      const double* row = f.values().data() + static_cast<std::size_t>(j) * np;
      for (int m = 0; m <= modes; ++m) {
        CompensatedSum sa, sb;
        for (int k = 0; k < np; ++k) {
          sa.add(row[k] * cos_[m][k]);
          sb.add(row[k] * sin_[m][k]);
        }
        const double scale = (m == 0 || m == modes) ? 1.0 / np : 2.0 / np;
        A(j, m) = scale * sa.value();
        B(j, m) = (m == 0 || m == modes) ? 0.0 : scale * sb.value();
      }
    }
    for (int m = 0; m <= modes; ++m) {
      if (grid.dim() == 1) {
        const double factor = 1.0 / (1.0 - w_ * grid.phi_d2_symbol(m));
        A(0, m) *= factor;
        B(0, m) *= factor;
      } else {
        A.col(m) = lu_[m].solve(A.col(m));
        B.col(m) = lu_[m].solve(B.col(m));
      }
    }
    std::vector<double> out(f.size());
    for (int j = 0; j < rings; ++j)
      for (int k = 0; k < np; ++k) {
        double s = 0.0;
        for (int m = 0; m <= modes; ++m) s += A(j, m) * cos_[m][k] + B(j, m) * sin_[m][k];
        out[static_cast<std::size_t>(j) * np + k] = s;
      }
    return ScalarField(grid_, std::move(out));
  }

 private:
  GridPtr grid_;
  double w_;
  std::vector<std::vector<double>> cos_, sin_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

}  // namespace detail

/// min_r ||h - r||_inf / r.
inline double sphere_distance(const ScalarField& h) { return (h.max() - h.min()) / (h.max() + h.min()); }

/// ||h^2 - x^T M x||_inf / ||h^2||_inf for the weighted least-squares quadratic fit.
inline double ellipsoid_distance(const ScalarField& h, Eigen::Matrix3d* fitted = nullptr) {
  const Grid& grid = h.grid();
  const int d = grid.dim() + 1;
  std::vector<std::pair<int, int>> monomials;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) monomials.push_back({a, b});
  const int cols = static_cast<int>(monomials.size());
  Eigen::MatrixXd basis(grid.size(), cols);
  Eigen::VectorXd rhs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3& x = grid.node(i);
    const double sw = std::sqrt(grid.weight(i));
    for (int c = 0; c < cols; ++c) basis(i, c) = sw * x[monomials[c].first] * x[monomials[c].second];
    rhs[i] = sw * h[i] * h[i];
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (int c = 0; c < cols; ++c) {
    const auto [a, b] = monomials[c];
    if (a == b)
      M(a, a) = coef[c];
    else
      M(a, b) = M(b, a) = 0.5 * coef[c];
  }
  if (fitted) *fitted = M;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3& x = grid.node(i);
    double q = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) q += x[a] * M(a, b) * x[b];
    worst = std::max(worst, std::abs(h[i] * h[i] - q));
    scale = std::max(scale, h[i] * h[i]);
  }
  return worst / scale;
}

struct FlowConfig {
  double dt0 = 0.0;  ///< initial step; 0 selects 0.1 / (1 + max|R|)
  double tol = 1e-8;
  int max_steps = 2000;
  double dt_max = 50.0;
  int max_halvings = 30;
  int growth_interval = 10;  ///< consecutive acceptances before growing dt
  double growth = 1.2;
};

struct TraceRow {
  int step = 0;
  double t = 0.0;
  double residual_inf = 0.0;
  double margin = 0.0;
  double volume = 0.0;
  double centroid_norm = 0.0;
  double sphere_dist = 0.0;
  double ellipsoid_dist = 0.0;
};

struct FlowTrace {
  std::vector<TraceRow> rows;

  std::string csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "step,t,residual_inf,margin,volume,centroid_norm,sphere_dist,ellipsoid_dist\n";
    for (const auto& r : rows)
      os << r.step << ',' << r.t << ',' << r.residual_inf << ',' << r.margin << ',' << r.volume << ','
         << r.centroid_norm << ',' << r.sphere_dist << ',' << r.ellipsoid_dist << '\n';
    return os.str();
  }
};

struct FlowState {
  ScalarField h;
  double t = 0.0;
  int step = 0;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int max_steps, FlowTrace trace, FlowState last)
      : Error("no convergence within " + std::to_string(max_steps) + " steps"),
        trace_(std::move(trace)),
        last_(std::move(last)) {}
  const FlowTrace& trace() const { return trace_; }
  const FlowState& last_state() const { return last_; }

 private:
  FlowTrace trace_;
  FlowState last_;
};

class StepCollapse : public Error {
 public:
  StepCollapse(double dt, FlowTrace trace, FlowState state)
      : Error("time step collapsed to " + std::to_string(dt) + " at step " + std::to_string(state.step)),
        trace_(std::move(trace)),
        state_(std::move(state)) {}
  const FlowTrace& trace() const { return trace_; }
  const FlowState& state() const { return state_; }

 private:
  FlowTrace trace_;
  FlowState state_;
};

namespace detail {

/// Orthonormal low-mode basis: constants, plus linear functions when
/// translations are not fixed by recentring.
inline std::vector<ScalarField> low_basis(const GridPtr& grid, bool with_linear) {
  const double area = grid->sphere_area();
  std::vector<ScalarField> out{ScalarField::constant(grid, 1.0 / std::sqrt(area))};
  if (with_linear) {
    const double s = std::sqrt((grid->dim() + 1) / area);
    for (int a = 0; a <= grid->dim(); ++a)
      out.push_back(ScalarField::sample(grid, [a, s](const Vec3& x) { return s * x[a]; }));
  }
  return out;
}

inline Eigen::VectorXd low_coefficients(const ScalarField& f, const std::vector<ScalarField>& basis) {
  Eigen::VectorXd c(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) c[j] = integrate(f * basis[j]);
  return c;
}

/// Applies the low-mode parameters: scale exp(s) then translation t.
inline ScalarField apply_low(const ScalarField& h, const Eigen::VectorXd& params) {
  const double scale = std::exp(params[0]);
  return h.map([&](double v, const Vec3& x) {
    double out = scale * v;
    for (int a = 1; a < params.size(); ++a) out += params[a] * x[a - 1];
    return out;
  });
}

}  // namespace detail

/// One flow step of size dt. Returns nullopt when the candidate leaves the
/// convex cone (h <= 0 or margin <= 0).
inline std::optional<FlowState> step(const FlowState& state, const ProblemSpec& prob, double dt) {
  const ScalarField& h = state.h;
  const GridPtr& grid = h.grid_ptr();
  const auto g = assemble(h);
  const double factor = detail::flow_factor(prob);
  const auto speed = [&](const BodyGeometry& geo) { return factor * residual_field(geo, prob); };
  const ScalarField F = speed(g);
  const bool recentre = prob.centering == ProblemSpec::Centering::Recenter;
  const auto basis = detail::low_basis(grid, !recentre);
  const Eigen::VectorXd coef = detail::low_coefficients(F, basis);

  ScalarField high = F;
  for (std::size_t j = 0; j < basis.size(); ++j) high = high - coef[j] * basis[j];
  const double beta = detail::principal_bound(g, prob);
  const ScalarField delta = dt * detail::ImplicitSmoother(grid, dt * beta).apply(high);

  // low modes: damped Newton on the projected speed, in log-h coordinates.
  // B maps parameters to low coefficients of d log h, L = J B^{-1}.
  const int m = static_cast<int>(basis.size());
  Eigen::MatrixXd J(m, m), B(m, m);
  const double eps = 1e-6;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(m);
    probe[j] = eps;
    const auto gp = assemble(detail::apply_low(h, probe));
    J.col(j) = (detail::low_coefficients(speed(gp), basis) - coef) / eps;
    const auto dlog = j == 0 ? ScalarField::constant(grid, 1.0)
                             : h.map([j](double v, const Vec3& x) { return x[j - 1] / v; });
    B.col(j) = detail::low_coefficients(dlog, basis);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> b_lu(B);
  const Eigen::MatrixXd L = B.transpose().partialPivLu().solve(J.transpose()).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::VectorXd proj = svd.matrixU().transpose() * coef;
  for (int j = 0; j < m; ++j)
    proj[j] = sv[j] > 1e-10 * sv[0] ? dt * proj[j] / (1.0 + dt * sv[j]) : 0.0;
  const Eigen::VectorXd params = -b_lu.solve(svd.matrixV() * proj);

  ScalarField next = detail::apply_low(h * (delta + 1.0), params);
  if (!(next.min() > 0.0) || !(convexity_margin(next) > 0.0)) return std::nullopt;
  if (recentre) {
    next = recenter(next);
    if (!(next.min() > 0.0) || !(convexity_margin(next) > 0.0)) return std::nullopt;
  }
  return FlowState{std::move(next), state.t + dt, state.step + 1};
}

inline TraceRow trace_row(const FlowState& s, const BodyGeometry& g, const ScalarField& R) {
  TraceRow row;
  row.step = s.step;
  row.t = s.t;
  row.residual_inf = R.max_abs();
  row.margin = convexity_margin(s.h);
  row.volume = body_volume(g);
  row.centroid_norm = norm(centroid(g));
  row.sphere_dist = sphere_distance(s.h);
  row.ellipsoid_dist = ellipsoid_distance(s.h);
  return row;
}

struct FlowResult {
  FlowTrace trace;
  FlowState state;
  BodyGeometry geometry;
};

/// Iterates step until ||R||_inf < tol. Throws NoConvergence or StepCollapse.
inline FlowResult run(const ScalarField& body, const ProblemSpec& prob, const FlowConfig& cfg = {}) {
  if (!(cfg.tol > 0.0)) throw Error("tolerance must be positive");
  FlowState state{body, 0.0, 0};
  if (prob.centering == ProblemSpec::Centering::Recenter) state.h = recenter(state.h);
  FlowTrace trace;
  auto g = assemble(state.h);
  auto R = residual_field(g, prob);
  trace.rows.push_back(trace_row(state, g, R));
  double dt = cfg.dt0 > 0.0 ? cfg.dt0 : 0.1 / (1.0 + R.max_abs());
  int streak = 0;
  while (R.max_abs() >= cfg.tol) {
    if (state.step >= cfg.max_steps) throw NoConvergence(cfg.max_steps, std::move(trace), std::move(state));
    std::optional<FlowState> next;
    for (int halving = 0;; ++halving) {
      next = step(state, prob, dt);
      if (next) break;
      if (halving == cfg.max_halvings) throw StepCollapse(dt, std::move(trace), std::move(state));
      dt *= 0.5;
      streak = 0;
    }
    state = std::move(*next);
    g = assemble(state.h);
    R = residual_field(g, prob);
    trace.rows.push_back(trace_row(state, g, R));
    if (++streak >= cfg.growth_interval) {
      dt = std::min(cfg.dt_max, dt * cfg.growth);
      streak = 0;
    }
  }
  return {std::move(trace), std::move(state), std::move(g)};
}

/// phi~(x, y) = x^{n+1} phi(x, y), so that the k = n equation reads phi~ K = h^{n+2}.
inline Nonlinearity lifted_nonlinearity(const ProblemSpec& prob, int n) {
  Nonlinearity out;
  const double e = n + 1.0;
  if (prob.phi == ProblemSpec::Phi::Power) {
    const double a = prob.a + e, b = prob.b;
    out.name = "power";
    out.value = [a, b](double x, double y) { return std::pow(x, a) * std::pow(y, b); };
    out.d1 = [a, b](double x, double y) { return a * std::pow(x, a - 1.0) * std::pow(y, b); };
    out.d2 = [a, b](double x, double y) { return b == 0.0 ? 0.0 : b * std::pow(x, a) * std::pow(y, b - 1.0); };
  } else {
    const double c = prob.c, a = e + 1.0;
    out.name = "gaussian";
    out.value = [c, a](double x, double y) { return c * std::pow(x, a) * std::exp(0.5 * y * y); };
    out.d1 = [c, a](double x, double y) { return c * a * std::pow(x, a - 1.0) * std::exp(0.5 * y * y); };
    out.d2 = [c, a](double x, double y) { return c * std::pow(x, a) * y * std::exp(0.5 * y * y); };
  }
  return out;
}

/// Certification bundle for a converged state.
inline std::vector<SlackReport> certify(const BodyGeometry& g, const ProblemSpec& prob, const SuiteConfig& cfg = {}) {
  const int n = g.n;
  std::vector<SlackReport> out;
  auto shape = detail::make_report(g, "sphere_distance", SlackReport::Kind::Identity, n, cfg);
  shape.residual = sphere_distance(g.h);
  shape.tol = cfg.sphere_tol;
  if (prob.affine_case(n)) {
    shape.name = "ellipsoid_distance";
    shape.residual = ellipsoid_distance(g.h);
    shape.tol = cfg.ellipsoid_tol;
  }
  out.push_back(shape);
  switch (prob.family) {
    case ProblemSpec::Family::GaussPower:
      if (prob.alpha == 1.0)
        for (auto& r : uniqueness_chain(g, cfg)) out.push_back(r);
      break;
    case ProblemSpec::Family::Lp:
      out.push_back(p_chain(g, prob.p, cfg));
      break;
    case ProblemSpec::Family::SigmaK:
      if (prob.k == n) {
        const auto phi = lifted_nonlinearity(prob, n);
        out.push_back(saroglou_sign(g, &phi, cfg));
      } else {
        out.push_back(saroglou_sign(g, nullptr, cfg));
      }
      break;
  }
  if (prob.affine_case(n)) {
    auto eq = main_lemma(g, n, cfg);
    eq.equality = true;
    out.push_back(eq);
  }
  return out;
}

}  // namespace isoflow
