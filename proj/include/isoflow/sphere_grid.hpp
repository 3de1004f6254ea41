// Quadrature grids on S^1 and S^2 with covariant first and second derivatives.
//
// S^1: N uniform nodes phi_k = 2 pi k / N, weights 2 pi / N.
// S^2: Gauss-Legendre nodes in cos(theta) times N_phi uniform longitudes.
// No node sits on a pole. Colatitude derivatives use the smooth doubly
// periodic extension f(-theta, phi) = f(theta, phi + pi), split into the
// parts even and odd under phi -> phi + pi, which is what lets both
// backends share one set of per-parity colatitude matrices.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isoflow/core.hpp"

namespace isoflow {

/// Differentiation backend. FiniteDifference4 uses 5-point Lagrange stencils
/// (order 4); Spectral uses dense trigonometric / Legendre-interpolation
/// matrices and is exact on band-limited fields.
enum class DiffScheme { FiniteDifference4, Spectral };

inline std::string to_string(DiffScheme s) {
  return s == DiffScheme::Spectral ? "spectral" : "fd4";
}
inline DiffScheme parse_scheme(const std::string& s) {
  if (s == "fd4") return DiffScheme::FiniteDifference4;
  if (s == "spectral") return DiffScheme::Spectral;
  throw ParseError("unknown differentiation scheme '" + s + "'");
}

/// Node counts; S^1 uses n_phi only.
struct Resolution {
  int n_theta = 0;
  int n_phi = 0;
  bool operator==(const Resolution&) const = default;
};

/// Parses "N" (circle) or "WxH" (colatitude x longitude).
inline Resolution parse_resolution(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      Resolution r{0, std::stoi(text, &used)};
      if (used != text.size()) throw ParseError("");
      return r;
    }
    std::size_t used2 = 0;
    Resolution r{std::stoi(text.substr(0, x), &used), std::stoi(text.substr(x + 1), &used2)};
    if (used != x || used2 != text.size() - x - 1) throw ParseError("");
    return r;
  } catch (const std::exception&) {
    throw ParseError("cannot parse grid resolution '" + text + "'");
  }
}

namespace detail {

/// Finite-difference weights for derivative orders 0..2 at x0 over arbitrary
/// nodes (Fornberg's recursion).
inline std::vector<std::array<double, 3>> fornberg_weights(double x0, const std::vector<double>& x) {
  const std::size_t count = x.size();
  constexpr int max_order = 2;
  std::vector<std::array<double, 3>> c(count, {0.0, 0.0, 0.0});
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < count; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Gauss-Legendre nodes (descending in t, so ascending in theta) and weights.
inline void gauss_legendre(int count, std::vector<double>& t, std::vector<double>& w) {
  t.assign(count, 0.0);
  w.assign(count, 0.0);
  for (int i = 0; i < count; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int l = 2; l <= count; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int l = 2; l <= count; ++l) {
      const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = count * (x * p1 - p0) / (x * x - 1.0);
    t[i] = x;
    w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace detail

/// Sparse circulant stencil: out[i] = sum w * in[i + offset] (periodic).
using CirculantStencil = std::vector<std::pair<int, double>>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

class Grid {
 public:
  static constexpr int kMinResolution = 16;

  /// Builds a grid on S^n. Throws Error for n outside {1,2} or too few nodes.
  static GridPtr build(int n, Resolution res, DiffScheme scheme = DiffScheme::FiniteDifference4) {
    if (n != 1 && n != 2) throw Error("unsupported dimension n = " + std::to_string(n));
    if (n == 1) res.n_theta = 0;
    if (res.n_phi < kMinResolution || (n == 2 && res.n_theta < kMinResolution))
      throw Error("resolution below minimum of " + std::to_string(kMinResolution) + " per parameter");
    if (n == 2 && res.n_phi % 2 != 0) throw Error("longitude count must be even on S^2");
    return GridPtr(new Grid(n, res, scheme));
  }

  int dim() const { return n_; }
  std::size_t size() const { return nodes_.size(); }
  Resolution resolution() const { return res_; }
  DiffScheme scheme() const { return scheme_; }
  std::string describe() const {
    return n_ == 1 ? std::to_string(res_.n_phi)
                   : std::to_string(res_.n_theta) + "x" + std::to_string(res_.n_phi);
  }
  /// |S^n|.
  double sphere_area() const { return n_ == 1 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double theta(std::size_t i) const { return theta_[i]; }
  double phi(std::size_t i) const { return phi_[i]; }
  /// Orthonormal tangent frame (e_1, e_2) at node i; e_2 is zero on S^1.
  const std::array<Vec3, 2>& frame(std::size_t i) const { return frames_[i]; }

  Vec3 to_ambient(std::size_t i, const FrameVec& v) const {
    const auto& e = frames_[i];
    return v[0] * e[0] + v[1] * e[1];
  }
  FrameVec to_frame(std::size_t i, const Vec3& v) const {
    const auto& e = frames_[i];
    return {dot(v, e[0]), n_ == 2 ? dot(v, e[1]) : 0.0};
  }

  bool same_as(const Grid& o) const { return this == &o || (n_ == o.n_ && res_ == o.res_ && scheme_ == o.scheme_); }

  // --- raw parametric derivative kernels -----------------------------------

  /// First and second longitude derivatives (periodic).
  void diff_phi(std::span<const double> in, std::span<double> d1, std::span<double> d2) const {
    const int np = res_.n_phi;
    const int rings = n_ == 1 ? 1 : res_.n_theta;
    if (phi_dense_d1_.size() > 0) {
      using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      const Eigen::Map<const RowMajor> f(in.data(), rings, np);
      Eigen::Map<RowMajor>(d1.data(), rings, np).noalias() = f * phi_dense_d1_.transpose();
      Eigen::Map<RowMajor>(d2.data(), rings, np).noalias() = f * phi_dense_d2_.transpose();
      return;
    }
    for (int j = 0; j < rings; ++j) {
      const double* row = in.data() + static_cast<std::size_t>(j) * np;
      for (int k = 0; k < np; ++k) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (const auto& [off, w] : phi_d1_) s1 += w * row[wrap(k + off, np)];
        for (const auto& [off, w] : phi_d2_) s2 += w * row[wrap(k + off, np)];
        d1[static_cast<std::size_t>(j) * np + k] = s1;
        d2[static_cast<std::size_t>(j) * np + k] = s2;
      }
    }
  }

  /// First and second colatitude derivatives on S^2 (cross-pole continuation).
  void diff_theta(std::span<const double> in, std::span<double> d1, std::span<double> d2) const {
    const int nt = res_.n_theta;
    const int np = res_.n_phi;
    const int half = np / 2;
    Eigen::VectorXd even(nt), odd(nt);
    for (int k = 0; k < half; ++k) {
      for (int j = 0; j < nt; ++j) {
        const double a = in[static_cast<std::size_t>(j) * np + k];
        const double b = in[static_cast<std::size_t>(j) * np + k + half];
        even[j] = 0.5 * (a + b);
        odd[j] = 0.5 * (a - b);
      }
      const Eigen::VectorXd e1 = theta_d1_[0] * even, o1 = theta_d1_[1] * odd;
      const Eigen::VectorXd e2 = theta_d2_[0] * even, o2 = theta_d2_[1] * odd;
      for (int j = 0; j < nt; ++j) {
        d1[static_cast<std::size_t>(j) * np + k] = e1[j] + o1[j];
        d1[static_cast<std::size_t>(j) * np + k + half] = e1[j] - o1[j];
        d2[static_cast<std::size_t>(j) * np + k] = e2[j] + o2[j];
        d2[static_cast<std::size_t>(j) * np + k + half] = e2[j] - o2[j];
      }
    }
  }

  /// Colatitude operators acting on the part of a field with parity
  /// (-1)^parity under phi -> phi + pi; used by implicit solvers.
  const Eigen::MatrixXd& theta_d1(int parity) const { return theta_d1_[parity]; }
  const Eigen::MatrixXd& theta_d2(int parity) const { return theta_d2_[parity]; }

  /// Eigenvalue of the discrete d^2/dphi^2 on the Fourier mode cos(m phi).
  double phi_d2_symbol(int m) const {
    const double h = 2.0 * std::numbers::pi / res_.n_phi;
    double s = 0.0;
    for (const auto& [off, w] : phi_d2_) s += w * std::cos(m * off * h);
    return s;
  }

 private:
  Grid(int n, Resolution res, DiffScheme scheme) : n_(n), res_(res), scheme_(scheme) {
    const int np = res.n_phi;
    const double h = 2.0 * std::numbers::pi / np;
    build_phi_operators(h);
    if (n == 1) {
      for (int k = 0; k < np; ++k) {
        const double p = k * h;
        nodes_.push_back({std::cos(p), std::sin(p), 0.0});
        theta_.push_back(0.5 * std::numbers::pi);
        phi_.push_back(p);
        weights_.push_back(h);
        frames_.push_back({Vec3{-std::sin(p), std::cos(p), 0.0}, Vec3{0.0, 0.0, 0.0}});
      }
      return;
    }
    std::vector<double> t, w;
    detail::gauss_legendre(res.n_theta, t, w);
    std::vector<double> thetas(res.n_theta);
    for (int j = 0; j < res.n_theta; ++j) thetas[j] = std::acos(t[j]);
    for (int j = 0; j < res.n_theta; ++j) {
      const double th = thetas[j];
      const double st = std::sqrt(1.0 - t[j] * t[j]);
      const double ct = t[j];
      for (int k = 0; k < np; ++k) {
        const double p = k * h;
        const double cp = std::cos(p), sp = std::sin(p);
        nodes_.push_back({st * cp, st * sp, ct});
        theta_.push_back(th);
        phi_.push_back(p);
        weights_.push_back(w[j] * h);
        frames_.push_back({Vec3{ct * cp, ct * sp, -st}, Vec3{-sp, cp, 0.0}});
      }
    }
    if (scheme == DiffScheme::FiniteDifference4)
      build_theta_fd(thetas);
    else
      build_theta_spectral(t, w);
  }

  static int wrap(int k, int np) { return ((k % np) + np) % np; }

  void build_phi_operators(double h) {
    const int np = res_.n_phi;
    if (scheme_ == DiffScheme::FiniteDifference4) {
      const std::vector<double> x = {-2 * h, -h, 0.0, h, 2 * h};
      const auto c = detail::fornberg_weights(0.0, x);
      for (int o = -2; o <= 2; ++o) {
        if (c[o + 2][1] != 0.0) phi_d1_.push_back({o, c[o + 2][1]});
        phi_d2_.push_back({o, c[o + 2][2]});
      }
      return;
    }
    // Dense periodic spectral differentiation (even node count).
    if (np % 2 != 0) throw Error("spectral scheme needs an even longitude count");
    for (int o = -np / 2 + 1; o <= np / 2; ++o) {
      if (o == 0) {
        phi_d2_.push_back({0, -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0});
        continue;
      }
      const double sign = (o % 2 == 0) ? 1.0 : -1.0;
      const double half_angle = 0.5 * o * h;
      phi_d1_.push_back({o, -0.5 * sign / std::tan(half_angle)});
      phi_d2_.push_back({o, -0.5 * sign / (std::sin(half_angle) * std::sin(half_angle))});
    }
    phi_dense_d1_ = Eigen::MatrixXd::Zero(np, np);
    phi_dense_d2_ = Eigen::MatrixXd::Zero(np, np);
    for (int k = 0; k < np; ++k) {
      for (const auto& [off, w] : phi_d1_) phi_dense_d1_(k, wrap(k + off, np)) += w;
      for (const auto& [off, w] : phi_d2_) phi_dense_d2_(k, wrap(k + off, np)) += w;
    }
  }

  // Five-point Lagrange stencils on the nonuniform colatitude nodes, with
  // ghost nodes reflected through the poles.
  void build_theta_fd(const std::vector<double>& th) {
    const int nt = res_.n_theta;
    for (int parity = 0; parity < 2; ++parity) {
      const double flip = parity == 0 ? 1.0 : -1.0;
      Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(nt, nt), d2 = Eigen::MatrixXd::Zero(nt, nt);
      for (int j = 0; j < nt; ++j) {
        std::vector<double> pos;
        std::vector<std::pair<int, double>> src;
        for (int o = -2; o <= 2; ++o) {
          const int jj = j + o;
          if (jj < 0) {
            pos.push_back(-th[-jj - 1]);
            src.push_back({-jj - 1, flip});
          } else if (jj >= nt) {
            const int mirror = 2 * nt - 1 - jj;
            pos.push_back(2.0 * std::numbers::pi - th[mirror]);
            src.push_back({mirror, flip});
          } else {
            pos.push_back(th[jj]);
            src.push_back({jj, 1.0});
          }
        }
        const auto c = detail::fornberg_weights(th[j], pos);
        for (std::size_t s = 0; s < pos.size(); ++s) {
          d1(j, src[s].first) += c[s][1] * src[s].second;
          d2(j, src[s].first) += c[s][2] * src[s].second;
        }
      }
      theta_d1_[parity] = std::move(d1);
      theta_d2_[parity] = std::move(d2);
    }
  }

  // Even part of the pole-extended meridian is a polynomial in t = cos(theta);
  // the odd part is sin(theta) times one. Differentiate by barycentric
  // interpolation at the Gauss-Legendre nodes.
  void build_theta_spectral(const std::vector<double>& t, const std::vector<double>& w) {
    const int nt = res_.n_theta;
    std::vector<double> bary(nt);
    for (int j = 0; j < nt; ++j) bary[j] = ((j % 2 == 0) ? 1.0 : -1.0) * std::sqrt((1.0 - t[j] * t[j]) * w[j]);
    Eigen::MatrixXd dt = Eigen::MatrixXd::Zero(nt, nt), dt2 = Eigen::MatrixXd::Zero(nt, nt);
    for (int i = 0; i < nt; ++i) {
      double diag = 0.0;
      for (int j = 0; j < nt; ++j) {
        if (i == j) continue;
        dt(i, j) = (bary[j] / bary[i]) / (t[i] - t[j]);
        diag -= dt(i, j);
      }
      dt(i, i) = diag;
    }
    for (int i = 0; i < nt; ++i) {
      double diag = 0.0;
      for (int j = 0; j < nt; ++j) {
        if (i == j) continue;
        dt2(i, j) = 2.0 * dt(i, j) * (dt(i, i) - 1.0 / (t[i] - t[j]));
        diag -= dt2(i, j);
      }
      dt2(i, i) = diag;
    }
    Eigen::VectorXd s(nt), c(nt);
    for (int j = 0; j < nt; ++j) {
      c[j] = t[j];
      s[j] = std::sqrt(1.0 - t[j] * t[j]);
    }
    // even: g = P(t); g' = -s P'; g'' = s^2 P'' - c P'
    theta_d1_[0] = -(s.asDiagonal() * dt);
    theta_d2_[0] = (s.array().square().matrix().asDiagonal() * dt2) - (c.asDiagonal() * dt);
    // odd: g = s q(t); g' = c q - s^2 q'; g'' = -s q - 3 s c q' + s^3 q''
    const Eigen::MatrixXd q_of_g = s.cwiseInverse().asDiagonal();
    theta_d1_[1] = (c.asDiagonal() * q_of_g) - (s.array().square().matrix().asDiagonal() * dt * q_of_g);
    theta_d2_[1] = -Eigen::MatrixXd::Identity(nt, nt) -
                   (3.0 * (s.array() * c.array()).matrix()).asDiagonal() * dt * q_of_g +
                   (s.array().cube().matrix().asDiagonal() * dt2 * q_of_g);
  }

  int n_;
  Resolution res_;
  DiffScheme scheme_;
  std::vector<Vec3> nodes_;
  std::vector<double> theta_, phi_, weights_;
  std::vector<std::array<Vec3, 2>> frames_;
  CirculantStencil phi_d1_, phi_d2_;
  Eigen::MatrixXd phi_dense_d1_, phi_dense_d2_;  // spectral scheme only
  std::array<Eigen::MatrixXd, 2> theta_d1_, theta_d2_;
};

/// One real value per grid node; values are validated finite on construction.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw Error("scalar field without grid");
    if (values_.size() != grid_->size()) throw Error("scalar field size does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error("scalar field has non-finite values");
  }
  static ScalarField constant(GridPtr grid, double c) {
    const auto count = grid->size();
    return ScalarField(std::move(grid), std::vector<double>(count, c));
  }
  /// Samples f(x) at every node.
  template <class F>
  static ScalarField sample(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
    return ScalarField(std::move(grid), std::move(v));
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Pointwise map v -> f(v) (or f(v, node) when f takes the node too).
  template <class F>
  ScalarField map(F&& f) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if constexpr (std::is_invocable_v<F, double, const Vec3&>)
        out[i] = f(values_[i], grid_->node(i));
      else
        out[i] = f(values_[i]);
    }
    return ScalarField(grid_, std::move(out));
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::plus<>{}); }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::minus<>{}); }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::multiplies<>{}); }
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::divides<>{}); }
  friend ScalarField operator*(double s, const ScalarField& a) { return a.map([s](double v) { return s * v; }); }
  friend ScalarField operator+(const ScalarField& a, double s) { return a.map([s](double v) { return v + s; }); }
  friend ScalarField operator-(const ScalarField& a, double s) { return a.map([s](double v) { return v - s; }); }

 private:
  template <class Op>
  static ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
    if (!a.grid_->same_as(*b.grid_)) throw Error("fields live on different grids");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.values_[i], b.values_[i]);
    return ScalarField(a.grid_, std::move(out));
  }

  GridPtr grid_;
  std::vector<double> values_;
};

/// Tangent vector field in frame components.
struct FrameVectorField {
  GridPtr grid;
  std::vector<FrameVec> v;
};

/// Symmetric 2-tensor field in frame components.
struct FrameMatrixField {
  GridPtr grid;
  std::vector<Sym2> m;
};

/// Parametric partial derivatives. On S^1 only f_phi and f_phiphi are set.
struct Partials {
  std::vector<double> f_t, f_p, f_tt, f_tp, f_pp;
};

inline Partials partials(const ScalarField& f) {
  const Grid& g = f.grid();
  const std::size_t count = g.size();
  Partials d;
  d.f_p.resize(count);
  d.f_pp.resize(count);
  g.diff_phi(f.values(), d.f_p, d.f_pp);
  if (g.dim() == 2) {
    d.f_t.resize(count);
    d.f_tt.resize(count);
    d.f_tp.resize(count);
    std::vector<double> scratch(count);
    g.diff_theta(f.values(), d.f_t, d.f_tt);
    g.diff_theta(d.f_p, d.f_tp, scratch);
  }
  return d;
}

/// sum_nodes f * weight, compensated.
inline double integrate(const ScalarField& f) {
  CompensatedSum s;
  const auto& w = f.grid().weights();
  for (std::size_t i = 0; i < f.size(); ++i) s.add(f[i] * w[i]);
  return s.value();
}

/// Integral of a vector-valued integrand given per node.
inline Vec3 integrate(const Grid& g, const std::vector<Vec3>& v) {
  std::array<CompensatedSum, 3> s;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int c = 0; c < 3; ++c) s[c].add(v[i][c] * g.weight(i));
  return {s[0].value(), s[1].value(), s[2].value()};
}

inline FrameVectorField grad(const ScalarField& f) {
  const Grid& g = f.grid();
  FrameVectorField out{f.grid_ptr(), std::vector<FrameVec>(g.size())};
  std::vector<double> d1(g.size()), d2(g.size());
  g.diff_phi(f.values(), d1, d2);
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = {d1[i], 0.0};
    return out;
  }
  std::vector<double> t1(g.size()), t2(g.size());
  g.diff_theta(f.values(), t1, t2);
  for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = {t1[i], d1[i] / std::sin(g.theta(i))};
  return out;
}

/// Covariant Hessian in the frame (e_theta, e_phi / sin theta).
inline FrameMatrixField hess(const ScalarField& f) {
  const Grid& g = f.grid();
  const Partials d = partials(f);
  FrameMatrixField out{f.grid_ptr(), std::vector<Sym2>(g.size())};
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) out.m[i] = {d.f_pp[i], 0.0, 0.0};
    return out;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = std::sin(g.theta(i));
    const double cot = std::cos(g.theta(i)) / s;
    out.m[i] = {d.f_tt[i], (d.f_tp[i] - cot * d.f_p[i]) / s, d.f_pp[i] / (s * s) + cot * d.f_t[i]};
  }
  return out;
}

inline ScalarField laplacian(const ScalarField& f) {
  const auto h = hess(f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.m[i].trace(f.grid().dim());
  return ScalarField(f.grid_ptr(), std::move(out));
}

/// Ambient gradient vectors (tangent to the sphere) per node.
inline std::vector<Vec3> ambient(const FrameVectorField& v) {
  std::vector<Vec3> out(v.v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v.grid->to_ambient(i, v.v[i]);
  return out;
}

inline double frame_dot(int n, const FrameVec& a, const FrameVec& b) {
  return n == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1];
}

}  // namespace isoflow
