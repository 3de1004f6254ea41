// Analytic and seeded-random support functions with known geometry.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "isoflow/sphere_grid.hpp"

namespace isoflow {

/// One term c * Y_lm. On S^1, Y_l0 = cos(l phi) and Y_l,-1 = sin(l phi); on
/// S^2, real orthonormal spherical harmonics (m < 0 uses sin(|m| phi)).
struct HarmonicTerm {
  int l = 0;
  int m = 0;
  double c = 0.0;
};

inline constexpr int kMaxHarmonicDegree = 12;

/// Real spherical harmonic (S^2) or Fourier mode (S^1) evaluated at unit x.
inline double real_harmonic(int n, int l, int m, const Vec3& x) {
  if (l < 0 || l > kMaxHarmonicDegree) throw Error("harmonic degree out of range");
  const double phi = std::atan2(x[1], x[0]);
  if (n == 1) {
    if (m != 0 && m != -1) throw Error("circle harmonics use m = 0 (cos) or m = -1 (sin)");
    return m == 0 ? std::cos(l * phi) : std::sin(l * phi);
  }
  const int am = std::abs(m);
  if (am > l) throw Error("harmonic order |m| exceeds degree");
  const double t = x[2];
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  double pmm = 1.0;
  for (int i = 1; i <= am; ++i) pmm *= (2.0 * i - 1.0) * s;
  double p = pmm;
  if (l > am) {
    double p_prev = pmm;
    double p_cur = t * (2.0 * am + 1.0) * pmm;
    for (int ll = am + 2; ll <= l; ++ll) {
      const double next = ((2.0 * ll - 1.0) * t * p_cur - (ll + am - 1.0) * p_prev) / (ll - am);
      p_prev = p_cur;
      p_cur = next;
    }
    p = p_cur;
  }
  double ratio = 1.0;  // (l-m)!/(l+m)!
  for (int i = l - am + 1; i <= l + am; ++i) ratio /= i;
  const double norm_factor = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
  if (m == 0) return norm_factor * p;
  const double trig = m > 0 ? std::cos(am * phi) : std::sin(am * phi);
  return std::numbers::sqrt2 * norm_factor * p * trig;
}

inline double harmonic_sum(int n, const std::vector<HarmonicTerm>& terms, const Vec3& x) {
  double s = 0.0;
  for (const auto& term : terms) s += term.c * real_harmonic(n, term.l, term.m, x);
  return s;
}

/// Seeded multiplicative perturbation h <- h * (1 + eps * p / sup|p|).
struct RandomPerturbation {
  std::uint64_t seed = 0;
  double eps = 0.0;
  int lmax = 4;
  bool symmetric = false;  ///< even degrees only (origin-symmetric bodies)
};

struct BodySpec {
  enum class Kind { Ball, ShiftedBall, Ellipsoid, Harmonic, Random, Samples };

  int n = 2;
  Kind kind = Kind::Ball;
  double r = 1.0;                    ///< ball / shifted_ball radius
  Vec3 v{0.0, 0.0, 0.0};             ///< shifted_ball translation
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();  ///< ellipsoid, top-left (n+1)x(n+1) used
  double base = 1.0;                 ///< harmonic base radius
  std::vector<HarmonicTerm> coeffs;  ///< harmonic terms (additive)
  RandomPerturbation random;         ///< Random kind, or perturbation of the other kinds when eps > 0
  bool recenter = false;             ///< translate so the centroid sits at the origin
  // Samples kind: node values on a fixed grid.
  std::vector<double> samples;
  Resolution sample_resolution;
  DiffScheme sample_scheme = DiffScheme::FiniteDifference4;
};

inline std::string kind_name(BodySpec::Kind k) {
  switch (k) {
    case BodySpec::Kind::Ball: return "ball";
    case BodySpec::Kind::ShiftedBall: return "shifted_ball";
    case BodySpec::Kind::Ellipsoid: return "ellipsoid";
    case BodySpec::Kind::Harmonic: return "harmonic";
    case BodySpec::Kind::Random: return "random";
    case BodySpec::Kind::Samples: return "samples";
  }
  return "unknown";
}

/// A[h] = hess h + h g per node.
inline FrameMatrixField spherical_hessian(const ScalarField& h) {
  FrameMatrixField a = hess(h);
  for (std::size_t i = 0; i < h.size(); ++i) {
    a.m[i].a11 += h[i];
    a.m[i].a22 += h[i];
  }
  return a;
}

/// Smallest eigenvalue of A[h] over all nodes, with the node attaining it.
inline std::pair<double, std::size_t> convexity_margin_at(const ScalarField& h) {
  const auto a = spherical_hessian(h);
  const int n = h.grid().dim();
  double best = std::numeric_limits<double>::infinity();
  std::size_t where = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lo = a.m[i].eigenvalues(n)[0];
    if (lo < best) {
      best = lo;
      where = i;
    }
  }
  return {best, where};
}

inline double convexity_margin(const ScalarField& h) { return convexity_margin_at(h).first; }

/// Throws NonPositiveError / NonConvexError unless h > 0 and A[h] > 0.
inline void validate_convex(const ScalarField& h) {
  if (h.min() <= 0.0) throw NonPositiveError(h.min());
  const auto [margin, node] = convexity_margin_at(h);
  if (!(margin > 0.0)) throw NonConvexError(node, margin);
}

namespace detail {

/// Uniform double in [-1, 1) from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double symmetric_unit(std::mt19937_64& gen) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline GridPtr reference_grid(int n) {
  return n == 1 ? Grid::build(1, {0, 256}, DiffScheme::Spectral) : Grid::build(2, {48, 96}, DiffScheme::Spectral);
}

inline std::vector<HarmonicTerm> random_terms(int n, std::uint64_t seed, int lmax, bool symmetric) {
  if (lmax < 1 || lmax > kMaxHarmonicDegree) throw Error("lmax out of range");
  std::mt19937_64 gen(seed);
  std::vector<HarmonicTerm> terms;
  for (int l = symmetric ? 2 : 1; l <= lmax; l += symmetric ? 2 : 1) {
    if (n == 1) {
      terms.push_back({l, 0, symmetric_unit(gen)});
      terms.push_back({l, -1, symmetric_unit(gen)});
    } else {
      for (int m = -l; m <= l; ++m) terms.push_back({l, m, symmetric_unit(gen)});
    }
  }
  // unit sup-norm over the reference sampling
  const auto ref = reference_grid(n);
  double sup = 0.0;
  for (const auto& x : ref->nodes()) sup = std::max(sup, std::abs(harmonic_sum(n, terms, x)));
  if (sup > 0.0)
    for (auto& t : terms) t.c /= sup;
  return terms;
}

inline double ellipsoid_support(const Eigen::Matrix3d& M, int n, const Vec3& x) {
  double q = 0.0;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) q += x[a] * M(a, b) * x[b];
  return std::sqrt(q);
}

inline double base_support(const BodySpec& spec, const Vec3& x) {
  switch (spec.kind) {
    case BodySpec::Kind::Ball: return spec.r;
    case BodySpec::Kind::ShiftedBall: return spec.r + dot(x, spec.v);
    case BodySpec::Kind::Ellipsoid: return ellipsoid_support(spec.M, spec.n, x);
    case BodySpec::Kind::Harmonic: return spec.base + harmonic_sum(spec.n, spec.coeffs, x);
    default: break;
  }
  throw Error("base_support: kind has no closed form");
}

inline void check_parameters(const BodySpec& spec) {
  if (spec.n != 1 && spec.n != 2) throw Error("unsupported dimension n = " + std::to_string(spec.n));
  switch (spec.kind) {
    case BodySpec::Kind::Ball:
      if (!(spec.r > 0.0)) throw Error("ball radius must be positive");
      break;
    case BodySpec::Kind::ShiftedBall:
      if (!(spec.r > 0.0)) throw Error("ball radius must be positive");
      if (!(norm(spec.v) < spec.r)) throw Error("shift must satisfy |v| < r");
      if (spec.n == 1 && spec.v[2] != 0.0) throw Error("shift has a third component on S^1");
      break;
    case BodySpec::Kind::Ellipsoid: {
      const int d = spec.n + 1;
      const Eigen::MatrixXd m = spec.M.topLeftCorner(d, d);
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw Error("ellipsoid matrix is not symmetric");
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) throw Error("ellipsoid matrix is not positive-definite");
      break;
    }
    case BodySpec::Kind::Harmonic:
      if (!(spec.base > 0.0)) throw Error("harmonic base radius must be positive");
      for (const auto& t : spec.coeffs) real_harmonic(spec.n, t.l, t.m, Vec3{1.0, 0.0, 0.0});
      break;
    case BodySpec::Kind::Random:
      if (spec.random.eps < 0.0) throw Error("random amplitude must be non-negative");
      break;
    case BodySpec::Kind::Samples:
      break;
  }
}

}  // namespace detail

/// Replaces a Random spec (or a spec with a random perturbation) by the
/// closed-form spec it denotes. Amplitude halves until the convexity margin
/// on the reference grid reaches min(0.1, base margin / 2).
inline BodySpec resolve_random(const BodySpec& spec) {
  detail::check_parameters(spec);
  BodySpec out = spec;
  const bool is_random = spec.kind == BodySpec::Kind::Random;
  if (!is_random && !(spec.random.eps > 0.0)) return out;
  if (spec.kind == BodySpec::Kind::Samples) throw Error("cannot perturb a sampled body");
  const auto terms = detail::random_terms(spec.n, spec.random.seed, spec.random.lmax, spec.random.symmetric);
  const auto ref = detail::reference_grid(spec.n);
  BodySpec base = spec;
  if (is_random) {
    base.kind = BodySpec::Kind::Ball;
    base.r = 1.0;
  }
  base.random.eps = 0.0;
  const auto base_h = ScalarField::sample(ref, [&](const Vec3& x) { return detail::base_support(base, x); });
  const double threshold = std::min(0.1, 0.5 * convexity_margin(base_h));
  const auto pert = ScalarField::sample(ref, [&](const Vec3& x) { return harmonic_sum(spec.n, terms, x); });
  double eps = spec.random.eps;
  for (int attempt = 0; attempt < 200 && eps > 0.0; ++attempt) {
    const auto h = base_h * (eps * pert + 1.0);
    if (h.min() > 0.0 && convexity_margin(h) >= threshold) break;
    eps *= 0.5;
  }
  if (is_random) {
    out.kind = BodySpec::Kind::Harmonic;
    out.base = 1.0;
    out.coeffs.clear();
    for (auto t : terms) {
      t.c *= eps;
      out.coeffs.push_back(t);
    }
    out.random.eps = 0.0;
  } else {
    out.random.eps = eps;
    out.coeffs = terms;  // unit-normalised perturbation pattern
  }
  return out;
}

/// Samples the support function of a resolved spec and validates convexity.
inline ScalarField make_body(const BodySpec& spec_in, const GridPtr& grid) {
  const BodySpec spec = resolve_random(spec_in);
  if (grid->dim() != spec.n) throw Error("body dimension does not match grid");
  ScalarField h;
  if (spec.kind == BodySpec::Kind::Samples) {
    if (!(spec.sample_resolution == grid->resolution()) || spec.sample_scheme != grid->scheme())
      throw Error("sampled body does not match grid " + grid->describe());
    h = ScalarField(grid, spec.samples);
  } else if (spec.random.eps > 0.0) {
    BodySpec base = spec;
    base.coeffs.clear();
    h = ScalarField::sample(grid, [&](const Vec3& x) {
      return detail::base_support(base, x) * (1.0 + spec.random.eps * harmonic_sum(spec.n, spec.coeffs, x));
    });
  } else {
    h = ScalarField::sample(grid, [&](const Vec3& x) { return detail::base_support(spec, x); });
  }
  validate_convex(h);
  return h;
}

/// h = 1 + eps * (seeded harmonic combination of degrees 1..lmax, unit sup-norm),
/// amplitude halved until the convexity margin is at least 0.1.
inline ScalarField make_random(std::uint64_t seed, int n, const GridPtr& grid, double eps, int lmax,
                               bool symmetric = false) {
  BodySpec spec;
  spec.n = n;
  spec.kind = BodySpec::Kind::Random;
  spec.random = {seed, eps, lmax, symmetric};
  return make_body(spec, grid);
}

inline BodySpec ball_spec(int n, double r = 1.0) {
  BodySpec s;
  s.n = n;
  s.kind = BodySpec::Kind::Ball;
  s.r = r;
  return s;
}

inline BodySpec shifted_ball_spec(int n, double r, const Vec3& v) {
  BodySpec s = ball_spec(n, r);
  s.kind = BodySpec::Kind::ShiftedBall;
  s.v = v;
  return s;
}

inline BodySpec ellipsoid_spec(int n, const Eigen::Matrix3d& M) {
  BodySpec s;
  s.n = n;
  s.kind = BodySpec::Kind::Ellipsoid;
  s.M = M;
  return s;
}

inline BodySpec random_spec(int n, std::uint64_t seed, double eps, int lmax, bool symmetric = false) {
  BodySpec s;
  s.n = n;
  s.kind = BodySpec::Kind::Random;
  s.random = {seed, eps, lmax, symmetric};
  return s;
}

}  // namespace isoflow
