// Batch commands behind the command-line front end: verify, flow and
// refine-study. Each returns its outputs as strings so callers decide where
// they go; nothing here depends on wall-clock time.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isoflow/body_io.hpp"
#include "isoflow/soliton_flow.hpp"

namespace isoflow {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitParse = 2, kExitNoConvergence = 3, kExitStepCollapse = 4 };

struct RunConfig {
  std::string body;     ///< path or inline JSON
  std::string grid;     ///< "WxH" or "N"; comma-separated ladder for refine-study; empty = reference
  std::string scheme;   ///< fd4 | spectral; empty = command default
  std::string suite = "all";
  std::string problem;
  double tol = 0.0;     ///< 0 = command default
  int max_steps = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  int random_f = 0;     ///< extra seeded test functions for verify
  double p = 0.0;       ///< exponent for p_chain in verify
};

struct CommandOutput {
  int exit_code = kExitOk;
  std::string report;      ///< JSON (verify, flow) or CSV (refine-study)
  std::string trace;       ///< flow trace CSV
  std::string final_body;  ///< flow final samples JSON
};

inline std::string reference_grid_string(int n) { return n == 1 ? "256" : "64x128"; }

inline GridPtr build_grid(int n, const std::string& grid, DiffScheme scheme) {
  Resolution r = parse_resolution(grid.empty() ? reference_grid_string(n) : grid);
  if (n == 2 && r.n_theta == 0) throw ParseError("S^2 grid needs WxH");
  if (n == 1 && r.n_theta != 0) throw ParseError("S^1 grid needs a single count N");
  try {
    return Grid::build(n, r, scheme);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

namespace detail {

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"af_local",   "spectral_gap", "main_lemma",    "affine_identity", "poincare",
                                                 "xi_identity", "p_chain",      "saroglou_sign", "uniqueness_chain"};
  return names;
}

inline std::vector<std::string> parse_suite(const std::string& suite) {
  if (suite == "all") return check_names();
  std::vector<std::string> out;
  std::stringstream ss(suite);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::find(check_names().begin(), check_names().end(), item) == check_names().end())
      throw ParseError("unknown check '" + item + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ParseError("empty suite");
  return out;
}

/// Seeded test functions: a linear function, a product, a degree-two
/// harmonic, then `extra` random harmonic combinations.
inline std::vector<ScalarField> test_functions(const GridPtr& grid, std::uint64_t seed, int extra) {
  const int n = grid->dim();
  std::vector<ScalarField> out;
  out.push_back(ScalarField::sample(grid, [](const Vec3& x) { return x[0]; }));
  out.push_back(ScalarField::sample(grid, [](const Vec3& x) { return x[0] * x[1]; }));
  out.push_back(ScalarField::sample(grid, [n](const Vec3& x) { return 1.0 + real_harmonic(n, 2, n == 2 ? 1 : 0, x); }));
  for (int i = 0; i < extra; ++i) {
    const auto terms = random_terms(n, seed * 1000003ULL + static_cast<std::uint64_t>(i) + 1, 4, false);
    out.push_back(ScalarField::sample(grid, [&](const Vec3& x) { return harmonic_sum(n, terms, x); }));
  }
  return out;
}

inline Eigen::Matrix3d seeded_matrix(std::uint64_t seed) {
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::Matrix3d M;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) M(a, b) = symmetric_unit(gen);
  return M;
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Runs the selected checks on the body. Exit 0 iff every report passes.
inline CommandOutput cmd_verify(const RunConfig& cfg) {
  set_num_threads(cfg.threads);
  const BodySpec spec = load_body_spec(cfg.body);
  const auto checks = detail::parse_suite(cfg.suite);
  const DiffScheme scheme = cfg.scheme.empty() ? DiffScheme::Spectral : parse_scheme(cfg.scheme);
  const auto grid = build_grid(spec.n, cfg.grid, scheme);
  SuiteConfig suite_cfg = SuiteConfig::from_environment();
  if (cfg.tol > 0.0) suite_cfg.tol_grid = cfg.tol;
  if (cfg.tol < 0.0) throw ParseError("tolerance must be positive");
  if (cfg.random_f < 0) throw ParseError("random-f count must be non-negative");

  const ScalarField h = realize_body(spec, grid);
  const auto g = assemble(h);
  const int n = g.n;
  const auto fs = detail::test_functions(grid, cfg.seed, cfg.random_f);
  std::vector<SlackReport> reports;
  std::optional<ConstantsTable> constants;
  for (const auto& name : checks) {
    if (name == "af_local" || name == "spectral_gap") {
      if (name == "spectral_gap" && !constants) constants = calibrate_constants(grid);
      for (std::size_t i = 0; i < fs.size(); ++i)
        for (int k = 1; k <= n; ++k) {
          auto r = name == "af_local" ? af_local(g, fs[i], k, suite_cfg) : spectral_gap(g, fs[i], k, *constants, suite_cfg);
          r.extra["test_function"] = static_cast<double>(i);
          reports.push_back(r);
        }
    } else if (name == "main_lemma") {
      for (int k = 1; k <= n; ++k) reports.push_back(main_lemma(g, k, suite_cfg));
    } else if (name == "affine_identity") {
      reports.push_back(affine_identity(g, suite_cfg));
    } else if (name == "poincare") {
      reports.push_back(poincare(h, suite_cfg));
      for (const auto& f : fs) reports.push_back(poincare(f, suite_cfg));
    } else if (name == "xi_identity") {
      reports.push_back(xi_identity(g, detail::seeded_matrix(cfg.seed), suite_cfg));
    } else if (name == "p_chain") {
      reports.push_back(p_chain(g, cfg.p, suite_cfg));
    } else if (name == "saroglou_sign") {
      reports.push_back(saroglou_sign(g, nullptr, suite_cfg));
    } else if (name == "uniqueness_chain") {
      for (auto& r : uniqueness_chain(g, suite_cfg)) reports.push_back(r);
    }
  }
  bool ok = true;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    ok = ok && r.passed();
    list.push_back(to_json(r));
  }
  nlohmann::ordered_json j;
  j["command"] = "verify";
  j["body"] = to_json(spec);
  j["body_hash"] = body_hash(h);
  j["grid"] = grid->describe();
  j["scheme"] = to_string(scheme);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["tol"] = suite_cfg.tol_grid;
  j["reports"] = list;
  j["summary"] = summarize(reports);
  j["passed"] = ok;
  return {ok ? kExitOk : kExitCheckFailed, detail::dump(j), {}, {}};
}

/// Runs the flow and certifies the limit. Exit 0 iff converged and certified.
inline CommandOutput cmd_flow(const RunConfig& cfg) {
  set_num_threads(cfg.threads);
  if (cfg.problem.empty()) throw ParseError("flow needs --problem");
  const ProblemSpec prob = parse_problem(cfg.problem);
  const BodySpec spec = load_body_spec(cfg.body);
  const DiffScheme scheme = cfg.scheme.empty() ? DiffScheme::Spectral : parse_scheme(cfg.scheme);
  const auto grid = build_grid(spec.n, cfg.grid, scheme);
  if (prob.family == ProblemSpec::Family::SigmaK && prob.k > spec.n) throw ParseError("sigma_k order exceeds n");
  if (cfg.tol < 0.0 || cfg.max_steps < 0) throw ParseError("tolerance and max steps must be positive");
  FlowConfig flow_cfg;
  if (cfg.tol > 0.0) flow_cfg.tol = cfg.tol;
  flow_cfg.max_steps = cfg.max_steps;
  const SuiteConfig suite_cfg = SuiteConfig::from_environment();

  const ScalarField h0 = realize_body(spec, grid);
  nlohmann::ordered_json j;
  j["command"] = "flow";
  j["problem"] = prob.describe();
  const std::string note = prob.hypothesis_note(spec.n);
  j["within_hypotheses"] = note.empty();
  if (!note.empty()) j["hypothesis_note"] = note;
  j["body"] = to_json(spec);
  j["body_hash"] = body_hash(h0);
  j["grid"] = grid->describe();
  j["scheme"] = to_string(scheme);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["tol"] = flow_cfg.tol;
  j["max_steps"] = flow_cfg.max_steps;

  CommandOutput out;
  auto finish = [&](const char* status, const FlowTrace& trace, const ScalarField& h_final) {
    const auto& last = trace.rows.back();
    j["status"] = status;
    j["steps"] = last.step;
    j["t"] = last.t;
    j["residual_inf"] = last.residual_inf;
    j["sphere_dist"] = last.sphere_dist;
    j["ellipsoid_dist"] = last.ellipsoid_dist;
    j["volume"] = last.volume;
    j["final_hash"] = body_hash(h_final);
    out.trace = trace.csv();
    out.final_body = detail::dump(samples_json(h_final));
  };
  try {
    const auto result = run(h0, prob, flow_cfg);
    finish("converged", result.trace, result.state.h);
    bool ok = true;
    nlohmann::ordered_json cert = nlohmann::ordered_json::array();
    for (const auto& r : certify(result.geometry, prob, suite_cfg)) {
      ok = ok && r.passed();
      cert.push_back(to_json(r));
    }
    j["certification"] = cert;
    j["passed"] = ok;
    out.exit_code = ok ? kExitOk : kExitCheckFailed;
  } catch (const NoConvergence& e) {
    finish("no_convergence", e.trace(), e.last_state().h);
    j["passed"] = false;
    out.exit_code = kExitNoConvergence;
  } catch (const StepCollapse& e) {
    finish("step_collapse", e.trace(), e.state().h);
    j["passed"] = false;
    out.exit_code = kExitStepCollapse;
  }
  out.report = detail::dump(j);
  return out;
}

struct RefinementRung {
  std::string resolution;
  double value = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
};

/// Value of a refinement quantity on one grid. Inequality checks report
/// |slack| (meaningful on equality cases), identities their residual.
inline double refinement_quantity(const std::string& check, const BodySpec& spec, const GridPtr& grid, std::uint64_t seed,
                                  double p) {
  const ScalarField h = realize_body(spec, grid);
  const auto g = assemble(h);
  const int n = g.n;
  if (check == "euler") return pointwise_identity_report(g).max_algebraic();
  if (check == "minkowski") {
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) worst = std::max(worst, norm(minkowski_vector(g, k)));
    return worst;
  }
  if (check == "xi_identity") return xi_identity(g, detail::seeded_matrix(seed)).residual;
  if (check == "p_chain") return p_chain(g, p).residual;
  if (check == "affine_identity") return affine_identity(g).residual;
  if (check == "saroglou_sign") return saroglou_sign(g, nullptr).residual;
  if (check == "ibp") {
    // int <grad h, grad sigma_n> + int h Lap sigma_n = 0
    const auto gh = grad(h);
    const auto gs = grad(g.sigma[n - 1]);
    const auto lap = laplacian(g.sigma[n - 1]);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = frame_dot(n, gh.v[i], gs.v[i]);
      b[i] = h[i] * lap[i];
    }
    const double ia = integrate(ScalarField(g.grid_ptr(), std::move(a)));
    const double ib = integrate(ScalarField(g.grid_ptr(), std::move(b)));
    return std::abs(ia + ib) / std::max({std::abs(ia), std::abs(ib), 1.0});
  }
  if (check == "main_lemma") {
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(main_lemma(g, k).slack));
    return worst;
  }
  if (check == "poincare") return std::abs(poincare(h).slack);
  if (check == "spectral_gap") {
    const auto constants = calibrate_constants(grid);
    double worst = 0.0;
    for (int a = 0; a <= n; ++a) {
      const auto f = h.map([a](double v, const Vec3& x) { return x[a] / v; });
      for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(spectral_gap(g, f, k, constants).slack));
    }
    return worst;
  }
  if (check == "af_local") {
    double worst = 0.0;
    for (int a = 0; a <= n; ++a) {
      const auto f = h.map([a](double v, const Vec3& x) { return x[a] / v + 0.5; });
      for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(af_local(g, f, k).slack));
    }
    return worst;
  }
  throw ParseError("unknown refinement check '" + check + "'");
}

inline std::vector<RefinementRung> refine_study(const std::string& check, const BodySpec& spec,
                                                const std::vector<std::string>& ladder, DiffScheme scheme,
                                                std::uint64_t seed = 0, double p = 0.0) {
  std::vector<RefinementRung> rungs;
  int previous_np = 0;
  for (const auto& res : ladder) {
    const auto grid = build_grid(spec.n, res, scheme);
    RefinementRung rung{grid->describe(), refinement_quantity(check, spec, grid, seed, p)};
    const int np = grid->resolution().n_phi;
    if (!rungs.empty() && rung.value > 0.0 && rungs.back().value > 0.0)
      rung.order = std::log(rungs.back().value / rung.value) / std::log(static_cast<double>(np) / previous_np);
    previous_np = np;
    rungs.push_back(rung);
  }
  return rungs;
}

/// Residuals below this are roundoff; the order test is skipped.
inline constexpr double kExactFloor = 1e-12;

/// Refinement table; exit 0 iff the final observed order is at least 3 or
/// every rung sits at roundoff.
inline CommandOutput cmd_refine_study(const RunConfig& cfg) {
  set_num_threads(cfg.threads);
  const BodySpec spec = load_body_spec(cfg.body);
  const DiffScheme scheme = cfg.scheme.empty() ? DiffScheme::FiniteDifference4 : parse_scheme(cfg.scheme);
  std::vector<std::string> ladder;
  {
    std::stringstream ss(cfg.grid.empty() ? (spec.n == 1 ? "64,128,256" : "32x64,64x128,128x256") : cfg.grid);
    std::string item;
    while (std::getline(ss, item, ',')) ladder.push_back(item);
  }
  if (ladder.size() < 2) throw ParseError("refine-study needs at least two resolutions");
  const std::string check = cfg.suite == "all" ? "xi_identity" : cfg.suite;
  const auto rungs = refine_study(check, spec, ladder, scheme, cfg.seed, cfg.p);
  bool exact = true;
  for (const auto& r : rungs) exact = exact && r.value <= kExactFloor;
  std::ostringstream os;
  os.precision(17);
  os << "resolution,residual,observed_order\n";
  for (const auto& r : rungs) {
    os << r.resolution << ',' << r.value << ',';
    if (!std::isnan(r.order)) os << r.order;
    os << '\n';
  }
  if (exact) os << "# exact: all residuals at roundoff, order test skipped\n";
  const bool ok = exact || (!std::isnan(rungs.back().order) && rungs.back().order >= 3.0);
  return {ok ? kExitOk : kExitCheckFailed, os.str(), {}, {}};
}

}  // namespace isoflow
