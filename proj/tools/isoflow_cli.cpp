// isoflow: verify inequalities, run soliton flows, and study grid refinement.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "isoflow/isoflow.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw isoflow::Error("cannot write '" + path + "'");
  out << text;
}

void add_common(CLI::App* cmd, isoflow::RunConfig& cfg, std::string& out_path) {
  cmd->add_option("--body", cfg.body, "Body spec: JSON file or inline JSON")->required();
  cmd->add_option("--grid", cfg.grid, "Resolution WxH (S^2) or N (S^1)");
  cmd->add_option("--scheme", cfg.scheme, "Differentiation scheme: fd4 or spectral");
  cmd->add_option("--tol", cfg.tol, "Tolerance");
  cmd->add_option("--seed", cfg.seed, "Seed for test functions and matrices");
  cmd->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", out_path, "Report path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Support-function geometry: inequality checks and soliton flows"};
  app.require_subcommand(1);
  isoflow::RunConfig cfg;
  std::string out_path, trace_path, final_path;

  auto* verify = app.add_subcommand("verify", "Run inequality and identity checks on a body");
  add_common(verify, cfg, out_path);
  verify->add_option("--suite", cfg.suite, "all or comma-separated check names");
  verify->add_option("--random-f", cfg.random_f, "Extra seeded random test functions");
  verify->add_option("--p", cfg.p, "Exponent for p_chain");

  auto* flow = app.add_subcommand("flow", "Run a soliton flow and certify the limit");
  add_common(flow, cfg, out_path);
  flow->add_option("--problem", cfg.problem, "Problem string, e.g. gauss_power:alpha=1")->required();
  flow->add_option("--max-steps", cfg.max_steps, "Step limit");
  flow->add_option("--trace", trace_path, "Trace CSV path");
  flow->add_option("--final", final_path, "Final body JSON path (default <out>.final.json)");

  auto* refine = app.add_subcommand("refine-study", "Observed convergence order over a resolution ladder");
  add_common(refine, cfg, out_path);
  refine->add_option("--suite", cfg.suite, "Quantity: xi_identity, euler, minkowski, p_chain, affine_identity, "
                                           "saroglou_sign, ibp, main_lemma, poincare, spectral_gap, af_local");
  refine->add_option("--p", cfg.p, "Exponent for p_chain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : isoflow::kExitParse;
  }

  isoflow::CommandOutput result;
  try {
    if (verify->parsed())
      result = isoflow::cmd_verify(cfg);
    else if (flow->parsed())
      result = isoflow::cmd_flow(cfg);
    else
      result = isoflow::cmd_refine_study(cfg);
  } catch (const isoflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return isoflow::kExitParse;
  }

  try {
    write_text(out_path, result.report);
    if (flow->parsed()) {
      if (!trace_path.empty()) write_text(trace_path, result.trace);
      if (final_path.empty() && !out_path.empty() && out_path != "-") final_path = out_path + ".final.json";
      if (!final_path.empty()) write_text(final_path, result.final_body);
    }
  } catch (const isoflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return isoflow::kExitParse;
  }
  return result.exit_code;
}
