#include <gtest/gtest.h>

#include "isoflow/commands.hpp"

using namespace isoflow;

namespace {

RunConfig config(const std::string& body, const std::string& grid = "32x64") {
  RunConfig c;
  c.body = body;
  c.grid = grid;
  return c;
}

const char* kBall = R"({"kind":"ball"})";
const char* kSeed7 = R"({"kind":"random","seed":7,"eps":0.2,"lmax":4})";

}  // namespace

TEST(Verify, BallPassesEverything) {
  const auto out = cmd_verify(config(kBall));
  EXPECT_EQ(out.exit_code, kExitOk);
  const auto j = nlohmann::json::parse(out.report);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_GT(j["reports"].size(), 20u);
  EXPECT_TRUE(j["summary"].contains("main_lemma"));
}

TEST(Verify, RandomBodySelectedChecks) {
  auto c = config(kSeed7);
  c.suite = "main_lemma,af_local,spectral_gap,xi_identity";
  c.random_f = 3;
  const auto out = cmd_verify(c);
  EXPECT_EQ(out.exit_code, kExitOk) << out.report;
  const auto j = nlohmann::json::parse(out.report);
  // 6 test functions x 2 orders for each of af_local and spectral_gap, 2 main_lemma, 1 xi
  EXPECT_EQ(j["reports"].size(), 27u);
}

TEST(Verify, OutputIsDeterministic) {
  auto c = config(kSeed7);
  c.suite = "main_lemma,poincare";
  const auto a = cmd_verify(c).report;
  c.threads = 3;
  const auto b = cmd_verify(c).report;
  // the threads field differs, nothing else
  const auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
  EXPECT_EQ(ja["reports"], jb["reports"]);
  c.threads = 1;
  EXPECT_EQ(cmd_verify(c).report, a);
}

TEST(Verify, ParseErrors) {
  EXPECT_THROW(cmd_verify(config(R"({"kind":)")), ParseError);
  auto c = config(kBall);
  c.suite = "nonsense";
  EXPECT_THROW(cmd_verify(c), ParseError);
  EXPECT_THROW(cmd_verify(config(kBall, "12x")), ParseError);
}

TEST(Flow, ConvergesAndCertifies) {
  auto c = config(kSeed7);
  c.problem = "gauss_power:alpha=1";
  const auto out = cmd_flow(c);
  EXPECT_EQ(out.exit_code, kExitOk) << out.report;
  const auto j = nlohmann::json::parse(out.report);
  EXPECT_EQ(j["status"], "converged");
  EXPECT_TRUE(j["within_hypotheses"].get<bool>());
  EXPECT_LT(j["residual_inf"].get<double>(), 1e-8);
  EXPECT_EQ(out.trace.substr(0, 5), "step,");
  const auto final_body = load_body_spec(out.final_body);
  EXPECT_EQ(final_body.kind, BodySpec::Kind::Samples);
  EXPECT_EQ(final_body.samples.size(), 32u * 64u);
}

TEST(Flow, ExitCodes) {
  auto c = config(kSeed7);
  c.problem = "gauss_power:alpha=1";
  c.max_steps = 3;
  const auto out = cmd_flow(c);
  EXPECT_EQ(out.exit_code, kExitNoConvergence);
  EXPECT_EQ(nlohmann::json::parse(out.report)["status"], "no_convergence");
  c.problem = "lp:p=5";
  EXPECT_THROW(cmd_flow(c), ParseError);
  c.problem = "sigma_k:k=3";
  EXPECT_THROW(cmd_flow(c), ParseError);
  c.problem.clear();
  EXPECT_THROW(cmd_flow(c), ParseError);
}

TEST(Flow, OutsideHypothesesIsFlagged) {
  auto c = config(kBall);
  c.problem = "lp:p=-5";
  const auto out = cmd_flow(c);
  const auto j = nlohmann::json::parse(out.report);
  EXPECT_FALSE(j["within_hypotheses"].get<bool>());
  EXPECT_TRUE(j.contains("hypothesis_note"));
}

TEST(RefineStudy, OrdersAndExactCases) {
  auto c = config(kSeed7, "16x32,32x64,64x128");
  c.suite = "xi_identity";
  const auto out = cmd_refine_study(c);
  EXPECT_EQ(out.exit_code, kExitOk) << out.report;
  EXPECT_EQ(out.report.substr(0, out.report.find('\n')), "resolution,residual,observed_order");

  auto e = config(kBall, "16x32,32x64");
  e.suite = "euler";
  const auto exact = cmd_refine_study(e);
  EXPECT_EQ(exact.exit_code, kExitOk);
  EXPECT_NE(exact.report.find("# exact"), std::string::npos);

  e.suite = "bogus";
  EXPECT_THROW(cmd_refine_study(e), ParseError);
  e.grid = "32x64";
  e.suite = "euler";
  EXPECT_THROW(cmd_refine_study(e), ParseError);
}

TEST(RefineStudy, LadderValues) {
  const auto spec = load_body_spec(kSeed7);
  const auto rungs = refine_study("affine_identity", spec, {"16x32", "32x64", "64x128"}, DiffScheme::FiniteDifference4);
  ASSERT_EQ(rungs.size(), 3u);
  EXPECT_TRUE(std::isnan(rungs[0].order));
  EXPECT_GT(rungs[2].order, 3.0);
}
