#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "isoflow/body_io.hpp"

using namespace isoflow;

TEST(BodyIo, ParsesEveryKind) {
  const auto ball = load_body_spec(R"({"kind":"ball","r":1.5})");
  EXPECT_EQ(ball.kind, BodySpec::Kind::Ball);
  EXPECT_EQ(ball.n, 2);
  EXPECT_DOUBLE_EQ(ball.r, 1.5);

  const auto sb = load_body_spec(R"({"n":1,"kind":"shifted_ball","v":[0.2,-0.1]})");
  EXPECT_EQ(sb.n, 1);
  EXPECT_DOUBLE_EQ(sb.v[1], -0.1);

  const auto e = load_body_spec(R"({"kind":"ellipsoid","M":[[4,0,0],[0,1,0],[0,0,1]]})");
  EXPECT_DOUBLE_EQ(e.M(0, 0), 4.0);

  const auto hm = load_body_spec(R"({"kind":"harmonic","base":1.0,"coeffs":[{"l":2,"m":1,"c":0.05}]})");
  ASSERT_EQ(hm.coeffs.size(), 1u);
  EXPECT_EQ(hm.coeffs[0].m, 1);

  const auto r = load_body_spec(R"({"kind":"random","seed":7,"eps":0.2,"lmax":4})");
  EXPECT_EQ(r.random.seed, 7u);
  EXPECT_FALSE(r.random.symmetric);

  const auto p = load_body_spec(R"({"kind":"ball","perturb":{"seed":3,"eps":0.1},"recenter":true})");
  EXPECT_DOUBLE_EQ(p.random.eps, 0.1);
  EXPECT_TRUE(p.recenter);
}

TEST(BodyIo, RoundTripsThroughJson) {
  for (const char* text : {R"({"kind":"ball","r":1.5})", R"({"n":1,"kind":"shifted_ball","v":[0.2,-0.1]})",
                           R"({"kind":"ellipsoid","M":[[2,0.1,0],[0.1,1,0],[0,0,1]],"recenter":true})",
                           R"({"kind":"harmonic","base":1.2,"coeffs":[{"l":3,"m":-2,"c":0.01}]})",
                           R"({"kind":"random","seed":7,"eps":0.2,"lmax":4,"symmetric":true})",
                           R"({"kind":"ball","perturb":{"seed":3,"eps":0.1,"lmax":3,"symmetric":false}})"}) {
    const auto spec = load_body_spec(text);
    const auto again = body_spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
    EXPECT_EQ(to_json(again).dump(), to_json(spec).dump()) << text;
  }
}

TEST(BodyIo, SamplesAreLossless) {
  const auto grid = Grid::build(2, {16, 32});
  const auto h = make_random(4, 2, grid, 0.2, 4);
  const auto spec = body_spec_from_json(nlohmann::json::parse(samples_json(h).dump()));
  EXPECT_EQ(make_body(spec, grid).values(), h.values());
  EXPECT_THROW(make_body(spec, Grid::build(2, {16, 32}, DiffScheme::Spectral)), Error);
}

TEST(BodyIo, RecenterOption) {
  const auto grid = Grid::build(2, {32, 64});
  const auto spec = load_body_spec(R"({"kind":"shifted_ball","v":[0.2,0.1,0],"recenter":true})");
  EXPECT_LE(norm(centroid(assemble(realize_body(spec, grid)))), 1e-12);
}

TEST(BodyIo, RejectsMalformedInput) {
  for (const char* bad : {
           "{", "[]", R"({"r":1})", R"({"kind":"cube"})", R"({"kind":"ball","radius":1})", R"({"kind":"ball","r":"1"})",
           R"({"kind":"ball","r":-1})", R"({"kind":"ball","n":3})", R"({"kind":"shifted_ball","v":[0.1,0.2]})",
           R"({"kind":"ellipsoid","M":[[1,0],[0,1]]})", R"({"kind":"ellipsoid","M":[[1,0,0],[0,-1,0],[0,0,1]]})",
           R"({"kind":"harmonic","coeffs":[{"l":2}]})", R"({"kind":"harmonic","coeffs":[{"l":2,"m":5,"c":0.1}]})",
           R"({"kind":"random","seed":-1})", R"({"kind":"random","seed":1,"perturb":{"eps":0.1}})",
           R"({"kind":"samples","grid":"16x32"})", R"({"kind":"samples","grid":"x","h":[1]})",
           R"({"kind":"ball","recenter":1})", R"({"kind":"ball","perturb":{"seed":1,"amp":0.1}})"})
    EXPECT_THROW(load_body_spec(bad), ParseError) << bad;
  EXPECT_THROW(load_body_spec("/nonexistent/body.json"), ParseError);
}

TEST(BodyIo, LoadsFromFile) {
  const std::string path = testing::TempDir() + "isoflow_body.json";
  {
    std::ofstream out(path);
    out << R"({"kind":"ball","r":2})";
  }
  EXPECT_DOUBLE_EQ(load_body_spec(path).r, 2.0);
  std::remove(path.c_str());
}
