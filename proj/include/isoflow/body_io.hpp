// BodySpec JSON parsing and serialisation, and sampled-body output.
//
//   {"n":2,"kind":"ellipsoid","M":[[4,0,0],[0,1,0],[0,0,1]]}
//   {"kind":"harmonic","base":1.0,"coeffs":[{"l":2,"m":1,"c":0.05}]}
//   {"kind":"shifted_ball","r":1.0,"v":[0.2,0,0]}
//   {"kind":"random","seed":7,"eps":0.2,"lmax":4,"symmetric":false}
//   {"kind":"samples","n":2,"grid":"64x128","scheme":"fd4","h":[...]}
// Any kind but samples accepts "perturb":{"seed","eps","lmax","symmetric"}
// and "recenter":true.
#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "isoflow/integral_geometry.hpp"
#include "json.hpp"

namespace isoflow {

namespace detail {

inline void only_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in " + where);
}

inline double get_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ParseError(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

inline std::int64_t get_integer(const nlohmann::json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ParseError(std::string("'") + key + "' must be an integer");
  return j[key].get<std::int64_t>();
}

inline RandomPerturbation parse_perturbation(const nlohmann::json& j, const std::string& where) {
  only_keys(j, {"seed", "eps", "lmax", "symmetric"}, where);
  RandomPerturbation p;
  const auto seed = get_integer(j, "seed", 0);
  if (seed < 0) throw ParseError("seed must be non-negative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.eps = get_number(j, "eps", 0.0);
  p.lmax = static_cast<int>(get_integer(j, "lmax", 4));
  if (j.contains("symmetric")) {
    if (!j["symmetric"].is_boolean()) throw ParseError("'symmetric' must be a boolean");
    p.symmetric = j["symmetric"].get<bool>();
  }
  return p;
}

}  // namespace detail

inline BodySpec body_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("body spec must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ParseError("body spec needs a string 'kind'");
  BodySpec spec;
  spec.n = static_cast<int>(detail::get_integer(j, "n", 2));
  if (spec.n != 1 && spec.n != 2) throw ParseError("'n' must be 1 or 2");
  const std::string kind = j["kind"].get<std::string>();
  const std::set<std::string> common = {"n", "kind", "recenter", "perturb"};
  auto allow = [&](std::set<std::string> extra) {
    extra.insert(common.begin(), common.end());
    detail::only_keys(j, extra, "body spec");
  };
  auto vec3 = [&](const char* key) {
    Vec3 v{0.0, 0.0, 0.0};
    if (!j.contains(key)) return v;
    const auto& a = j[key];
    if (!a.is_array() || a.size() != static_cast<std::size_t>(spec.n + 1)) throw ParseError(std::string("'") + key + "' must have n+1 entries");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ParseError(std::string("'") + key + "' entries must be numbers");
      v[i] = a[i].get<double>();
    }
    return v;
  };
  if (kind == "ball") {
    allow({"r"});
    spec.kind = BodySpec::Kind::Ball;
    spec.r = detail::get_number(j, "r", 1.0);
  } else if (kind == "shifted_ball") {
    allow({"r", "v"});
    spec.kind = BodySpec::Kind::ShiftedBall;
    spec.r = detail::get_number(j, "r", 1.0);
    spec.v = vec3("v");
  } else if (kind == "ellipsoid") {
    allow({"M"});
    spec.kind = BodySpec::Kind::Ellipsoid;
    const int d = spec.n + 1;
    if (!j.contains("M") || !j["M"].is_array() || j["M"].size() != static_cast<std::size_t>(d))
      throw ParseError("'M' must be an (n+1)x(n+1) matrix");
    for (int a = 0; a < d; ++a) {
      const auto& row = j["M"][a];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) throw ParseError("'M' must be an (n+1)x(n+1) matrix");
      for (int b = 0; b < d; ++b) {
        if (!row[b].is_number()) throw ParseError("'M' entries must be numbers");
        spec.M(a, b) = row[b].get<double>();
      }
    }
  } else if (kind == "harmonic") {
    allow({"base", "coeffs"});
    spec.kind = BodySpec::Kind::Harmonic;
    spec.base = detail::get_number(j, "base", 1.0);
    if (j.contains("coeffs")) {
      if (!j["coeffs"].is_array()) throw ParseError("'coeffs' must be an array");
      for (const auto& t : j["coeffs"]) {
        if (!t.is_object()) throw ParseError("harmonic term must be an object");
        detail::only_keys(t, {"l", "m", "c"}, "harmonic term");
        if (!t.contains("l") || !t.contains("c")) throw ParseError("harmonic term needs 'l' and 'c'");
        spec.coeffs.push_back({static_cast<int>(detail::get_integer(t, "l", 0)),
                               static_cast<int>(detail::get_integer(t, "m", 0)), detail::get_number(t, "c", 0.0)});
      }
    }
  } else if (kind == "random") {
    allow({"seed", "eps", "lmax", "symmetric"});
    spec.kind = BodySpec::Kind::Random;
    nlohmann::json sub = nlohmann::json::object();
    for (const char* key : {"seed", "eps", "lmax", "symmetric"})
      if (j.contains(key)) sub[key] = j[key];
    spec.random = detail::parse_perturbation(sub, "random body");
  } else if (kind == "samples") {
    detail::only_keys(j, {"n", "kind", "grid", "scheme", "h", "recenter"}, "body spec");
    spec.kind = BodySpec::Kind::Samples;
    if (!j.contains("grid") || !j["grid"].is_string()) throw ParseError("sampled body needs 'grid'");
    try {
      spec.sample_resolution = parse_resolution(j["grid"].get<std::string>());
      spec.sample_scheme = j.contains("scheme") ? parse_scheme(j["scheme"].get<std::string>()) : DiffScheme::FiniteDifference4;
    } catch (const Error& e) {
      throw ParseError(e.what());
    }
    if (spec.n == 1) spec.sample_resolution.n_theta = 0;
    if (!j.contains("h") || !j["h"].is_array()) throw ParseError("sampled body needs an 'h' array");
    for (const auto& v : j["h"]) {
      if (!v.is_number()) throw ParseError("'h' entries must be numbers");
      spec.samples.push_back(v.get<double>());
    }
  } else {
    throw ParseError("unknown body kind '" + kind + "'");
  }
  if (j.contains("perturb")) {
    if (spec.kind == BodySpec::Kind::Samples || spec.kind == BodySpec::Kind::Random)
      throw ParseError("'perturb' not allowed for this kind");
    spec.random = detail::parse_perturbation(j["perturb"], "perturb");
  }
  if (j.contains("recenter")) {
    if (!j["recenter"].is_boolean()) throw ParseError("'recenter' must be a boolean");
    spec.recenter = j["recenter"].get<bool>();
  }
  try {
    detail::check_parameters(spec);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return spec;
}

/// Accepts inline JSON (first non-space character '{') or a file path.
inline BodySpec load_body_spec(const std::string& source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  std::string text;
  if (first != std::string::npos && source[first] == '{') {
    text = source;
  } else {
    std::ifstream in(source);
    if (!in) throw ParseError("cannot open body file '" + source + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed body JSON: ") + e.what());
  }
  return body_spec_from_json(j);
}

inline nlohmann::ordered_json to_json(const BodySpec& spec) {
  nlohmann::ordered_json j;
  j["n"] = spec.n;
  j["kind"] = kind_name(spec.kind);
  auto vec = [&](const Vec3& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (int i = 0; i <= spec.n; ++i) a.push_back(v[i]);
    return a;
  };
  switch (spec.kind) {
    case BodySpec::Kind::Ball: j["r"] = spec.r; break;
    case BodySpec::Kind::ShiftedBall:
      j["r"] = spec.r;
      j["v"] = vec(spec.v);
      break;
    case BodySpec::Kind::Ellipsoid: {
      nlohmann::ordered_json m = nlohmann::ordered_json::array();
      for (int a = 0; a <= spec.n; ++a) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int b = 0; b <= spec.n; ++b) row.push_back(spec.M(a, b));
        m.push_back(row);
      }
      j["M"] = m;
      break;
    }
    case BodySpec::Kind::Harmonic: {
      j["base"] = spec.base;
      nlohmann::ordered_json c = nlohmann::ordered_json::array();
      for (const auto& t : spec.coeffs) c.push_back({{"l", t.l}, {"m", t.m}, {"c", t.c}});
      j["coeffs"] = c;
      break;
    }
    case BodySpec::Kind::Random:
      j["seed"] = spec.random.seed;
      j["eps"] = spec.random.eps;
      j["lmax"] = spec.random.lmax;
      j["symmetric"] = spec.random.symmetric;
      break;
    case BodySpec::Kind::Samples: {
      Resolution r = spec.sample_resolution;
      j["grid"] = spec.n == 1 ? std::to_string(r.n_phi) : std::to_string(r.n_theta) + "x" + std::to_string(r.n_phi);
      j["scheme"] = to_string(spec.sample_scheme);
      j["h"] = spec.samples;
      break;
    }
  }
  if (spec.kind != BodySpec::Kind::Random && spec.kind != BodySpec::Kind::Samples && spec.random.eps > 0.0)
    j["perturb"] = {{"seed", spec.random.seed}, {"eps", spec.random.eps}, {"lmax", spec.random.lmax},
                    {"symmetric", spec.random.symmetric}};
  if (spec.recenter) j["recenter"] = true;
  return j;
}

/// Lossless node-sample record of h with its grid descriptor.
inline nlohmann::ordered_json samples_json(const ScalarField& h) {
  BodySpec s;
  s.n = h.grid().dim();
  s.kind = BodySpec::Kind::Samples;
  s.sample_resolution = h.grid().resolution();
  s.sample_scheme = h.grid().scheme();
  s.samples = h.values();
  return to_json(s);
}

/// make_body followed by recentring when requested.
inline ScalarField realize_body(const BodySpec& spec, const GridPtr& grid) {
  ScalarField h = make_body(spec, grid);
  if (spec.recenter) {
    h = recenter(h);
    validate_convex(h);
  }
  return h;
}

}  // namespace isoflow
