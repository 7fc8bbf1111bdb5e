#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "klein.hpp"

namespace orthoklein::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

// ---- parsing

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::Schema, where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(Errc::Schema, where + ": unknown key '" + k + "'");
  }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(Errc::Schema, where + ": missing '" + key + "'");
  return j.at(key);
}

inline double parse_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(Errc::Schema, where + ": expected a number");
  return j.get<double>();
}

inline cplx parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(Errc::Schema, where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Mat2 parse_mat2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::Schema, where + ": expected 4 complex entries, row-major");
  return {parse_complex(j[0], where + "[0]"), parse_complex(j[1], where + "[1]"), parse_complex(j[2], where + "[2]"),
          parse_complex(j[3], where + "[3]")};
}

inline std::vector<Mat2> parse_mat_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(Errc::Schema, where + ": expected an array of matrices");
  std::vector<Mat2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_mat2(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// {"A": a, "B": [re, im], "D": d} or {"center": [re, im], "radius": r, "side": "inside" | "outside"}
inline Circle parse_circle(const json& j, const std::string& where) {
  if (j.is_object() && j.contains("center")) {
    check_keys(j, {"center", "radius", "side"}, where);
    const cplx c = parse_complex(j.at("center"), where + ".center");
    const double r = parse_number(require(j, "radius", where), where + ".radius");
    if (!(r > 0)) throw Error(Errc::Schema, where + ": radius must be positive");
    std::string side = j.value("side", "inside");
    if (side == "inside") return Circle::disk(c, r);
    if (side == "outside") return Circle::exterior(c, r);
    throw Error(Errc::Schema, where + ".side: expected inside or outside");
  }
  check_keys(j, {"A", "B", "D"}, where);
  return {parse_number(require(j, "A", where), where + ".A"), parse_complex(require(j, "B", where), where + ".B"),
          parse_number(require(j, "D", where), where + ".D")};
}

inline GroupSpec parse_group(const json& j, double tol = kUnimodularTol) {
  const std::string w = "group";
  check_keys(j, {"rank", "generators", "deformation", "schottky"}, w);
  const json& r = require(j, "rank", w);
  if (!r.is_number_integer()) throw Error(Errc::Schema, "group.rank: expected an integer");
  GroupSpec s;
  s.rank = r.get<int>();
  s.generators = parse_mat_list(require(j, "generators", w), "group.generators");
  s.deformation = j.contains("deformation") ? parse_mat_list(j.at("deformation"), "group.deformation")
                                            : std::vector<Mat2>(s.generators.size(), Mat2::identity());
  if (j.contains("schottky")) {
    const json& sc = j.at("schottky");
    if (!sc.is_array()) throw Error(Errc::Schema, "group.schottky: expected an array");
    std::vector<CirclePair> pairs;
    for (std::size_t i = 0; i < sc.size(); ++i) {
      const std::string pw = "group.schottky[" + std::to_string(i) + "]";
      check_keys(sc[i], {"C", "D"}, pw);
      pairs.push_back({parse_circle(require(sc[i], "C", pw), pw + ".C"), parse_circle(require(sc[i], "D", pw), pw + ".D")});
    }
    s.schottky = pairs;
  }
  try {
    s.validate(tol);
  } catch (const Error& e) {
    throw Error(Errc::Schema, std::string("group: ") + e.what());
  }
  return s;
}

inline Word parse_word(const std::string& s, int rank) {
  Word w;
  if (s == "e" || s.empty()) return w;
  for (char c : s) {
    int l = 0;
    if (c >= 'a' && c <= 'z') l = c - 'a' + 1;
    if (c >= 'A' && c <= 'Z') l = -(c - 'A' + 1);
    if (l == 0 || std::abs(l) > rank) throw Error(Errc::Schema, std::string("word: bad letter '") + c + "'");
    w.push_back(l);
  }
  return w;
}

inline PairElement parse_pair(const json& j, const std::string& where) {
  check_keys(j, {"g", "h"}, where);
  const Mat2 g = parse_mat2(require(j, "g", where), where + ".g");
  const Mat2 h = j.contains("h") ? parse_mat2(j.at("h"), where + ".h") : Mat2::identity();
  if (!is_sl2(g) || !is_sl2(h)) throw Error(Errc::Schema, where + ": not in SL(2,C)");
  return {g, h};
}

// {"kind": "cyclic", "word": "ab"} | {"kind": "cyclic", "element": {...}} | {"kind": "explicit", "elements": [...]}
inline SequenceSpec parse_sequence(const json& j, const std::optional<GroupSpec>& group) {
  const std::string w = "sequence";
  check_keys(j, {"kind", "word", "element", "elements"}, w);
  const json& k = require(j, "kind", w);
  if (!k.is_string()) throw Error(Errc::Schema, "sequence.kind: expected a string");
  const std::string kind = k.get<std::string>();
  if (kind == "cyclic") {
    if (j.contains("word")) {
      if (!group) throw Error(Errc::Schema, "sequence.word needs a group");
      if (!j.at("word").is_string()) throw Error(Errc::Schema, "sequence.word: expected a string");
      return SequenceSpec::cyclic(group->value(parse_word(j.at("word").get<std::string>(), group->rank)));
    }
    return SequenceSpec::cyclic(parse_pair(require(j, "element", w), "sequence.element"));
  }
  if (kind == "explicit") {
    const json& e = require(j, "elements", w);
    if (!e.is_array()) throw Error(Errc::Schema, "sequence.elements: expected an array");
    std::vector<PairElement> out;
    for (std::size_t i = 0; i < e.size(); ++i) out.push_back(parse_pair(e[i], "sequence.elements[" + std::to_string(i) + "]"));
    return SequenceSpec::explicit_list(std::move(out));
  }
  throw Error(Errc::Schema, "sequence.kind: expected cyclic or explicit");
}

struct Params {
  int maxLen = 6;
  double tol = 1e-9;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  double dedupEps = 1e-6;
  double radius = 0.1;
  int samples = 32;
  double eps = 1e-3;
  int limitLen = 8;
  std::vector<std::vector<Mat2>> deformations;
  std::optional<QuadricPoint> basePoint;
};

struct ExperimentConfig {
  std::optional<GroupSpec> group;
  std::optional<SequenceSpec> sequence;
  Params params;
};

inline Params parse_params(const json& j) {
  const std::string w = "params";
  check_keys(j,
             {"maxLen", "tol", "seed", "threads", "dedupEps", "radius", "samples", "eps", "limitLen", "deformations",
              "basePoint"},
             w);
  Params p;
  auto integer = [&](const char* k, auto& out) {
    if (!j.contains(k)) return;
    if (!j.at(k).is_number_integer() || j.at(k).get<long long>() < 0)
      throw Error(Errc::Schema, std::string("params.") + k + ": expected a non-negative integer");
    out = static_cast<std::remove_reference_t<decltype(out)>>(j.at(k).get<long long>());
  };
  auto real = [&](const char* k, double& out) {
    if (j.contains(k)) out = parse_number(j.at(k), std::string("params.") + k);
  };
  integer("maxLen", p.maxLen);
  integer("seed", p.seed);
  integer("threads", p.threads);
  integer("samples", p.samples);
  integer("limitLen", p.limitLen);
  real("tol", p.tol);
  real("dedupEps", p.dedupEps);
  real("radius", p.radius);
  real("eps", p.eps);
  if (j.contains("deformations")) {
    const json& d = j.at("deformations");
    if (!d.is_array()) throw Error(Errc::Schema, "params.deformations: expected an array");
    for (std::size_t i = 0; i < d.size(); ++i)
      p.deformations.push_back(parse_mat_list(d[i], "params.deformations[" + std::to_string(i) + "]"));
  }
  if (j.contains("basePoint")) {
    const json& b = j.at("basePoint");
    if (!b.is_array() || b.size() != 5) throw Error(Errc::Schema, "params.basePoint: expected 5 complex coordinates");
    CVec5 v;
    for (std::size_t i = 0; i < 5; ++i) v[i] = parse_complex(b[i], "params.basePoint[" + std::to_string(i) + "]");
    try {
      p.basePoint = quadric_point(v, 1e-8);
    } catch (const Error& e) {
      throw Error(Errc::Schema, std::string("params.basePoint: ") + e.what());
    }
  }
  return p;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Schema, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"group", "sequence", "params"}, "config");
  ExperimentConfig c;
  if (j.contains("params")) c.params = parse_params(j.at("params"));
  if (j.contains("group")) c.group = parse_group(j.at("group"));
  if (j.contains("sequence")) c.sequence = parse_sequence(j.at("sequence"), c.group);
  return c;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---- serialization

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

template <std::size_t N>
json to_json(const CVec<N>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(to_json(z));
  return a;
}

inline json to_json(const CP1& p) { return to_json(p.c); }
inline json to_json(const QuadricPoint& p) { return to_json(p.coords()); }

inline json to_json(const LineFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}}; }

inline json to_json(const LightGeodesic& g) {
  json j{{"orientation", orientation_name(g.tag)}};
  j["base"] = g.base ? to_json(*g.base) : json(nullptr);
  return j;
}

inline json to_json(const DistortionClass& c) {
  return {{"tag", distortion_name(c.tag)},
          {"delta", c.delta},
          {"deltaConverged", c.delta_converged},
          {"flip", c.flip},
          {"evidence", {{"lambda", to_json(c.lambda)}, {"mu", to_json(c.mu)}, {"muMinusLambda", to_json(c.mu_minus_lambda)}}}};
}

inline json to_json(const PingPongCertificate& c) {
  json j{{"pass", c.pass}, {"margins", c.margins}};
  json pairs = json::array();
  for (bool b : c.pairings) pairs.push_back(b);
  j["pairings"] = pairs;
  j["witness"] = c.witness ? to_json(*c.witness) : json(nullptr);
  j["witnessQ3"] = c.witnessQ3 ? to_json(*c.witnessQ3) : json(nullptr);
  j["reason"] = c.reason;
  return j;
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

// affine chart of CP1: chart 0 is z = c0/c1 for |z| <= 1, chart 1 is 1/z
struct ChartValue {
  cplx z;
  int chart;
};

inline ChartValue chart_of(const CP1& p) {
  if (std::abs(p[0]) <= std::abs(p[1])) return {p[0] / p[1], 0};
  return {p[1] / p[0], 1};
}

struct CsvRow {
  std::string word;
  cplx z;
  int chart = 0;
  int membership = 0;
};

inline void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "index,word,re,im,chart,membership\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    f << i << ',' << rows[i].word << ',' << fmt(rows[i].z.real()) << ',' << fmt(rows[i].z.imag()) << ',' << rows[i].chart
      << ',' << rows[i].membership << '\n';
}

// Q2 points in the chart (Re z1, Im z1, Re z2) of CP1 x CP1, z = c0/c1; far points clamped
inline void write_q2_ply(const std::string& path, const std::vector<QuadricPoint>& pts, double clamp = 1e3) {
  std::vector<std::array<double, 3>> xyz;
  std::size_t clamped = 0;
  for (const auto& p : pts) {
    auto [x, y] = split_rank1(p[0], p[1], p[3], p[4]);
    auto coord = [&](const CP1& c, bool& over) {
      if (std::abs(c[1]) * clamp <= std::abs(c[0])) {
        over = true;
        const cplx d = c[0] / std::abs(c[0]);
        return d * clamp;
      }
      const cplx z = c[0] / c[1];
      if (std::abs(z) > clamp) {
        over = true;
        return z * (clamp / std::abs(z));
      }
      return z;
    };
    bool over = false;
    const cplx z1 = coord(x, over), z2 = coord(y, over);
    clamped += over;
    xyz.push_back({z1.real(), z1.imag(), z2.real()});
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "ply\nformat ascii 1.0\n";
  f << "comment chart x = Re z1, y = Im z1, z = Re z2\n";
  f << "comment clamped " << clamped << " at " << fmt(clamp) << "\n";
  f << "element vertex " << xyz.size() << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& v : xyz) f << fmt(v[0]) << ' ' << fmt(v[1]) << ' ' << fmt(v[2]) << '\n';
}

// points of the closed ball model of H^3 (Bloch coordinates)
inline void write_ball_ply(const std::string& path, const std::vector<std::array<double, 3>>& pts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "ply\nformat ascii 1.0\ncomment ball model of H3\n";
  f << "element vertex " << pts.size() << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& v : pts) f << fmt(v[0]) << ' ' << fmt(v[1]) << ' ' << fmt(v[2]) << '\n';
}

}  // namespace orthoklein::io
