#pragma once

#include <set>

#include "dyn.hpp"

namespace orthoklein {

// ---- circles

// s(C) as a circle; s maps the interior of C onto the interior of the result
inline Circle transport(const Circle& c, const Mat2& s) {
  const Mat2 si = s.adj();
  const Mat2 H{c.A, c.B, std::conj(c.B), c.D};
  const Mat2 r = si.adjoint() * H * si;
  return {r.a.real(), r.b, r.d.real()};
}

inline double circle_norm(const Circle& c) { return std::sqrt(c.A * c.A + c.D * c.D + 2.0 * std::norm(c.B)); }

// equal as oriented circles (positive scale)
inline bool circle_equal(const Circle& x, const Circle& y, double tol = 1e-9) {
  const double nx = circle_norm(x), ny = circle_norm(y);
  return std::abs(x.A / nx - y.A / ny) <= tol && std::abs(x.D / nx - y.D / ny) <= tol &&
         std::abs(x.B / nx - y.B / ny) <= tol;
}

inline Circle complement(const Circle& c) { return {-c.A, -c.B, -c.D}; }

// trace pairing with the trace-one Hermitian matrix of a point of H^3 or its boundary;
// negative on the open half-space over the disk
inline double halfspace_value(const Circle& c, const HPoint& p) {
  const auto n = bloch(p);
  const double r11 = 0.5 * (1.0 + n[2]), r22 = 0.5 * (1.0 - n[2]);
  const cplx r12(0.5 * n[0], -0.5 * n[1]);
  return (c.A * r11 + c.D * r22 + 2.0 * (std::conj(c.B) * r12).real()) / circle_norm(c);
}

// closed disk as a spherical cap on the Bloch sphere
struct Cap {
  std::array<double, 3> center{};
  double radius = 0;  // angular
};

inline Cap cap_of(const Circle& c) {
  const double a0 = 0.5 * (c.A + c.D);
  const std::array<double, 3> a{c.B.real(), -c.B.imag(), 0.5 * (c.A - c.D)};
  const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  Cap k;
  for (int i = 0; i < 3; ++i) k.center[i] = -a[i] / na;
  k.radius = std::acos(std::clamp(a0 / na, -1.0, 1.0));
  return k;
}

inline double sphere_angle(const std::array<double, 3>& u, const std::array<double, 3>& v) {
  const double d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  const std::array<double, 3> x{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return std::atan2(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), d);
}

inline CP1 from_bloch(const std::array<double, 3>& n) {
  const double th = std::acos(std::clamp(n[2], -1.0, 1.0));
  return cp1(std::cos(th / 2), std::polar(std::sin(th / 2), std::atan2(-n[1], n[0])));
}

// chordal gap between closed disks, negative when they overlap
inline double disk_gap(const Circle& x, const Circle& y) {
  const Cap a = cap_of(x), b = cap_of(y);
  const double g = sphere_angle(a.center, b.center) - a.radius - b.radius;
  return g >= 0 ? std::sin(0.5 * g) : -std::sin(0.5 * std::min(-g, M_PI));
}

// a point of both closed disks (midpoint of the overlap along the centre arc)
inline CP1 disk_overlap_point(const Circle& x, const Circle& y) {
  const Cap a = cap_of(x), b = cap_of(y);
  const double ang = sphere_angle(a.center, b.center);
  const double t = std::clamp(0.5 * (ang + a.radius - b.radius), 0.0, ang);
  if (ang < 1e-15) return from_bloch(a.center);
  std::array<double, 3> perp;
  const double d = std::cos(ang);
  for (int i = 0; i < 3; ++i) perp[i] = (b.center[i] - d * a.center[i]) / std::sin(ang);
  std::array<double, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = std::cos(t) * a.center[i] + std::sin(t) * perp[i];
  return from_bloch(p);
}

// ---- ping-pong

inline bool schottky_pair(const Mat2& s, const Circle& C, const Circle& D, double tol = 1e-9) {
  if (classify_element(s).kind != ElementKind::Loxodromic) return false;
  // s(ext C) = closure(D) iff s(C) bounds the complement of D with matching orientation
  return circle_equal(transport(C, s), complement(D), tol);
}

struct PingPongCertificate {
  bool pass = false;
  std::vector<double> margins;  // chordal gaps over all pairs of the 2g disks
  std::vector<bool> pairings;   // schottky_pair per generator
  std::optional<CP1> witness;
  std::optional<QuadricPoint> witnessQ3;
  std::string reason;
};

inline std::vector<Circle> schottky_disks(const GroupSpec& spec) {
  if (!spec.schottky) throw Error(Errc::MissingSchottkyData, "group has no circle pairs");
  std::vector<Circle> out;
  for (const auto& p : *spec.schottky) {
    out.push_back(p.C);
    out.push_back(p.D);
  }
  return out;
}

inline PingPongCertificate verify_ping_pong_cp1(const GroupSpec& spec, double tol = 1e-9) {
  const std::vector<Circle> disks = schottky_disks(spec);
  PingPongCertificate cert;
  cert.pass = true;
  for (std::size_t i = 0; i < disks.size(); ++i)
    for (std::size_t j = i + 1; j < disks.size(); ++j) {
      double m = disk_gap(disks[i], disks[j]);
      if (std::abs(m) <= 1e-12) m = 0.0;
      cert.margins.push_back(m);
      if (m <= 0 && cert.pass) {
        cert.pass = false;
        cert.witness = disk_overlap_point(disks[i], disks[j]);
        cert.reason = "disks " + std::to_string(i) + " and " + std::to_string(j) + " meet";
      }
    }
  for (int k = 0; k < spec.rank; ++k) {
    const auto& cp = (*spec.schottky)[static_cast<std::size_t>(k)];
    const bool ok = schottky_pair(spec.generators[static_cast<std::size_t>(k)], cp.C, cp.D, tol);
    cert.pairings.push_back(ok);
    if (!ok && cert.pass) {
      cert.pass = false;
      cert.witness = disk_overlap_point(cp.C, cp.C);
      cert.reason = "generator " + std::to_string(k + 1) + " does not pair its circles";
    }
  }
  return cert;
}

struct PingPongQ3Config {
  int samples = 200;
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-9;
};

// point of the circle bounding a disk, at azimuth t around the cap centre
inline CP1 circle_point(const Circle& c, double t) {
  const Cap k = cap_of(c);
  const auto& n = k.center;
  std::array<double, 3> u = std::abs(n[2]) < 0.9 ? std::array<double, 3>{-n[1], n[0], 0.0}
                                                 : std::array<double, 3>{0.0, -n[2], n[1]};
  const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  for (auto& x : u) x /= nu;
  const std::array<double, 3> v{n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]};
  std::array<double, 3> p;
  for (int i = 0; i < 3; ++i)
    p[i] = std::cos(k.radius) * n[i] + std::sin(k.radius) * (std::cos(t) * u[i] + std::sin(t) * v[i]);
  return from_bloch(p);
}

// Half-spaces over the disks pulled back by delta. The pairing of half-spaces is exact by
// transport; the inclusions s(B^c) in closure(E) are sampled on quadric points, half of them
// generic and half over the circle C.
inline PingPongCertificate verify_ping_pong_q3(const GroupSpec& spec, const PingPongQ3Config& cfg = {}) {
  PingPongCertificate cert = verify_ping_pong_cp1(spec, cfg.tol);
  if (!cert.pass) return cert;
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  for (int k = 0; k < spec.rank && cert.pass; ++k) {
    const auto& cp = (*spec.schottky)[static_cast<std::size_t>(k)];
    const PairElement s = spec.letter(k + 1);
    for (int i = 0; i < cfg.samples && cert.pass; ++i) {
      const QuadricPoint x = i % 2 ? random_quadric_point(rng) : q2_join(circle_point(cp.C, angle(rng)), random_cp1(rng));
      if (halfspace_value(cp.C, delta_map(x)) < -cfg.tol) continue;
      const QuadricPoint y = act(s, x);
      if (halfspace_value(cp.D, delta_map(y)) > cfg.tol) {
        cert.pass = false;
        cert.witnessQ3 = x;
        cert.reason = "sampled point escapes the image half-space of generator " + std::to_string(k + 1);
      }
    }
  }
  return cert;
}

// ---- limit sets

struct LimitPoint {
  CP1 point;
  Word word;  // first word whose attracting fixed point this is
};

inline std::vector<LimitPoint> limit_points_cp1(const GroupSpec& spec, int maxLen, double dedupEps = 1e-6,
                                                unsigned threads = 0) {
  auto fixed = map_words(
      spec, maxLen,
      [](const Word& w, const PairElement& v) -> std::optional<LimitPoint> {
        if (w.empty()) return std::nullopt;
        const ElementInfo i = classify_element(v.g);
        if (i.kind != ElementKind::Loxodromic) return std::nullopt;
        return LimitPoint{i.fixed.front(), w};
      },
      threads);
  Cp1Dedup dd(dedupEps);
  std::vector<LimitPoint> out;
  for (auto& f : fixed)
    if (f && dd.insert(f->point)) out.push_back(std::move(*f));
  if (out.empty()) throw Error(Errc::NoLoxodromic, "no loxodromic word up to the given length");
  return out;
}

inline std::vector<CP1> limit_set_cp1(const GroupSpec& spec, int maxLen, double dedupEps = 1e-6, unsigned threads = 0) {
  std::vector<CP1> out;
  for (const auto& p : limit_points_cp1(spec, maxLen, dedupEps, threads)) out.push_back(p.point);
  return out;
}

inline double nearest_distance(const CP1& p, const std::vector<CP1>& cloud) {
  double best = 1.0;
  for (const auto& q : cloud) best = std::min(best, chordal(p, q));
  return best;
}

inline double hausdorff_cp1(const std::vector<CP1>& a, const std::vector<CP1>& b, unsigned threads = 0) {
  auto directed = [&](const std::vector<CP1>& x, const std::vector<CP1>& y) {
    const unsigned n = std::max(1u, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(x.size())));
    std::vector<double> part(n, 0.0);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < x.size(); i += n) part[t] = std::max(part[t], nearest_distance(x[i], y));
      });
    for (auto& th : pool) th.join();
    return *std::max_element(part.begin(), part.end());
  };
  if (a.empty() || b.empty()) return 1.0;
  return std::max(directed(a, b), directed(b, a));
}

inline double deformation_norm(const GroupSpec& spec) {
  double m = 0;
  for (const auto& u : spec.deformation) m = std::max(m, frob(u - Mat2::identity()));
  return m;
}

// ---- properness

struct CompactSample {
  std::vector<Mat2> points;  // sample of the ball, used to witness actual returns
  double radius = 0.1;       // ball {x : sigma(x) <= radius} around I
};

inline CompactSample compact_ball(double radius, int samples = 32, std::uint64_t seed = kDefaultSeed) {
  CompactSample k;
  k.radius = radius;
  k.points.push_back(Mat2::identity());
  Rng rng(seed);
  for (int i = 1; i < samples; ++i) k.points.push_back(random_sl2_sigma(rng, radius));
  return k;
}

struct WordReturn {
  Word word;
  double sdiff = 0, mu = 0;
  bool witnessed = false;
};

struct PropernessReport {
  std::size_t wordCount = 0;
  std::vector<WordReturn> returning;
  int maxWordLenReturned = 0;
  std::vector<Word> suspectBounded;
  double thresholdMargin = 0;  // min over words of | sdiff - 2 radius |
};

struct PropernessConfig {
  int suspectMaxLen = 4;
  int suspectPowers = 12;
  unsigned threads = 0;
};

// g K h^-1 can meet K only if |sigma(g) - sigma(h)| <= 2 radius; the sample witnesses actual hits
inline PropernessReport properness_sl2_report(const GroupSpec& spec, const CompactSample& K, int maxLen,
                                              const PropernessConfig& cfg = {}) {
  struct PerWord {
    bool returns = false, witnessed = false, suspect = false;
    double sdiff = 0, mu = 0, margin = 0;
  };
  const double bound = 2.0 * K.radius;
  auto per = map_words(
      spec, maxLen,
      [&](const Word& w, const PairElement& v) {
        PerWord r;
        const double sg = sigma_of(v.g), sh = sigma_of(v.h);
        r.sdiff = std::abs(sg - sh);
        r.mu = sg + sh;
        r.margin = std::abs(r.sdiff - bound);
        r.returns = r.sdiff <= bound;
        if (r.returns) {
          const Mat2 hi = v.h.adj();
          for (const auto& x : K.points)
            if (sigma_of(v.g * x * hi) <= K.radius) {
              r.witnessed = true;
              break;
            }
        }
        if (!w.empty() && static_cast<int>(w.size()) <= cfg.suspectMaxLen) {
          // sdiff flat while mu grows along the powers
          const auto powers = SequenceSpec::cyclic(v).prefix(static_cast<std::size_t>(cfg.suspectPowers));
          ClassifyConfig cc;
          cc.minLength = 2;
          r.suspect = classify_explicit(powers, cc).tag == DistortionTag::Bounded;
        }
        return r;
      },
      cfg.threads);
  auto words = map_words(spec, maxLen, [](const Word& w, const PairElement&) { return w; }, cfg.threads);
  PropernessReport rep;
  rep.wordCount = per.size();
  rep.thresholdMargin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < per.size(); ++i) {
    rep.thresholdMargin = std::min(rep.thresholdMargin, per[i].margin);
    if (per[i].suspect) rep.suspectBounded.push_back(words[i]);
    if (!per[i].returns) continue;
    rep.returning.push_back({words[i], per[i].sdiff, per[i].mu, per[i].witnessed});
    rep.maxWordLenReturned = std::max(rep.maxWordLenReturned, static_cast<int>(words[i].size()));
  }
  return rep;
}

inline std::vector<Word> returning_words(const PropernessReport& r) {
  std::vector<Word> out;
  for (const auto& w : r.returning) out.push_back(w.word);
  return out;
}

struct UniformityRow {
  double deformationNorm = 0;
  std::size_t returningCount = 0;
  bool matchesFirst = true;
};

struct UniformityTable {
  std::vector<UniformityRow> rows;
  bool identical = true;
};

inline UniformityTable properness_uniformity(const GroupSpec& base, const std::vector<std::vector<Mat2>>& deformations,
                                             const CompactSample& K, int maxLen, const PropernessConfig& cfg = {}) {
  UniformityTable t;
  std::vector<Word> first;
  for (std::size_t i = 0; i < deformations.size(); ++i) {
    GroupSpec s = base;
    s.deformation = deformations[i];
    PropernessConfig c = cfg;
    c.suspectMaxLen = 0;
    const auto words = returning_words(properness_sl2_report(s, K, maxLen, c));
    UniformityRow row{deformation_norm(s), words.size(), true};
    if (i == 0)
      first = words;
    else
      row.matchesFirst = words == first;
    t.identical = t.identical && row.matchesFirst;
    t.rows.push_back(row);
  }
  return t;
}

struct QiFit {
  double B = 1, C = 0;
  double calibration = 1;  // d is divided by this before fitting
  bool ok = true;
  std::vector<Word> violations;
  std::size_t wordCount = 0;
};

// d(w) = 2 sigma(rho(w)) against word length l(w). B comes from the extreme ratios d/l on the
// outermost sphere after calibration, C is the smallest constant making the sandwich hold everywhere.
inline QiFit quasi_isometry_fit(const GroupSpec& spec, int maxLen, double maxB = 1e3, unsigned threads = 0) {
  struct Pt {
    int l;
    double d;
  };
  const auto pts = map_words(
      spec, maxLen, [](const Word& w, const PairElement& v) { return Pt{static_cast<int>(w.size()), 2.0 * sigma_of(v.g)}; },
      threads);
  QiFit f;
  f.wordCount = pts.size();
  if (maxLen < 1) return f;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& p : pts)
    if (p.l == maxLen) {
      lo = std::min(lo, p.d / p.l);
      hi = std::max(hi, p.d / p.l);
    }
  if (!(lo > 0) || hi / lo > maxB * maxB) {
    f.ok = false;
    f.B = std::numeric_limits<double>::infinity();
    f.C = std::numeric_limits<double>::infinity();
    const double floor = hi / maxB;
    std::vector<Word> words;
    const auto all = map_words(spec, maxLen, [](const Word& w, const PairElement&) { return w; }, threads);
    for (std::size_t i = 0; i < pts.size() && f.violations.size() < 100; ++i)
      if (pts[i].l > 0 && pts[i].d / pts[i].l < floor) f.violations.push_back(all[i]);
    return f;
  }
  f.calibration = std::sqrt(lo * hi);
  f.B = std::max(1.0, std::sqrt(hi / lo));
  for (const auto& p : pts) {
    const double d = p.d / f.calibration;
    f.C = std::max({f.C, p.l / f.B - d, d - f.B * p.l});
  }
  return f;
}

// ---- U and V membership

struct MembershipConfig {
  double eps = 1e-3;
  double q2Tol = kQ2Tol;
};

inline bool u_gamma_membership(const QuadricPoint& x, const std::vector<CP1>& limitCloud, const MembershipConfig& cfg = {}) {
  if (std::abs(x[2]) > cfg.q2Tol) return true;
  const CP1 x1 = split_rank1(x[0], x[1], x[3], x[4]).first;
  return nearest_distance(x1, limitCloud) > cfg.eps;
}

inline QuadricPoint lift_cp3(const CP3& p) {
  const auto& c = p.c;
  const cplx disc = c[0] * c[3] - c[1] * c[2];
  // rounding on Q2 would otherwise lift to |z3| near 1e-8
  const cplx z3 = std::abs(disc) <= 1e-15 ? cplx(0) : std::sqrt(disc);
  return quadric_point_unchecked({c[0], c[1], z3, c[2], c[3]});
}

inline bool v_gamma_membership(const CP3& p, const std::vector<CP1>& limitCloud, const MembershipConfig& cfg = {}) {
  return u_gamma_membership(lift_cp3(p), limitCloud, cfg);
}

// ---- reduction to the fundamental cell

struct Reduction {
  QuadricPoint representative;
  Word word;  // value(word) . x = representative
};

inline Reduction schottky_reduce(const QuadricPoint& x, const GroupSpec& spec, int maxIter = 100,
                                 double maxLogCondition = std::log(1e12)) {
  if (!spec.schottky) throw Error(Errc::MissingSchottkyData, "group has no circle pairs");
  Reduction r{x, {}};
  PairElement acc;
  for (int step = 0; step < 10 * maxIter; ++step) {
    const HPoint p = delta_map(r.representative);
    int letter = 0;
    for (int k = 0; k < spec.rank && letter == 0; ++k) {
      const auto& cp = (*spec.schottky)[static_cast<std::size_t>(k)];
      if (halfspace_value(cp.C, p) < 0)
        letter = k + 1;
      else if (halfspace_value(cp.D, p) < 0)
        letter = -(k + 1);
    }
    if (letter == 0) return r;
    const PairElement l = spec.letter(letter);
    acc = l * acc;
    if (2.0 * std::max(sigma_of(acc.g), sigma_of(acc.h)) > maxLogCondition)
      throw Error(Errc::NoConvergence, "point is too close to the limit set at working precision");
    r.representative = act(l, r.representative);
    r.word.insert(r.word.begin(), letter);
  }
  throw Error(Errc::NoConvergence, "reduction did not reach the fundamental cell");
}

// ---- reference configurations

namespace configs {

inline GroupSpec genus1() {
  GroupSpec s = GroupSpec::make({Mat2::diag(3.0, 1.0 / 3.0)});
  s.schottky = std::vector<CirclePair>{{Circle::disk(0.0, 1.0 / 3.0), Circle::exterior(0.0, 3.0)}};
  return s;
}

// second generator M s M^-1 with M(z) = (z - 1)/(z + 1)
inline GroupSpec genus2() {
  const Mat2 m = Mat2{1.0, -1.0, 1.0, 1.0} * (1.0 / std::sqrt(2.0));
  const GroupSpec g1 = genus1();
  const Mat2 s = g1.generators[0];
  const CirclePair p = (*g1.schottky)[0];
  GroupSpec s2 = GroupSpec::make({s, m * s * m.adj()});
  s2.schottky = std::vector<CirclePair>{p, {transport(p.C, m), transport(p.D, m)}};
  return s2;
}

// |z + 1| < 1 and |z - 1| < 1 touch at 0
inline GroupSpec tangent() {
  const double e = std::exp(1.0);
  GroupSpec s = GroupSpec::make({Mat2{e, 0.0, std::cosh(1.0), 1.0 / e}});
  s.schottky = std::vector<CirclePair>{{Circle::disk(-1.0, 1.0), Circle::disk(1.0, 1.0)}};
  return s;
}

}  // namespace configs

}  // namespace orthoklein
