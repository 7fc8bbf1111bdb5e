#pragma once

#include <numeric>
#include <unordered_map>

#include "group.hpp"
#include "random.hpp"

namespace orthoklein {

struct SequenceSpec {
  enum class Kind { Explicit, Cyclic };
  Kind kind = Kind::Cyclic;
  std::vector<PairElement> elements;  // explicit, index n = 1, 2, ...
  PairElement base;                   // cyclic, n-th element is base^n

  static SequenceSpec explicit_list(std::vector<PairElement> e) {
    SequenceSpec s;
    s.kind = Kind::Explicit;
    s.elements = std::move(e);
    return s;
  }
  static SequenceSpec cyclic(const PairElement& b) {
    SequenceSpec s;
    s.kind = Kind::Cyclic;
    s.base = PairElement(b.g, b.h);
    return s;
  }

  // first n elements
  std::vector<PairElement> prefix(std::size_t n) const {
    if (kind == Kind::Explicit) {
      const std::size_t m = std::min(n, elements.size());
      return {elements.begin(), elements.begin() + static_cast<std::ptrdiff_t>(m)};
    }
    std::vector<PairElement> out;
    PairElement p = base;
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back(p);
      p = p * base;
    }
    return out;
  }
};

enum class DistortionTag { Balanced, Bounded, Mixed, NotDivergent, Undetermined };

inline const char* distortion_name(DistortionTag t) {
  switch (t) {
    case DistortionTag::Balanced: return "Balanced";
    case DistortionTag::Bounded: return "Bounded";
    case DistortionTag::Mixed: return "Mixed";
    case DistortionTag::NotDivergent: return "NotDivergent";
    default: return "Undetermined";
  }
}

struct LineFit {
  double slope = 0, intercept = 0, residual = 0;
};

struct DistortionClass {
  DistortionTag tag = DistortionTag::Undetermined;
  double delta = 0;
  bool delta_converged = true;
  bool flip = false;
  LineFit lambda, mu, mu_minus_lambda;
};

struct ClassifyConfig {
  double slopeTol = 1e-3;
  double rangeTol = 1.0;
  std::size_t minLength = 8;
};

// Theil-Sen: median pairwise slope, median intercept; residual is the max deviation
inline LineFit theil_sen(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = x.size();
  if (n == 0) return f;
  auto median = [](std::vector<double>& v) {
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    double hi = v[m];
    if (v.size() % 2) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
  };
  if (n > 1) {
    std::vector<double> slopes;
    slopes.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
    if (!slopes.empty()) f.slope = median(slopes);
  }
  std::vector<double> icpt(n);
  for (std::size_t i = 0; i < n; ++i) icpt[i] = y[i] - f.slope * x[i];
  f.intercept = median(icpt);
  for (std::size_t i = 0; i < n; ++i) f.residual = std::max(f.residual, std::abs(y[i] - f.slope * x[i] - f.intercept));
  return f;
}

namespace detail {

struct SigmaSeries {
  std::vector<double> n, lam, mu, smin;
  std::vector<bool> flip;
};

inline SigmaSeries sigma_series(const std::vector<PairElement>& seq) {
  SigmaSeries s;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double sg = sigma_of(seq[k].g), sh = sigma_of(seq[k].h);
    s.n.push_back(static_cast<double>(k + 1));
    s.lam.push_back(std::abs(sg - sh));
    s.mu.push_back(sg + sh);
    s.smin.push_back(std::min(sg, sh));
    s.flip.push_back(sg < sh);
  }
  return s;
}

inline std::vector<double> tail_half(const std::vector<double>& v) {
  return {v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end()};
}

inline void fill_evidence(DistortionClass& c, const SigmaSeries& s) {
  const auto n = tail_half(s.n);
  std::vector<double> diff(s.mu.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.mu[i] - s.lam[i];
  c.lambda = theil_sen(n, tail_half(s.lam));
  c.mu = theil_sen(n, tail_half(s.mu));
  c.mu_minus_lambda = theil_sen(n, tail_half(diff));
}

inline std::vector<PairElement> powers(const PairElement& p, std::size_t n, double muCap) {
  std::vector<PairElement> out;
  PairElement q = p;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(q);
    if (sigma_of(q.g) + sigma_of(q.h) > muCap) break;
    q = q * p;
  }
  return out;
}

}  // namespace detail

inline DistortionClass classify_explicit(const std::vector<PairElement>& seq, const ClassifyConfig& cfg = {}) {
  if (seq.size() < cfg.minLength)
    throw Error(Errc::TooShort, std::to_string(seq.size()) + " elements, need " + std::to_string(cfg.minLength));
  const detail::SigmaSeries s = detail::sigma_series(seq);
  DistortionClass c;
  detail::fill_evidence(c, s);
  c.flip = s.flip.back();
  auto range = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  auto bounded = [&](const LineFit& f, const std::vector<double>& v) {
    return std::abs(f.slope) < cfg.slopeTol && range(detail::tail_half(v)) < cfg.rangeTol;
  };
  auto divergent = [&](const LineFit& f, const std::vector<double>& v) {
    const auto t = detail::tail_half(v);
    return f.slope > cfg.slopeTol && t.back() > t.front();
  };
  std::vector<double> twoMin(s.smin.size());
  for (std::size_t i = 0; i < twoMin.size(); ++i) twoMin[i] = 2.0 * s.smin[i];

  if (bounded(c.mu, s.mu)) {
    c.tag = DistortionTag::NotDivergent;
  } else if (bounded(c.lambda, s.lam) && divergent(c.mu, s.mu)) {
    c.tag = DistortionTag::Bounded;
  } else if (bounded(c.mu_minus_lambda, twoMin) && divergent(c.lambda, s.lam)) {
    c.tag = DistortionTag::Balanced;
    const auto t = detail::tail_half(s.smin);
    c.delta = -2.0 * std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  } else if (divergent(c.mu_minus_lambda, twoMin) && divergent(c.lambda, s.lam)) {
    c.tag = DistortionTag::Mixed;
  } else {
    c.tag = DistortionTag::Undetermined;
  }
  return c;
}

// Decided from the translation lengths of the two factors.
inline DistortionClass classify_cyclic(const PairElement& p, bool withEvidence = true) {
  const ElementInfo ig = classify_element(p.g), ih = classify_element(p.h);
  DistortionClass c;
  const bool lg = ig.kind == ElementKind::Loxodromic, lh = ih.kind == ElementKind::Loxodromic;
  const bool pg = ig.kind == ElementKind::Parabolic, ph = ih.kind == ElementKind::Parabolic;
  auto balanced_delta = [&](const Mat2& bounded, const ElementInfo& info) {
    if (info.kind == ElementKind::Identity) return;
    // elliptic: sigma of the powers oscillates, report the mean
    double sum = 0;
    Mat2 q = bounded;
    const int n = 64;
    for (int k = 0; k < n; ++k, q = q * bounded) sum += sigma_of(q);
    c.delta = -2.0 * sum / n;
    c.delta_converged = false;
  };
  if (lg && lh) {
    const double scale = std::max(1.0, std::max(ig.tau_len, ih.tau_len));
    if (std::abs(ig.tau_len - ih.tau_len) <= 1e-9 * scale) {
      c.tag = DistortionTag::Bounded;
    } else {
      c.tag = DistortionTag::Mixed;
      c.flip = ih.tau_len > ig.tau_len;
    }
  } else if (lg || lh) {
    const ElementInfo& other = lg ? ih : ig;
    c.flip = lh;
    if (other.kind == ElementKind::Parabolic) {
      c.tag = DistortionTag::Mixed;
    } else {
      c.tag = DistortionTag::Balanced;
      balanced_delta(lg ? p.h : p.g, other);
    }
  } else if (pg && ph) {
    c.tag = DistortionTag::Bounded;
  } else if (pg || ph) {
    c.tag = DistortionTag::Balanced;
    c.flip = ph;
    balanced_delta(pg ? p.h : p.g, pg ? ih : ig);
  } else {
    c.tag = DistortionTag::NotDivergent;
  }
  if (withEvidence) detail::fill_evidence(c, detail::sigma_series(detail::powers(p, 32, 600.0)));
  return c;
}

inline DistortionClass classify(const SequenceSpec& seq, const ClassifyConfig& cfg = {}) {
  return seq.kind == SequenceSpec::Kind::Cyclic ? classify_cyclic(seq.base) : classify_explicit(seq.elements, cfg);
}

// ---- limit data

struct LimitData {
  DistortionClass cls;
  LightGeodesic deltaPlus, deltaMinus;
  std::optional<QuadricPoint> pPlus, pMinus;
  std::optional<Mat5> limitOp;    // balanced: x -> D(x)
  std::optional<Mat5> gInfinity;  // bounded: cone-space map
};

namespace detail {

// M -> G M Hi on the 2x2 block, z3 -> c z3
inline Mat5 pair_operator(const Mat2& G, const Mat2& Hi, cplx c) {
  Mat5 p = psi_raw(G, Hi.adj());
  p[2][2] = c;
  return p;
}

inline CVec<2> ann(const CP1& y) { return {-y[1], y[0]}; }

inline Mat2 outer(const CVec<2>& x, const CVec<2>& w) { return {x[0] * w[0], x[0] * w[1], x[1] * w[0], x[1] * w[1]}; }

inline const CP1& attracting(const ElementInfo& i) { return i.fixed.front(); }
inline const CP1& repelling(const ElementInfo& i) { return i.fixed.back(); }

// rank-one limit of normalized powers: image attracting point, kernel repelling point
inline Mat2 power_limit(const ElementInfo& i) { return outer(attracting(i).c, ann(repelling(i))); }

template <std::size_t N>
CVec<N> phase_aligned(const CVec<N>& v, const CVec<N>& ref) {
  const cplx d = hdot(v, ref);
  if (std::abs(d) == 0) return v;
  return scaled(v, d / std::abs(d));
}

// phase-aligned mean of unit vectors; NotConvergentFrame when a member deviates too far
template <std::size_t N>
CVec<N> tail_mean(const std::vector<CVec<N>>& vs, double tol, const char* what) {
  const CVec<N> ref = scaled(vs.back(), 1.0 / norm(vs.back()));
  CVec<N> sum{};
  for (const auto& v : vs) sum = axpy(1.0, phase_aligned(scaled(v, 1.0 / norm(v)), ref), sum);
  for (const auto& v : vs)
    if (line_distance(v, sum) > tol)
      throw Error(Errc::NotConvergentFrame, std::string(what) + " deviates by " + std::to_string(line_distance(v, sum)));
  return scaled(sum, 1.0 / norm(sum));
}

inline LightGeodesic transport(const Mat5& m, const LightGeodesic& g) {
  return make_geodesic(orthoklein::apply(m, g.v), orthoklein::apply(m, g.w), 1e-8);
}

struct Frames {
  Mat5 left, right;  // psi(k1) F^flip and F^flip psi(k2)
  Mat5 rightInv;     // psi(k2)^-1 F^flip
};

inline Frames frames_of(const CartanData& c) {
  Frames f;
  f.left = psi_raw(c.k1);
  f.right = psi_raw(c.k2);
  f.rightInv = psi_raw(c.k2.inverse());
  if (c.flip) {
    f.left = matmul(f.left, flip_matrix());
    f.right = matmul(flip_matrix(), f.right);
    f.rightInv = matmul(f.rightInv, flip_matrix());
  }
  return f;
}

inline LightGeodesic rebuild_leaf(const LightGeodesic& g) {
  if (g.tag == Orientation::Vertical) return vertical_geodesic(*g.base);
  if (g.tag == Orientation::Horizontal) return horizontal_geodesic(*g.base);
  return g;
}

inline QuadricPoint snap_q2(const CVec5& v) {
  const QuadricPoint p = quadric_point_unchecked(v);
  auto [x, y] = split_rank1(p[0], p[1], p[3], p[4]);
  return q2_join(x, y);
}

inline LimitData explicit_limit_data(const std::vector<PairElement>& seq, const DistortionClass& cls, double frameTol) {
  LimitData d;
  d.cls = cls;
  const std::size_t n = seq.size();
  const std::size_t t = std::max<std::size_t>(2, (n + 3) / 4);
  std::vector<CVec<2>> plusBase, minusBase;
  std::vector<CVec5> pp, pm;
  std::vector<CVec<25>> ops;
  Orientation plusTag = Orientation::None, minusTag = Orientation::None;
  for (std::size_t k = n - std::min(t, n); k < n; ++k) {
    const CartanData c = cartan_kak(seq[k]);
    const Frames f = frames_of(c);
    const LightGeodesic dp = make_geodesic(column(f.left, 0), column(f.left, 1), 1e-8);
    const LightGeodesic dm = make_geodesic(column(f.rightInv, 3), column(f.rightInv, 4), 1e-8);
    if (!dp.base || !dm.base) throw Error(Errc::NotConvergentFrame, "limit geodesic left Q2");
    if (plusTag != Orientation::None && (dp.tag != plusTag || dm.tag != minusTag))
      throw Error(Errc::NotConvergentFrame, "orientation changes along the tail");
    plusTag = dp.tag;
    minusTag = dm.tag;
    plusBase.push_back(dp.base->c);
    minusBase.push_back(dm.base->c);
    pp.push_back(column(f.left, 1));
    pm.push_back(column(f.rightInv, 3));
    if (cls.tag == DistortionTag::Balanced) {
      const Mat5 mid = diag5(std::exp(c.lambda - c.mu), 1, 0, 0, 0);
      ops.push_back(flatten(matmul(f.left, matmul(mid, f.right))));
    } else if (cls.tag == DistortionTag::Bounded) {
      const Mat5 mid = diag5(std::exp(c.lambda), 0, 1, 0, std::exp(-c.lambda));
      ops.push_back(flatten(matmul(f.left, matmul(mid, f.right))));
    }
  }
  LightGeodesic gp, gm;
  gp.tag = plusTag;
  gp.base = CP1(tail_mean(plusBase, frameTol, "attracting geodesic"));
  gm.tag = minusTag;
  gm.base = CP1(tail_mean(minusBase, frameTol, "repelling geodesic"));
  d.deltaPlus = rebuild_leaf(gp);
  d.deltaMinus = rebuild_leaf(gm);
  if (cls.tag == DistortionTag::Mixed || cls.tag == DistortionTag::Bounded) {
    d.pPlus = snap_q2(tail_mean(pp, frameTol, "attracting vertex"));
    d.pMinus = snap_q2(tail_mean(pm, frameTol, "repelling vertex"));
  }
  if (!ops.empty()) {
    const Mat5 op = unflatten<5>(tail_mean(ops, frameTol, "limit operator"));
    if (cls.tag == DistortionTag::Balanced)
      d.limitOp = op;
    else
      d.gInfinity = op;
  }
  return d;
}

inline LimitData cyclic_limit_data(const PairElement& p, const DistortionClass& cls) {
  LimitData d;
  d.cls = cls;
  const ElementInfo ig = classify_element(p.g), ih = classify_element(p.h);
  auto leaves = [&](const ElementInfo& dom, bool horizontal) {
    if (horizontal) {
      d.deltaPlus = horizontal_geodesic(attracting(dom));
      d.deltaMinus = horizontal_geodesic(repelling(dom));
    } else {
      d.deltaPlus = vertical_geodesic(attracting(dom));
      d.deltaMinus = vertical_geodesic(repelling(dom));
    }
  };
  switch (cls.tag) {
    case DistortionTag::Balanced: {
      const bool hDominant = cls.flip;
      const ElementInfo& dom = hDominant ? ih : ig;
      const ElementInfo& other = hDominant ? ig : ih;
      leaves(dom, hDominant);
      if (other.kind == ElementKind::Identity) {
        if (!hDominant) {
          d.limitOp = pair_operator(power_limit(ig), Mat2::identity(), 0.0);
        } else {
          // h^-n tends to the projector onto the repelling point of h along the attracting one
          d.limitOp = pair_operator(Mat2::identity(), outer(repelling(ih).c, ann(attracting(ih))), 0.0);
        }
      }
      break;
    }
    case DistortionTag::Mixed: {
      leaves(cls.flip ? ih : ig, cls.flip);
      d.pPlus = q2_join(attracting(ig), attracting(ih));
      d.pMinus = q2_join(repelling(ig), repelling(ih));
      break;
    }
    case DistortionTag::Bounded: {
      d.pPlus = q2_join(attracting(ig), attracting(ih));
      d.pMinus = q2_join(repelling(ig), repelling(ih));
      // the middle block has no closed form; read it off a large power
      PairElement q = p;
      for (int k = 1; k < 2000 && cartan_kak(q).mu < 25.0; ++k) q = q * p;
      const CartanData c = cartan_kak(q);
      const Frames f = frames_of(c);
      d.gInfinity = matmul(f.left, matmul(diag5(std::exp(c.lambda), 0, 1, 0, std::exp(-c.lambda)), f.right));
      d.deltaPlus = make_geodesic(column(f.left, 0), column(f.left, 1), 1e-8);
      d.deltaMinus = make_geodesic(column(f.rightInv, 3), column(f.rightInv, 4), 1e-8);
      break;
    }
    default:
      throw std::invalid_argument("limit data needs a divergent class");
  }
  return d;
}

}  // namespace detail

inline LimitData limit_data(const SequenceSpec& seq, const DistortionClass& cls, double frameTol = 1e-3) {
  if (cls.tag != DistortionTag::Balanced && cls.tag != DistortionTag::Mixed && cls.tag != DistortionTag::Bounded)
    throw std::invalid_argument(std::string("no limit data for class ") + distortion_name(cls.tag));
  if (seq.kind == SequenceSpec::Kind::Cyclic) return detail::cyclic_limit_data(seq.base, cls);
  return detail::explicit_limit_data(seq.elements, cls, frameTol);
}

inline LimitData limit_data(const SequenceSpec& seq) { return limit_data(seq, classify(seq)); }

inline LimitData limit_geodesics(const SequenceSpec& seq, const DistortionClass& cls, double frameTol = 1e-3) {
  if (cls.tag != DistortionTag::Balanced && cls.tag != DistortionTag::Mixed)
    throw std::invalid_argument("limit geodesics need a balanced or mixed class");
  return limit_data(seq, cls, frameTol);
}

// post * g_n * pre
inline LimitData conjugate_limits(const PairElement& pre, const LimitData& data, const PairElement& post) {
  LimitData d = data;
  const Mat5 a = psi_raw(post), bi = psi_raw(pre.inverse());
  d.deltaPlus = detail::transport(a, data.deltaPlus);
  d.deltaMinus = detail::transport(bi, data.deltaMinus);
  if (data.pPlus) d.pPlus = act(a, *data.pPlus);
  if (data.pMinus) d.pMinus = act(bi, *data.pMinus);
  if (data.limitOp) d.limitOp = matmul(a, matmul(*data.limitOp, bi));
  if (data.gInfinity) d.gInfinity = matmul(a, matmul(*data.gInfinity, bi));
  return d;
}

// ---- dynamical limits

struct DynLimit {
  enum class Kind { Point, Geodesic, Cone, UndefinedOnRepeller };
  Kind kind = Kind::UndefinedOnRepeller;
  QuadricPoint point;
  LightGeodesic geodesic;
  LightCone cone;
};

inline const char* dyn_kind_name(DynLimit::Kind k) {
  switch (k) {
    case DynLimit::Kind::Point: return "Point";
    case DynLimit::Kind::Geodesic: return "Geodesic";
    case DynLimit::Kind::Cone: return "Cone";
    default: return "UndefinedOnRepeller";
  }
}

inline DynLimit dyn_limit(const LimitData& d, const QuadricPoint& x, double tol = kQuadricTol) {
  DynLimit r;
  auto point = [&](const QuadricPoint& p) {
    r.kind = DynLimit::Kind::Point;
    r.point = p;
    return r;
  };
  switch (d.cls.tag) {
    case DistortionTag::Balanced: {
      if (!d.limitOp) throw Error(Errc::NotConvergentFrame, "balanced limit operator does not converge");
      if (d.deltaMinus.distance(x) <= tol) return r;
      const CVec5 y = orthoklein::apply(*d.limitOp, x.coords());
      if (norm(y) <= tol * std::sqrt(frob2(*d.limitOp))) return r;
      return point(quadric_point_unchecked(y));
    }
    case DistortionTag::Mixed: {
      if (chordal(x, *d.pMinus) <= tol) return r;
      if (!cone_contains(*d.pMinus, x, tol)) return point(*d.pPlus);
      if (d.deltaMinus.distance(x) > tol) {
        r.kind = DynLimit::Kind::Geodesic;
        r.geodesic = d.deltaPlus;
        return r;
      }
      r.kind = DynLimit::Kind::Cone;
      r.cone = LightCone{*d.pPlus};
      return r;
    }
    case DistortionTag::Bounded: {
      if (chordal(x, *d.pMinus) <= tol) return r;
      if (!cone_contains(*d.pMinus, x, tol)) return point(*d.pPlus);
      const CVec5 y = orthoklein::apply(*d.gInfinity, x.coords());
      if (norm(y) <= tol * std::sqrt(frob2(*d.gInfinity))) return r;
      r.kind = DynLimit::Kind::Geodesic;
      r.geodesic = make_geodesic(d.pPlus->coords(), y, 1e-7);
      return r;
    }
    default:
      throw std::invalid_argument("dyn_limit needs a divergent class");
  }
}

inline DynLimit dyn_limit(const SequenceSpec& seq, const QuadricPoint& x, double tol = kQuadricTol) {
  return dyn_limit(limit_data(seq), x, tol);
}

// The geodesic l_q for q on the attracting geodesic, given by its free CP1 coordinate
// (second factor for a vertical attractor, first for a horizontal one).
inline LightGeodesic lq_of(const CP1& q, const LimitData& d) {
  if (d.cls.tag != DistortionTag::Balanced || !d.limitOp) throw std::invalid_argument("lq_of needs balanced limit data");
  const Mat5& L = *d.limitOp;
  const CP1 fixedMinus = *d.deltaMinus.base;
  const CP1 ortho = cp1(-std::conj(fixedMinus[1]), std::conj(fixedMinus[0]));
  const CP1 e1 = cp1(1, 0), e2 = cp1(0, 1);
  if (d.deltaPlus.tag == Orientation::Vertical) {
    // L(x0 (x) ann(y)) = x+ (x) B ann(y)
    const CVec<2> xp = d.deltaPlus.base->c;
    Mat2 B;
    for (int j = 0; j < 2; ++j) {
      const CVec5 in{ortho[0] * cplx(j == 0), ortho[0] * cplx(j == 1), 0.0, ortho[1] * cplx(j == 0), ortho[1] * cplx(j == 1)};
      const CVec5 img = orthoklein::apply(L, in);
      const CVec<2> beta{(std::conj(xp[0]) * img[0] + std::conj(xp[1]) * img[3]),
                         (std::conj(xp[0]) * img[1] + std::conj(xp[1]) * img[4])};
      (j == 0 ? B.a : B.b) = beta[0];
      (j == 0 ? B.c : B.d) = beta[1];
    }
    const CVec<2> w = B.inverse() * detail::ann(q);
    return horizontal_geodesic(cp1(w[1], -w[0]));
  }
  // horizontal attractor: L(x (x) ann(y0)) = (G x) (x) ann(y+)
  const CVec<2> a = detail::ann(*d.deltaPlus.base);
  const double na = norm2(a);
  Mat2 G;
  for (int j = 0; j < 2; ++j) {
    const CVec5 img = orthoklein::apply(L, q2_join_vec(j == 0 ? e1 : e2, ortho));
    const CVec<2> gam{(img[0] * std::conj(a[0]) + img[1] * std::conj(a[1])) / na,
                      (img[3] * std::conj(a[0]) + img[4] * std::conj(a[1])) / na};
    (j == 0 ? G.a : G.b) = gam[0];
    (j == 0 ? G.c : G.d) = gam[1];
  }
  return vertical_geodesic(CP1(G.inverse() * q.c));
}

inline LightGeodesic lq_of(const QuadricPoint& q, const LimitData& d) {
  auto [x, y] = q2_split(q, 1e-7);
  return lq_of(d.deltaPlus.tag == Orientation::Vertical ? y : x, d);
}

// ---- brute-force dynamical relation

struct OracleConfig {
  int sampleCount = 64;
  double perturbRadius = 1e-3;
  double clusterEps = 1e-2;
  int prefixLen = 30;
  std::uint64_t rngSeed = kDefaultSeed;
  double muCap = 30.0;  // beyond this the perturbations drown in rounding
};

struct OracleCluster {
  QuadricPoint rep;
  int count = 0;
};

struct OracleResult {
  std::vector<OracleCluster> clusters;
  bool notDivergent = false;
  std::size_t windowBegin = 0, windowEnd = 0;  // 1-based, inclusive
};

namespace detail {

inline void add_to_clusters(std::vector<OracleCluster>& cl, const QuadricPoint& p, double eps) {
  for (auto& c : cl)
    if (chordal(c.rep, p) < eps) {
      ++c.count;
      return;
    }
  cl.push_back({p, 1});
}

// solve q(w) = 0 for coordinate j, which enters linearly
inline std::optional<cplx> solve_coordinate(const CVec5& w, int j) {
  const cplx s = w[2] * w[2];
  switch (j) {
    case 0: return std::abs(w[4]) > 0 ? std::optional<cplx>((w[1] * w[3] + s) / w[4]) : std::nullopt;
    case 4: return std::abs(w[0]) > 0 ? std::optional<cplx>((w[1] * w[3] + s) / w[0]) : std::nullopt;
    case 1: return std::abs(w[3]) > 0 ? std::optional<cplx>((w[0] * w[4] - s) / w[3]) : std::nullopt;
    case 3: return std::abs(w[1]) > 0 ? std::optional<cplx>((w[0] * w[4] - s) / w[1]) : std::nullopt;
    default: return std::nullopt;
  }
}

}  // namespace detail

inline OracleResult oracle_dynrel(const SequenceSpec& seq, const QuadricPoint& x, const OracleConfig& cfg = {}) {
  OracleResult res;
  const std::vector<PairElement> pre = seq.prefix(static_cast<std::size_t>(cfg.prefixLen));
  std::vector<CartanData> kak;
  for (const auto& p : pre) {
    CartanData c = cartan_kak(p);
    if (c.mu > cfg.muCap && !kak.empty()) break;
    kak.push_back(c);
  }
  const std::size_t K = kak.size();
  const std::size_t win = std::max<std::size_t>(1, (K + 3) / 4);
  res.windowBegin = K - win + 1;
  res.windowEnd = K;

  Rng rng(cfg.rngSeed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  const double r = cfg.perturbRadius;
  double muMax = 0;
  for (std::size_t k = K - win; k < K; ++k) {
    const CartanData& c = kak[k];
    muMax = std::max(muMax, c.mu);
    const detail::Frames f = detail::frames_of(c);
    const CVec5 w = orthoklein::apply(f.right, x.coords());
    const std::array<double, 5> logs{c.lambda - c.mu, 0.0, -c.mu, -2.0 * c.mu, -c.lambda - c.mu};
    std::array<double, 5> s;
    for (int i = 0; i < 5; ++i) s[i] = std::exp(logs[i]);
    auto image = [&](const CVec5& v) {
      CVec5 t;
      for (int i = 0; i < 5; ++i) t[i] = s[i] * v[i];
      return quadric_point_unchecked(orthoklein::apply(f.left, t));
    };
    detail::add_to_clusters(res.clusters, image(w), cfg.clusterEps);
    for (int i = 0; i < cfg.sampleCount; ++i) {
      CVec5 wp = w;
      for (int j = 0; j < 5; ++j) {
        const double L = logs[j] - logs[4] + 4.0;
        wp[j] += std::polar(r * std::exp(-unit01(rng) * L), angle(rng));
      }
      std::array<int, 4> order{0, 1, 3, 4};
      std::shuffle(order.begin(), order.end(), rng);
      bool ok = false;
      for (int j : order) {
        const auto sol = detail::solve_coordinate(wp, j);
        if (sol && std::abs(*sol - w[j]) <= r) {
          wp[j] = *sol;
          ok = true;
          break;
        }
      }
      if (ok) detail::add_to_clusters(res.clusters, image(wp), cfg.clusterEps);
    }
  }
  res.notDivergent = muMax < 1.0;
  return res;
}

// ---- Frances limit set

struct FrancesConfig {
  double dedupEps = 1e-4;
  int samplesPerGeodesic = 16;
  unsigned threads = 0;
};

struct FrancesGeodesic {
  LightGeodesic geodesic;
  Word word;
  bool attractor = true;
};

struct FrancesLimitSet {
  std::vector<FrancesGeodesic> geodesics;
  std::vector<QuadricPoint> cloud;
  std::size_t divergentWords = 0, boundedWords = 0;
  bool allVertical = true;
};

// near-duplicate filter for CP1 points, hashed on the Bloch sphere
class Cp1Dedup {
 public:
  explicit Cp1Dedup(double eps) : eps_(eps), cell_(2.0 * eps) {}

  bool insert(const CP1& p) {
    const auto b = bloch(HPoint::on_boundary(p));
    const std::array<long long, 3> k{key(b[0]), key(b[1]), key(b[2])};
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(hash({k[0] + dx, k[1] + dy, k[2] + dz}));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second)
            if (chordal(points_[i], p) < eps_) return false;
        }
    cells_[hash(k)].push_back(points_.size());
    points_.push_back(p);
    return true;
  }
  const std::vector<CP1>& points() const { return points_; }

 private:
  long long key(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
  static std::uint64_t hash(const std::array<long long, 3>& k) {
    std::uint64_t h = 1469598103934665603ull;
    for (long long v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
    return h;
  }
  double eps_, cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
  std::vector<CP1> points_;
};

// deterministic sample of CP1 (spiral on the sphere)
inline std::vector<CP1> sphere_samples(int n) {
  std::vector<CP1> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double th = std::acos(z);
    out.push_back(cp1(std::cos(th / 2), std::polar(std::sin(th / 2), golden * i)));
  }
  return out;
}

inline FrancesLimitSet frances_limit_set(const GroupSpec& spec, int maxLen, const FrancesConfig& cfg = {}) {
  struct PerWord {
    DistortionTag tag;
    bool flip;
    CP1 plus, minus;
    Word word;
  };
  auto per = map_words(
      spec, maxLen,
      [](const Word& w, const PairElement& v) {
        PerWord r{DistortionTag::NotDivergent, false, {}, {}, {}};
        if (w.empty()) return r;
        const DistortionClass c = classify_cyclic(v, false);
        r.tag = c.tag;
        r.flip = c.flip;
        if (c.tag == DistortionTag::Balanced || c.tag == DistortionTag::Mixed) {
          const ElementInfo info = classify_element(c.flip ? v.h : v.g);
          r.plus = info.fixed.front();
          r.minus = info.fixed.back();
          r.word = w;
        }
        return r;
      },
      cfg.threads);

  FrancesLimitSet out;
  Cp1Dedup vert(cfg.dedupEps), horiz(cfg.dedupEps);
  const auto samples = sphere_samples(cfg.samplesPerGeodesic);
  for (std::size_t i = 0; i < per.size(); ++i) {
    const PerWord& r = per[i];
    if (r.tag == DistortionTag::Bounded) ++out.boundedWords;
    if (r.tag != DistortionTag::Balanced && r.tag != DistortionTag::Mixed) continue;
    ++out.divergentWords;
    for (int side = 0; side < 2; ++side) {
      const CP1& b = side == 0 ? r.plus : r.minus;
      Cp1Dedup& dd = r.flip ? horiz : vert;
      if (!dd.insert(b)) continue;
      FrancesGeodesic fg{r.flip ? horizontal_geodesic(b) : vertical_geodesic(b), r.word, side == 0};
      if (r.flip) out.allVertical = false;
      for (const auto& t : samples) out.cloud.push_back(r.flip ? q2_join(t, b) : q2_join(b, t));
      out.geodesics.push_back(std::move(fg));
    }
  }
  if (out.divergentWords == 0) throw Error(Errc::NoDivergentWords, "no balanced or mixed word up to the given length");
  return out;
}

}  // namespace orthoklein
