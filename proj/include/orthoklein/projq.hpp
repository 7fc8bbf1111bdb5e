#pragma once

#include <optional>
#include <utility>

#include "core.hpp"

namespace orthoklein {

// Unit norm, then the first coordinate of (numerically) largest modulus is made real positive.
// Already-canonical input is returned bit-for-bit.
template <std::size_t N>
CVec<N> normalized(CVec<N> v) {
  double m = 0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  if (!(m > 0) || !std::isfinite(m)) throw std::invalid_argument("normalized: zero or non-finite vector");
  double s = 0;
  for (const auto& x : v) s += std::norm(x / m);
  double n = m * std::sqrt(s);
  if (std::abs(n - 1.0) > 1e-14)
    for (auto& x : v) x /= n;

  m = 0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  std::size_t k = 0;
  while (std::abs(v[k]) < m * (1.0 - 1e-12)) ++k;
  const cplx p = v[k];
  if (p.imag() != 0.0 || p.real() <= 0.0) {
    const double ap = std::abs(p);
    const cplx ph = std::conj(p) / ap;
    for (auto& x : v) x *= ph;
    v[k] = cplx(ap, 0.0);
  }
  return v;
}

template <std::size_t N>
struct ProjPoint {
  CVec<N> c{};

  ProjPoint() { c[0] = 1.0; }
  explicit ProjPoint(const CVec<N>& v) : c(normalized(v)) {}

  const cplx& operator[](std::size_t i) const { return c[i]; }
};

using CP1 = ProjPoint<2>;
using CP3 = ProjPoint<4>;
using CP4 = ProjPoint<5>;

inline CP1 cp1(cplx a, cplx b) { return CP1(CVec<2>{a, b}); }

template <std::size_t N>
double chordal(const ProjPoint<N>& a, const ProjPoint<N>& b) {
  return line_distance(a.c, b.c);
}

template <std::size_t N>
bool proj_equal(const ProjPoint<N>& a, const ProjPoint<N>& b, double tol = kEqualTol) {
  return chordal(a, b) < tol;
}

// affine chart value v0/v1; infinite for [1:0]
inline cplx affine(const CP1& x) {
  if (x[1] == cplx(0)) return cplx(INFINITY, 0);
  return x[0] / x[1];
}

// ---- the form

inline cplx q_form(const CVec5& z) { return z[0] * z[4] - z[1] * z[3] - z[2] * z[2]; }

inline cplx bilinear_b(const CVec5& v, const CVec5& w) {
  return 0.5 * (v[0] * w[4] + v[4] * w[0]) - 0.5 * (v[1] * w[3] + v[3] * w[1]) - v[2] * w[2];
}

struct QuadricPoint {
  CP4 point;
  double residual = 0;

  const CVec5& coords() const { return point.c; }
  const cplx& operator[](std::size_t i) const { return point.c[i]; }
};

inline QuadricPoint quadric_point_unchecked(const CVec5& v) {
  QuadricPoint p;
  p.point = CP4(v);
  p.residual = std::abs(q_form(p.point.c));
  return p;
}

inline QuadricPoint quadric_point(const CVec5& v, double tol = kQuadricTol) {
  QuadricPoint p = quadric_point_unchecked(v);
  if (p.residual > tol) throw Error(Errc::NotOnQuadric, "residual " + std::to_string(p.residual));
  return p;
}

inline double chordal(const QuadricPoint& a, const QuadricPoint& b) { return chordal(a.point, b.point); }

inline bool on_q2(const QuadricPoint& p, double tol = kQ2Tol) {
  return std::abs(p[2]) <= tol && p.residual <= tol;
}

// ---- Q2 = CP1 x CP1

// image and kernel of the rank-1 matrix [[m11, m12], [m21, m22]]
inline std::pair<CP1, CP1> split_rank1(cplx m11, cplx m12, cplx m21, cplx m22) {
  CVec<2> c1{m11, m21}, c2{m12, m22};
  CVec<2> r1{m11, m12}, r2{m21, m22};
  const CVec<2>& col = norm2(c1) >= norm2(c2) ? c1 : c2;
  const CVec<2>& row = norm2(r1) >= norm2(r2) ? r1 : r2;
  return {CP1(col), CP1(CVec<2>{-row[1], row[0]})};
}

inline std::pair<CP1, CP1> q2_split(const QuadricPoint& p, double tol = kQ2Tol) {
  if (!on_q2(p, tol)) throw Error(Errc::NotOnQ2, "z3 or residual above tolerance");
  const auto& z = p.coords();
  return split_rank1(z[0], z[1], z[3], z[4]);
}

inline CVec5 q2_join_vec(const CP1& x, const CP1& y) {
  const cplx w0 = -y[1], w1 = y[0];
  return {x[0] * w0, x[0] * w1, 0.0, x[1] * w0, x[1] * w1};
}

inline QuadricPoint q2_join(const CP1& x, const CP1& y) { return quadric_point_unchecked(q2_join_vec(x, y)); }

// ---- light geodesics

enum class Orientation { None, Vertical, Horizontal };

inline const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::Vertical: return "vertical";
    case Orientation::Horizontal: return "horizontal";
    default: return "none";
  }
}

struct LightGeodesic {
  CVec5 v{}, w{};  // Hermitian-orthonormal basis of the isotropic plane
  Orientation tag = Orientation::None;
  std::optional<CP1> base;

  QuadricPoint at(const CP1& t) const { return quadric_point_unchecked(axpy(t[0], v, scaled(w, t[1]))); }

  // sine of the angle between the line through p and the plane
  double distance(const CVec5& p) const {
    const double np = norm(p);
    CVec5 r = axpy(-hdot(v, p), v, p);
    r = axpy(-hdot(w, r), w, r);
    return norm(r) / np;
  }
  double distance(const QuadricPoint& p) const { return distance(p.coords()); }
  bool contains(const QuadricPoint& p, double tol = 1e-9) const { return distance(p) <= tol; }
};

inline double geodesic_distance(const LightGeodesic& a, const LightGeodesic& b) {
  return std::max({a.distance(b.v), a.distance(b.w), b.distance(a.v), b.distance(a.w)});
}

inline LightGeodesic make_geodesic(const CVec5& v0, const CVec5& w0, double tol = kQuadricTol) {
  LightGeodesic g;
  g.v = scaled(v0, 1.0 / norm(v0));
  CVec5 w = scaled(w0, 1.0 / norm(w0));
  w = axpy(-hdot(g.v, w), g.v, w);
  const double s = norm(w);
  if (s <= 1e-9) throw Error(Errc::NotIsotropicPair, "spanning vectors are dependent");
  g.w = scaled(w, 1.0 / s);
  if (std::abs(q_form(g.v)) > tol || std::abs(q_form(g.w)) > tol || std::abs(bilinear_b(g.v, g.w)) > tol)
    throw Error(Errc::NotIsotropicPair, "span is not isotropic");
  if (std::abs(g.v[2]) <= tol && std::abs(g.w[2]) <= tol) {
    auto [xv, yv] = split_rank1(g.v[0], g.v[1], g.v[3], g.v[4]);
    auto [xw, yw] = split_rank1(g.w[0], g.w[1], g.w[3], g.w[4]);
    if (chordal(xv, xw) < 1e-6) {
      g.tag = Orientation::Vertical;
      g.base = xv;
    } else if (chordal(yv, yw) < 1e-6) {
      g.tag = Orientation::Horizontal;
      g.base = yv;
    }
  }
  return g;
}

// {x} x CP1
inline LightGeodesic vertical_geodesic(const CP1& x) {
  return make_geodesic(q2_join_vec(x, cp1(1, 0)), q2_join_vec(x, cp1(0, 1)));
}

// CP1 x {y}
inline LightGeodesic horizontal_geodesic(const CP1& y) {
  return make_geodesic(q2_join_vec(cp1(1, 0), y), q2_join_vec(cp1(0, 1), y));
}

inline LightGeodesic geodesic_through(const QuadricPoint& p, const QuadricPoint& q, double tol = kQuadricTol) {
  if (chordal(p, q) <= tol) throw Error(Errc::NotIsotropicPair, "points coincide");
  if (std::abs(bilinear_b(p.coords(), q.coords())) > tol) throw Error(Errc::NotIsotropicPair, "b(p,q) != 0");
  return make_geodesic(p.coords(), q.coords(), tol);
}

// ---- light cones

struct LightCone {
  QuadricPoint vertex;
};

inline bool cone_contains(const QuadricPoint& vertex, const QuadricPoint& p, double tol = kQuadricTol) {
  return std::abs(bilinear_b(vertex.coords(), p.coords())) <= tol;
}

inline bool cone_contains(const LightCone& c, const QuadricPoint& p, double tol = kQuadricTol) {
  return cone_contains(c.vertex, p, tol);
}

namespace detail {

inline bool model_gram(const CVec5& f2, const CVec5& f3, const CVec5& f4) {
  const double t = 1e-12;
  return std::abs(bilinear_b(f2, f2)) < t && std::abs(bilinear_b(f4, f4)) < t &&
         std::abs(bilinear_b(f2, f4) + 0.5) < t && std::abs(bilinear_b(f3, f3) + 1.0) < t &&
         std::abs(bilinear_b(f2, f3)) < t && std::abs(bilinear_b(f3, f4)) < t;
}

}  // namespace detail

// A form-preserving matrix whose first column is the vertex lift; columns follow the
// Gram pattern of the standard basis.
inline Mat5 witt_frame(const QuadricPoint& vertex) {
  const CVec5 p = vertex.coords();
  std::size_t k = 0;
  double best = -1;
  for (std::size_t i = 0; i < 5; ++i) {
    double bi = std::abs(bilinear_b(p, unit<5>(i)));
    if (bi > best) best = bi, k = i;
  }
  const CVec5 r = scaled(unit<5>(k), 1.0 / (2.0 * bilinear_b(p, unit<5>(k))));
  const CVec5 qq = axpy(-bilinear_b(r, r), p, r);
  auto proj = [&](const CVec5& x) {
    CVec5 y = axpy(-2.0 * bilinear_b(x, qq), p, x);
    return axpy(-2.0 * bilinear_b(x, p), qq, y);
  };

  CVec5 f2 = proj(unit<5>(1)), f3 = proj(unit<5>(2)), f4 = proj(unit<5>(3));
  if (!detail::model_gram(f2, f3, f4)) {
    // Hermitian-orthonormal basis of the complement, by pivoted Gram-Schmidt
    std::array<CVec5, 5> cand;
    for (std::size_t i = 0; i < 5; ++i) cand[i] = proj(unit<5>(i));
    std::array<CVec5, 3> u;
    for (std::size_t m = 0; m < 3; ++m) {
      std::size_t piv = 0;
      double pn = -1;
      for (std::size_t i = 0; i < 5; ++i)
        if (norm2(cand[i]) > pn) pn = norm2(cand[i]), piv = i;
      u[m] = scaled(cand[piv], 1.0 / std::sqrt(pn));
      for (auto& c : cand) c = axpy(-hdot(u[m], c), u[m], c);
    }
    // b-orthonormal basis o1, o2, o3
    std::array<CVec5, 3> o;
    std::array<CVec5, 3> rest = u;
    std::size_t nrest = 3;
    for (std::size_t m = 0; m < 3; ++m) {
      CVec5 best_c{};
      double bb = -1;
      for (std::size_t i = 0; i < nrest; ++i) {
        for (std::size_t j = i; j < nrest; ++j) {
          CVec5 c = i == j ? rest[i] : axpy(1.0, rest[i], rest[j]);
          double val = std::abs(bilinear_b(c, c)) / norm2(c);
          if (val > bb) bb = val, best_c = c;
        }
      }
      o[m] = scaled(best_c, 1.0 / std::sqrt(bilinear_b(best_c, best_c)));
      for (std::size_t i = 0; i < nrest; ++i) rest[i] = axpy(-bilinear_b(rest[i], o[m]), o[m], rest[i]);
      // drop the weakest remaining vector, re-orthonormalize the others
      std::size_t weakest = 0;
      for (std::size_t i = 1; i < nrest; ++i)
        if (norm2(rest[i]) < norm2(rest[weakest])) weakest = i;
      rest[weakest] = rest[nrest - 1];
      --nrest;
      for (std::size_t i = 0; i < nrest; ++i) {
        for (std::size_t j = 0; j < i; ++j) rest[i] = axpy(-hdot(rest[j], rest[i]), rest[j], rest[i]);
        rest[i] = scaled(rest[i], 1.0 / norm(rest[i]));
      }
    }
    const cplx I(0, 1);
    f2 = axpy(I, o[1], o[0]);
    f4 = scaled(axpy(-I, o[1], o[0]), -0.25);
    f3 = scaled(o[2], I);
  }
  Mat5 a{};
  const std::array<CVec5, 5> cols{p, f2, f3, f4, qq};
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < 5; ++i) a[i][j] = cols[j][i];
  return a;
}

// The CP1 of light geodesics through a vertex: t = [s:r] goes to the geodesic through the
// vertex and frame * (0, s^2, i s r, r^2, 0).
struct ConeFamily {
  QuadricPoint vertex;
  Mat5 frame;

  CVec5 direction(const CP1& t) const {
    const cplx s = t[0], r = t[1];
    const CVec5 m{0.0, s * s, cplx(0, 1) * s * r, r * r, 0.0};
    return apply(frame, m);
  }
  LightGeodesic operator()(const CP1& t) const { return make_geodesic(vertex.coords(), direction(t), 1e-8); }
};

inline ConeFamily cone_geodesics(const QuadricPoint& vertex) { return ConeFamily{vertex, witt_frame(vertex)}; }

}  // namespace orthoklein
