#pragma once

#include <optional>
#include <vector>

#include "projq.hpp"

namespace orthoklein {

struct Mat2 {
  cplx a{1}, b{0}, c{0}, d{1};

  static Mat2 identity() { return {}; }
  static Mat2 diag(cplx x, cplx y) { return {x, 0, 0, y}; }

  cplx det() const { return a * d - b * c; }
  cplx trace() const { return a + d; }
  Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  Mat2 inverse() const {
    const cplx k = 1.0 / det();
    return {d * k, -b * k, -c * k, a * k};
  }
  // inverse for determinant one, no division by a noisy det
  Mat2 adj() const { return {d, -b, -c, a}; }
  Mat2 operator-() const { return {-a, -b, -c, -d}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  CVec<2> operator*(const CVec<2>& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }
  CVec<2> col(int j) const { return j == 0 ? CVec<2>{a, c} : CVec<2>{b, d}; }
};

inline double frob(const Mat2& m) {
  return std::sqrt(std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d));
}

// tolerance scaled by the size of the products, which bounds the rounding error of det
inline bool is_sl2(const Mat2& m, double tol = kUnimodularTol) {
  const double scale = std::max(1.0, std::abs(m.a * m.d) + std::abs(m.b * m.c));
  return std::abs(m.det() - 1.0) <= tol * scale;
}

inline void require_sl2(const Mat2& m, double tol = kUnimodularTol) {
  if (!is_sl2(m, tol)) throw Error(Errc::NotUnimodular, "|det - 1| = " + std::to_string(std::abs(m.det() - 1.0)));
}

// Word letters: +k is generator k (1-based), -k its inverse.
using Word = std::vector<int>;

struct PairElement {
  Mat2 g, h;
  std::optional<Word> word;

  PairElement() = default;
  PairElement(const Mat2& g_, const Mat2& h_) : g(g_), h(h_) {}
  PairElement(const Mat2& g_, const Mat2& h_, Word w) : g(g_), h(h_), word(std::move(w)) {}

  PairElement operator*(const PairElement& o) const { return {g * o.g, h * o.h}; }
  PairElement inverse() const { return {g.adj(), h.adj()}; }
};

inline CP1 mobius_apply(const Mat2& g, const CP1& x) { return CP1(g * x.c); }

// ---- element classification

enum class ElementKind { Identity, Elliptic, Parabolic, Loxodromic };

inline const char* element_kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::Identity: return "Identity";
    case ElementKind::Elliptic: return "Elliptic";
    case ElementKind::Parabolic: return "Parabolic";
    default: return "Loxodromic";
  }
}

struct ElementInfo {
  ElementKind kind = ElementKind::Identity;
  std::vector<CP1> fixed;  // attracting first for loxodromic
  double tau_len = 0;
};

namespace detail {

inline CP1 eigenvector(const Mat2& g, cplx lam) {
  CVec<2> u{g.b, lam - g.a}, v{lam - g.d, g.c};
  return CP1(norm2(u) >= norm2(v) ? u : v);
}

}  // namespace detail

inline ElementInfo classify_element(const Mat2& g, double tol = 1e-9) {
  ElementInfo info;
  const cplx tr = g.trace();
  const cplx disc = tr * tr - 4.0 * g.det();
  if (std::abs(disc) <= tol) {
    const double off = std::max({std::abs(g.b), std::abs(g.c), std::abs(g.a - g.d)});
    if (off <= tol) {
      info.kind = ElementKind::Identity;
      return info;
    }
    info.kind = ElementKind::Parabolic;
    info.fixed.push_back(detail::eigenvector(g, tr / 2.0));
    return info;
  }
  const cplx sq = std::sqrt(disc);
  cplx l1 = (tr + sq) / 2.0, l2 = (tr - sq) / 2.0;
  if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);
  if (std::abs(tr.imag()) <= tol && std::abs(tr.real()) < 2.0) {
    info.kind = ElementKind::Elliptic;
  } else {
    info.kind = ElementKind::Loxodromic;
    info.tau_len = std::log(std::abs(l1));
  }
  info.fixed.push_back(detail::eigenvector(g, l1));
  info.fixed.push_back(detail::eigenvector(g, l2));
  return info;
}

// ---- projective matrices

template <std::size_t N>
struct ProjMat {
  CMat<N> m{};

  ProjMat() : m(identity_mat<N>()) { m = unflatten<N>(normalized(flatten(m))); }
  explicit ProjMat(const CMat<N>& raw) : m(unflatten<N>(normalized(flatten(raw)))) {}
};

using ProjMat5 = ProjMat<5>;
using ProjMat4 = ProjMat<4>;

template <std::size_t N>
double proj_distance(const ProjMat<N>& a, const ProjMat<N>& b) {
  return line_distance(flatten(a.m), flatten(b.m));
}

template <std::size_t N>
double proj_distance(const CMat<N>& a, const CMat<N>& b) {
  return line_distance(flatten(a), flatten(b));
}

// relative deviation of M^T Q M from a multiple of Q
inline double orthogonality_defect(const Mat5& m) {
  const Mat5 g = matmul(transpose(m), matmul(form_matrix(), m));
  return proj_distance(g, form_matrix());
}

namespace detail {

inline constexpr std::size_t kIdx[2][2] = {{0, 1}, {3, 4}};

}  // namespace detail

// M -> g M h^{-1} on [[z1, z2], [z4, z5]], z3 fixed
inline Mat5 psi_raw(const Mat2& g, const Mat2& h) {
  const Mat2 hi = h.adj();
  const cplx G[2][2] = {{g.a, g.b}, {g.c, g.d}};
  const cplx H[2][2] = {{hi.a, hi.b}, {hi.c, hi.d}};
  Mat5 p{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) p[detail::kIdx[i][j]][detail::kIdx[k][l]] = G[i][k] * H[l][j];
  p[2][2] = 1.0;
  return p;
}

inline Mat5 psi_raw(const PairElement& p) { return psi_raw(p.g, p.h); }

inline ProjMat5 psi(const PairElement& p, double tol = kUnimodularTol) {
  require_sl2(p.g, tol);
  require_sl2(p.h, tol);
  return ProjMat5(psi_raw(p));
}

// M -> M^T on the 2x2 block: swaps z2 and z4
inline const Mat5& flip_matrix() {
  static const Mat5 f = [] {
    Mat5 m{};
    m[0][0] = m[2][2] = m[4][4] = 1.0;
    m[1][3] = m[3][1] = 1.0;
    return m;
  }();
  return f;
}

inline Mat5 a_matrix(double lambda, double mu) {
  Mat5 m{};
  m[0][0] = std::exp(lambda);
  m[1][1] = std::exp(mu);
  m[2][2] = 1.0;
  m[3][3] = std::exp(-mu);
  m[4][4] = std::exp(-lambda);
  return m;
}

inline Mat5 diag5(double d0, double d1, double d2, double d3, double d4) {
  Mat5 m{};
  m[0][0] = d0, m[1][1] = d1, m[2][2] = d2, m[3][3] = d3, m[4][4] = d4;
  return m;
}

// ---- Theta and the action

inline QuadricPoint embed_sl2(const Mat2& g, double tol = kUnimodularTol) {
  require_sl2(g, tol);
  return quadric_point_unchecked({g.a, g.b, 1.0, g.c, g.d});
}

inline Mat2 theta_extract(const QuadricPoint& p, double tol = kQ2Tol) {
  const auto& z = p.coords();
  if (std::abs(z[2]) <= tol) throw Error(Errc::OnQ2, "|z3| under threshold");
  const cplx s = 1.0 / z[2];
  return {z[0] * s, z[1] * s, z[3] * s, z[4] * s};
}

inline QuadricPoint act(const Mat5& m, const QuadricPoint& x) { return quadric_point_unchecked(apply(m, x.coords())); }

inline QuadricPoint act(const PairElement& p, const QuadricPoint& x) { return act(psi_raw(p), x); }

// ---- 2x2 singular value decomposition

struct Svd2 {
  Mat2 k1;
  double sigma = 0;
  Mat2 k2;
};

// SU(2) matrix with first column u (unit)
inline Mat2 su2_from_column(const CVec<2>& u) { return {u[0], -std::conj(u[1]), u[1], std::conj(u[0])}; }

inline Svd2 svd2(const Mat2& g) {
  const Mat2 H = g.adjoint() * g;
  const double h11 = H.a.real(), h22 = H.d.real();
  const double t = h11 + h22;
  const double r = std::sqrt((h11 - h22) * (h11 - h22) + 4.0 * std::norm(H.b));
  const double s1sq = 0.5 * (t + r);
  const double s2sq = std::norm(g.det()) / s1sq;
  CVec<2> c1{h11 - s2sq, H.c}, c2{H.b, h22 - s2sq};
  CVec<2> v = norm2(c1) >= norm2(c2) ? c1 : c2;
  if (norm2(v) == 0.0) v = {1.0, 0.0};
  v = normalized(v);
  CVec<2> u = g * v;
  const double nu = norm(u);
  u = scaled(u, 1.0 / nu);
  Svd2 s;
  s.k1 = su2_from_column(u);
  s.k2 = su2_from_column(v).adjoint();
  s.sigma = std::max(0.0, 0.5 * std::log(s1sq));
  return s;
}

inline double sigma_of(const Mat2& g) {
  const double h11 = std::norm(g.a) + std::norm(g.c), h22 = std::norm(g.b) + std::norm(g.d);
  const cplx h12 = std::conj(g.a) * g.b + std::conj(g.c) * g.d;
  const double r = std::sqrt((h11 - h22) * (h11 - h22) + 4.0 * std::norm(h12));
  return std::max(0.0, 0.5 * std::log(0.5 * (h11 + h22 + r)));
}

// ---- Cartan decomposition

struct CartanData {
  double lambda = 0, mu = 0;
  PairElement k1, k2;
  bool flip = false;
  double sigma_g = 0, sigma_h = 0;
};

inline const Mat2& weyl_w() {
  static const Mat2 w{0.0, 1.0, -1.0, 0.0};
  return w;
}

inline CartanData cartan_kak(const PairElement& p) {
  const Svd2 sg = svd2(p.g), sh = svd2(p.h);
  CartanData c;
  c.sigma_g = sg.sigma;
  c.sigma_h = sh.sigma;
  c.mu = sg.sigma + sh.sigma;
  c.flip = sg.sigma < sh.sigma;
  if (!c.flip) {
    c.lambda = sg.sigma - sh.sigma;
    c.k1 = PairElement(sg.k1, sh.k1);
    c.k2 = PairElement(sg.k2, sh.k2);
  } else {
    const Mat2& w = weyl_w();
    const Mat2 wi = w.adj();
    c.lambda = sh.sigma - sg.sigma;
    c.k1 = PairElement(sg.k1 * w, sh.k1 * w);
    c.k2 = PairElement(wi * sg.k2, wi * sh.k2);
  }
  return c;
}

// psi(k1) F^flip a(lambda, mu) F^flip psi(k2)
inline Mat5 cartan_middle(const CartanData& c, const Mat5& mid) {
  if (!c.flip) return mid;
  return matmul(flip_matrix(), matmul(mid, flip_matrix()));
}

inline Mat5 cartan_reconstruct(const CartanData& c) {
  return matmul(psi_raw(c.k1), matmul(cartan_middle(c, a_matrix(c.lambda, c.mu)), psi_raw(c.k2)));
}

// ---- upper half-space

struct HPoint {
  bool boundary = false;
  CP1 at;        // boundary point
  cplx x{0};     // interior horizontal coordinate
  double y = 1;  // interior height

  static HPoint interior(cplx x, double y) {
    HPoint p;
    p.x = x;
    p.y = y;
    return p;
  }
  static HPoint on_boundary(const CP1& z) {
    HPoint p;
    p.boundary = true;
    p.at = z;
    return p;
  }
};

// Poincare extension, z + t j -> (a q + b)(c q + d)^{-1}
inline HPoint poincare_apply(const Mat2& g, const HPoint& p) {
  if (p.boundary) return HPoint::on_boundary(mobius_apply(g, p.at));
  const cplx cz = g.c * p.x + g.d;
  const double t2 = p.y * p.y;
  const double den = std::norm(cz) + std::norm(g.c) * t2;
  const cplx x = ((g.a * p.x + g.b) * std::conj(cz) + g.a * std::conj(g.c) * t2) / den;
  return HPoint::interior(x, p.y / den);
}

inline std::array<double, 3> bloch(const HPoint& p) {
  cplx r11, r12, r22;
  if (p.boundary) {
    const auto& v = p.at.c;
    r11 = std::norm(v[0]);
    r12 = v[0] * std::conj(v[1]);
    r22 = std::norm(v[1]);
  } else {
    const double s = std::norm(p.x) + p.y * p.y;
    const double n = s + 1.0;
    r11 = s / n;
    r12 = p.x / n;
    r22 = 1.0 / n;
  }
  return {2.0 * r12.real(), -2.0 * r12.imag(), (r11 - r22).real()};
}

// half the Euclidean distance of Bloch vectors; on the boundary this is the chordal distance
inline double hpoint_distance(const HPoint& p, const HPoint& q) {
  const auto a = bloch(p), b = bloch(q);
  return 0.5 * std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

inline HPoint delta_map(const QuadricPoint& x, double tol = kQ2Tol) {
  const auto& z = x.coords();
  if (std::abs(z[2]) <= tol) {
    return HPoint::on_boundary(split_rank1(z[0], z[1], z[3], z[4]).first);
  }
  const Mat2 g = theta_extract(x, tol);
  const double den = std::norm(g.c) + std::norm(g.d);
  return HPoint::interior((g.b * std::conj(g.d) + g.a * std::conj(g.c)) / den, 1.0 / den);
}

// ---- quotient maps

inline QuadricPoint involution_j(const QuadricPoint& x) {
  const auto& z = x.coords();
  return quadric_point_unchecked({-z[0], -z[1], z[2], -z[3], -z[4]});
}

inline CP3 f_map(const QuadricPoint& x) {
  const auto& z = x.coords();
  return CP3(CVec<4>{z[0], z[1], z[3], z[4]});
}

inline Mat4 tau_raw(const PairElement& p) {
  const Mat5 m = psi_raw(p);
  constexpr std::size_t k[4] = {0, 1, 3, 4};
  Mat4 t{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) t[i][j] = m[k[i]][k[j]];
  return t;
}

inline ProjMat4 tau(const PairElement& p) { return ProjMat4(tau_raw(p)); }

inline CP3 apply(const ProjMat4& t, const CP3& x) { return CP3(apply(t.m, x.c)); }

}  // namespace orthoklein
