#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace orthoklein {

using cplx = std::complex<double>;

template <std::size_t N>
using CVec = std::array<cplx, N>;
using CVec5 = CVec<5>;

template <std::size_t N>
using CMat = std::array<std::array<cplx, N>, N>;
using Mat5 = CMat<5>;
using Mat4 = CMat<4>;

// default tolerances
inline constexpr double kQuadricTol = 1e-9;
inline constexpr double kQ2Tol = 1e-9;
inline constexpr double kEqualTol = 1e-9;
inline constexpr double kUnimodularTol = 1e-9;

enum class Errc {
  NotOnQuadric,
  NotOnQ2,
  NotIsotropicPair,
  NotUnimodular,
  OnQ2,
  TooShort,
  NotConvergentFrame,
  UndefinedOnRepeller,
  NoDivergentWords,
  NoLoxodromic,
  MissingSchottkyData,
  NoConvergence,
  Schema,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotOnQuadric: return "NotOnQuadric";
    case Errc::NotOnQ2: return "NotOnQ2";
    case Errc::NotIsotropicPair: return "NotIsotropicPair";
    case Errc::NotUnimodular: return "NotUnimodular";
    case Errc::OnQ2: return "OnQ2";
    case Errc::TooShort: return "TooShort";
    case Errc::NotConvergentFrame: return "NotConvergentFrame";
    case Errc::UndefinedOnRepeller: return "UndefinedOnRepeller";
    case Errc::NoDivergentWords: return "NoDivergentWords";
    case Errc::NoLoxodromic: return "NoLoxodromic";
    case Errc::MissingSchottkyData: return "MissingSchottkyData";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::Schema: return "Schema";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// ---- vectors

template <std::size_t N>
double norm2(const CVec<N>& v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

template <std::size_t N>
double norm(const CVec<N>& v) {
  return std::sqrt(norm2(v));
}

// Hermitian inner product, conjugate-linear in the first slot
template <std::size_t N>
cplx hdot(const CVec<N>& u, const CVec<N>& v) {
  cplx s = 0;
  for (std::size_t i = 0; i < N; ++i) s += std::conj(u[i]) * v[i];
  return s;
}

template <std::size_t N>
CVec<N> scaled(const CVec<N>& v, cplx s) {
  CVec<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = v[i] * s;
  return r;
}

template <std::size_t N>
CVec<N> axpy(cplx a, const CVec<N>& x, const CVec<N>& y) {
  CVec<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a * x[i] + y[i];
  return r;
}

template <std::size_t N>
CVec<N> unit(std::size_t k) {
  CVec<N> r{};
  r[k] = 1.0;
  return r;
}

// sine of the Fubini-Study angle between the lines through u and v
template <std::size_t N>
double line_distance(const CVec<N>& u, const CVec<N>& v) {
  double nu = norm2(u), nv = norm2(v);
  if (nu == 0 || nv == 0) return 1.0;
  double w = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) w += std::norm(u[i] * v[j] - u[j] * v[i]);
  return std::min(1.0, std::sqrt(w / (nu * nv)));
}

// ---- square matrices

template <std::size_t N>
CMat<N> identity_mat() {
  CMat<N> m{};
  for (std::size_t i = 0; i < N; ++i) m[i][i] = 1.0;
  return m;
}

template <std::size_t N>
CMat<N> matmul(const CMat<N>& a, const CMat<N>& b) {
  CMat<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k) {
      if (a[i][k] == cplx(0)) continue;
      for (std::size_t j = 0; j < N; ++j) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

template <std::size_t N>
CVec<N> apply(const CMat<N>& a, const CVec<N>& v) {
  CVec<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i] += a[i][j] * v[j];
  return r;
}

template <std::size_t N>
CMat<N> adjoint(const CMat<N>& a) {
  CMat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i][j] = std::conj(a[j][i]);
  return r;
}

template <std::size_t N>
CMat<N> transpose(const CMat<N>& a) {
  CMat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i][j] = a[j][i];
  return r;
}

template <std::size_t N>
double frob2(const CMat<N>& a) {
  double s = 0;
  for (const auto& row : a)
    for (const auto& x : row) s += std::norm(x);
  return s;
}

template <std::size_t N>
CVec<N> column(const CMat<N>& a, std::size_t j) {
  CVec<N> c;
  for (std::size_t i = 0; i < N; ++i) c[i] = a[i][j];
  return c;
}

template <std::size_t N>
CVec<N * N> flatten(const CMat<N>& a) {
  CVec<N * N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i * N + j] = a[i][j];
  return r;
}

template <std::size_t N>
CMat<N> unflatten(const CVec<N * N>& v) {
  CMat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i][j] = v[i * N + j];
  return r;
}

// Gram matrix of the symmetric form b on C^5
inline const Mat5& form_matrix() {
  static const Mat5 q = [] {
    Mat5 m{};
    m[0][4] = m[4][0] = 0.5;
    m[1][3] = m[3][1] = -0.5;
    m[2][2] = -1.0;
    return m;
  }();
  return q;
}

}  // namespace orthoklein
