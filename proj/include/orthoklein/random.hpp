#pragma once

#include <cstdint>
#include <random>

#include "liegrp.hpp"

namespace orthoklein {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

using Rng = std::mt19937_64;

inline cplx random_cplx(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  const double re = n(rng);
  return {re, n(rng)};
}

template <std::size_t N>
CVec<N> random_cvec(Rng& rng) {
  CVec<N> v;
  for (auto& x : v) x = random_cplx(rng);
  return v;
}

inline Mat2 random_su2(Rng& rng) {
  CVec<2> u{random_cplx(rng), random_cplx(rng)};
  return su2_from_column(scaled(u, 1.0 / norm(u)));
}

// Gaussian entries rescaled to determinant one
inline Mat2 random_sl2(Rng& rng, double scale = 1.0) {
  for (;;) {
    Mat2 m{random_cplx(rng, scale), random_cplx(rng, scale), random_cplx(rng, scale), random_cplx(rng, scale)};
    const cplx d = m.det();
    if (std::abs(d) < 1e-3 * scale * scale) continue;
    return m * (1.0 / std::sqrt(d));
  }
}

// k1 diag(e^s, e^-s) k2 with s uniform in [0, smax]
inline Mat2 random_sl2_sigma(Rng& rng, double smax) {
  std::uniform_real_distribution<double> u(0.0, smax);
  const double s = u(rng);
  return random_su2(rng) * Mat2::diag(std::exp(s), std::exp(-s)) * random_su2(rng);
}

inline CP1 random_cp1(Rng& rng) { return CP1(random_cvec<2>(rng)); }

inline QuadricPoint random_theta_point(Rng& rng) { return embed_sl2(random_sl2(rng)); }

inline QuadricPoint random_q2_point(Rng& rng) { return q2_join(random_cp1(rng), random_cp1(rng)); }

// Theta with probability 3/4, Q2 otherwise
inline QuadricPoint random_quadric_point(Rng& rng) {
  std::uniform_int_distribution<int> k(0, 3);
  return k(rng) == 0 ? random_q2_point(rng) : random_theta_point(rng);
}

}  // namespace orthoklein
