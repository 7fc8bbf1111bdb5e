#include <gtest/gtest.h>

#include "orthoklein/random.hpp"

using namespace orthoklein;

namespace {

QuadricPoint qp(std::initializer_list<cplx> l) {
  CVec5 v{};
  std::size_t i = 0;
  for (auto x : l) v[i++] = x;
  return quadric_point(v);
}

const Mat2 kDiag2 = Mat2::diag(2.0, 0.5);
const Mat2 kPar{1.0, 1.0, 0.0, 1.0};
const Mat2 kI = Mat2::identity();

double mat2_dist(const Mat2& a, const Mat2& b) { return frob(a - b); }

}  // namespace

TEST(Mobius, Examples) {
  EXPECT_TRUE(proj_equal(mobius_apply(kI, cp1(1, 1)), cp1(1, 1)));
  EXPECT_TRUE(proj_equal(mobius_apply(kDiag2, cp1(1, 0)), cp1(1, 0)));
  EXPECT_TRUE(proj_equal(mobius_apply(kPar, cp1(1, 1)), cp1(2, 1)));
}

TEST(Classify, Examples) {
  const ElementInfo lox = classify_element(kDiag2);
  EXPECT_EQ(lox.kind, ElementKind::Loxodromic);
  ASSERT_EQ(lox.fixed.size(), 2u);
  EXPECT_TRUE(proj_equal(lox.fixed[0], cp1(1, 0)));
  EXPECT_TRUE(proj_equal(lox.fixed[1], cp1(0, 1)));
  EXPECT_NEAR(lox.tau_len, std::log(2.0), 1e-15);

  const ElementInfo par = classify_element(kPar);
  EXPECT_EQ(par.kind, ElementKind::Parabolic);
  ASSERT_EQ(par.fixed.size(), 1u);
  EXPECT_TRUE(proj_equal(par.fixed[0], cp1(1, 0)));
  EXPECT_EQ(par.tau_len, 0.0);

  EXPECT_EQ(classify_element(kI).kind, ElementKind::Identity);
  EXPECT_EQ(classify_element(-kI).kind, ElementKind::Identity);
  EXPECT_EQ(classify_element(kI).tau_len, 0.0);

  const Mat2 rot{std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3)};
  EXPECT_EQ(classify_element(rot).kind, ElementKind::Elliptic);
  EXPECT_EQ(classify_element(rot).tau_len, 0.0);
}

TEST(Classify, FixedPointsAreFixed) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Mat2 g = random_sl2(rng);
    const ElementInfo info = classify_element(g);
    for (const auto& f : info.fixed) EXPECT_LT(chordal(mobius_apply(g, f), f), 1e-9);
    if (info.kind == ElementKind::Loxodromic) {
      const CP1 z = random_cp1(rng);
      CP1 w = z;
      for (int k = 0; k < 200; ++k) w = mobius_apply(g, w);
      if (info.tau_len > 0.2) {
        EXPECT_LT(chordal(w, info.fixed[0]), 1e-6);
      }
    }
  }
}

TEST(Psi, Examples) {
  EXPECT_LT(proj_distance(psi({kI, kI}), ProjMat5()), 1e-15);
  EXPECT_LT(proj_distance(psi({-kI, -kI}), ProjMat5()), 1e-15);
  EXPECT_GT(proj_distance(psi({-kI, kI}), ProjMat5()), 0.1);
  EXPECT_LT(proj_distance(psi({kDiag2, kI}), ProjMat5(diag5(2, 2, 1, 0.5, 0.5))), 1e-15);
  try {
    psi({Mat2::diag(2.0, 2.0), kI});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::NotUnimodular);
  }
}

TEST(Psi, FormPreservationAndHomomorphism) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const PairElement p{random_sl2(rng), random_sl2(rng)}, r{random_sl2(rng), random_sl2(rng)};
    EXPECT_LT(orthogonality_defect(psi_raw(p)), 1e-12);
    EXPECT_LT(proj_distance(psi(p * r), ProjMat5(matmul(psi_raw(p), psi_raw(r)))), 1e-12);
  }
}

TEST(Embed, Examples) {
  EXPECT_LT(chordal(embed_sl2(kI), qp({1, 0, 1, 0, 1})), 1e-15);
  EXPECT_LT(chordal(embed_sl2(kDiag2), qp({2, 0, 1, 0, 0.5})), 1e-15);
  EXPECT_LT(chordal(embed_sl2(kPar), qp({1, 1, 1, 0, 1})), 1e-15);
  EXPECT_LT(mat2_dist(theta_extract(qp({2, 0, 1, 0, 0.5})), kDiag2), 1e-15);
  EXPECT_LT(mat2_dist(theta_extract(qp({2, 0, 2, 0, 2})), kI), 1e-15);
  try {
    theta_extract(qp({1, 0, 0, 0, 0}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::OnQ2);
  }
}

TEST(Act, PathsAgree) {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const PairElement p{random_sl2(rng), random_sl2(rng)};
    const Mat2 x = random_sl2(rng);
    const QuadricPoint a = act(p, embed_sl2(x));
    EXPECT_LT(chordal(a, embed_sl2(p.g * x * p.h.inverse())), 1e-9);
    const Mat2 target = p.g * x * p.h.inverse();
    EXPECT_LT(mat2_dist(theta_extract(a), target) / frob(target), 1e-9);
    const CP1 u = random_cp1(rng), w = random_cp1(rng);
    auto [gx, hy] = q2_split(act(p, q2_join(u, w)));
    EXPECT_LT(chordal(gx, mobius_apply(p.g, u)), 1e-9);
    EXPECT_LT(chordal(hy, mobius_apply(p.h, w)), 1e-9);
  }
  EXPECT_LT(chordal(act({kI, kI}, qp({1, 1, 1, 1, 2})), qp({1, 1, 1, 1, 2})), 1e-15);
}

TEST(Svd2, Examples) {
  EXPECT_EQ(svd2(kI).sigma, 0.0);
  const Svd2 d = svd2(kDiag2);
  EXPECT_NEAR(d.sigma, std::log(2.0), 1e-15);
  EXPECT_LT(mat2_dist(d.k1, kI), 1e-15);
  EXPECT_LT(mat2_dist(d.k2, kI), 1e-15);
}

TEST(Svd2, Reconstruction) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 g = i % 2 ? random_sl2(rng) : random_sl2_sigma(rng, 20.0);
    const Svd2 s = svd2(g);
    const Mat2 r = s.k1 * Mat2::diag(std::exp(s.sigma), std::exp(-s.sigma)) * s.k2;
    EXPECT_LT(mat2_dist(r, g) / frob(g), 1e-10);
    EXPECT_LT(mat2_dist(s.k1 * s.k1.adjoint(), kI), 1e-12);
    EXPECT_LT(mat2_dist(s.k2 * s.k2.adjoint(), kI), 1e-12);
    EXPECT_LT(std::abs(s.k1.det() - 1.0), 1e-12);
    // independent check: top eigenvalue of g*g in extended precision
    using lcplx = std::complex<long double>;
    const lcplx a(g.a), b(g.b), c(g.c), d(g.d);
    const long double h11 = std::norm(a) + std::norm(c), h22 = std::norm(b) + std::norm(d);
    const lcplx h12 = std::conj(a) * b + std::conj(c) * d;
    const long double top = 0.5L * (h11 + h22 + std::sqrt((h11 - h22) * (h11 - h22) + 4.0L * std::norm(h12)));
    EXPECT_NEAR(static_cast<double>(std::exp(static_cast<long double>(s.sigma)) / std::sqrt(top)), 1.0, 1e-10);
    EXPECT_NEAR(static_cast<double>(std::exp(-static_cast<long double>(s.sigma)) * std::sqrt(top)), 1.0, 1e-10);
    EXPECT_NEAR(s.sigma, sigma_of(g), 1e-10);
  }
}

TEST(Cartan, Examples) {
  const CartanData id = cartan_kak({kI, kI});
  EXPECT_EQ(id.lambda, 0.0);
  EXPECT_EQ(id.mu, 0.0);
  EXPECT_FALSE(id.flip);
  const CartanData c1 = cartan_kak({kDiag2, kI});
  EXPECT_NEAR(c1.lambda, std::log(2.0), 1e-15);
  EXPECT_NEAR(c1.mu, std::log(2.0), 1e-15);
  const CartanData c2 = cartan_kak({Mat2::diag(4.0, 0.25), kDiag2});
  EXPECT_NEAR(c2.lambda, std::log(2.0), 1e-15);
  EXPECT_NEAR(c2.mu, std::log(8.0), 1e-15);
  EXPECT_FALSE(c2.flip);
  const CartanData c3 = cartan_kak({kDiag2, Mat2::diag(4.0, 0.25)});
  EXPECT_TRUE(c3.flip);
  EXPECT_NEAR(c3.lambda, std::log(2.0), 1e-15);
}

TEST(Cartan, Reconstruction) {
  Rng rng(15);
  for (int i = 0; i < 500; ++i) {
    PairElement p;
    switch (i % 3) {
      case 0: p = {random_sl2(rng), random_sl2(rng)}; break;
      case 1: p = {random_sl2_sigma(rng, 20.0), random_sl2_sigma(rng, 20.0)}; break;
      default: p = {random_sl2_sigma(rng, 1e-6), random_sl2_sigma(rng, 20.0)}; break;
    }
    const CartanData c = cartan_kak(p);
    EXPECT_GE(c.lambda, 0.0);
    EXPECT_GE(c.mu, c.lambda);
    EXPECT_LT(proj_distance(cartan_reconstruct(c), psi_raw(p)), 1e-8);
    EXPECT_LT(orthogonality_defect(flip_matrix()), 1e-15);
  }
}

TEST(Delta, Examples) {
  const HPoint a = delta_map(embed_sl2(kI));
  ASSERT_FALSE(a.boundary);
  EXPECT_LT(std::abs(a.x), 1e-15);
  EXPECT_NEAR(a.y, 1.0, 1e-15);
  const HPoint b = delta_map(embed_sl2(kDiag2));
  EXPECT_LT(std::abs(b.x), 1e-15);
  EXPECT_NEAR(b.y, 4.0, 1e-14);
  const HPoint c = delta_map(qp({1, 0, 0, 0, 0}));
  ASSERT_TRUE(c.boundary);
  EXPECT_TRUE(proj_equal(c.at, cp1(1, 0)));
}

TEST(Delta, Equivariance) {
  Rng rng(16);
  for (int i = 0; i < 200; ++i) {
    const Mat2 g = random_sl2(rng);
    const QuadricPoint x = random_theta_point(rng);
    const HPoint l = delta_map(act({g, kI}, x));
    const HPoint r = poincare_apply(g, delta_map(x));
    EXPECT_LT(hpoint_distance(l, r), 1e-9);
    // right factor is invisible
    const HPoint k = delta_map(act({kI, random_su2(rng)}, x));
    EXPECT_LT(hpoint_distance(k, delta_map(x)), 1e-9);
  }
}

TEST(Delta, ContinuityAcrossQ2) {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const CP1 x = random_cp1(rng), y = random_cp1(rng);
    const CVec5 base = q2_join_vec(x, y);
    const Mat2 e{random_cplx(rng), random_cplx(rng), random_cplx(rng), random_cplx(rng)};
    const HPoint target = delta_map(quadric_point(base));
    double prev = 2;
    for (double eps = 1e-1; eps >= 1e-7; eps /= 10) {
      const Mat2 m{base[0] + eps * e.a, base[1] + eps * e.b, base[3] + eps * e.c, base[4] + eps * e.d};
      const QuadricPoint xk = quadric_point({m.a, m.b, std::sqrt(m.det()), m.c, m.d});
      const double d = hpoint_distance(delta_map(xk), target);
      EXPECT_LT(d, prev + 1e-12);
      prev = d;
    }
    EXPECT_LT(prev, 1e-5);
  }
}

TEST(QuotientMaps, JAndF) {
  EXPECT_LT(chordal(involution_j(qp({1, 0, 1, 0, 1})), qp({-1, 0, 1, 0, -1})), 1e-15);
  EXPECT_TRUE(proj_equal(f_map(qp({1, 0, 1, 0, 1})), CP3(CVec<4>{1, 0, 0, 1})));
  EXPECT_TRUE(proj_equal(f_map(qp({1, 0, 0, 0, 0})), CP3(CVec<4>{1, 0, 0, 0})));
  Rng rng(18);
  for (int i = 0; i < 100; ++i) {
    const QuadricPoint x = random_quadric_point(rng);
    EXPECT_LT(chordal(involution_j(involution_j(x)), x), 1e-15);
    EXPECT_LT(chordal(f_map(involution_j(x)), f_map(x)), 1e-15);
    const QuadricPoint q = random_q2_point(rng);
    EXPECT_LT(chordal(involution_j(q), q), 1e-15);
  }
}

TEST(QuotientMaps, Tau) {
  EXPECT_LT(proj_distance(tau({kI, kI}), ProjMat4()), 1e-15);
  EXPECT_LT(proj_distance(tau({-kI, kI}), ProjMat4()), 1e-15);
  EXPECT_LT(proj_distance(tau({kI, -kI}), ProjMat4()), 1e-15);
  EXPECT_LT(proj_distance(tau({-kI, -kI}), ProjMat4()), 1e-15);
  Rng rng(19);
  for (int i = 0; i < 200; ++i) {
    const PairElement p{random_sl2(rng), random_sl2(rng)};
    const QuadricPoint x = random_quadric_point(rng);
    EXPECT_LT(chordal(f_map(act(p, x)), apply(tau(p), f_map(x))), 1e-9);
  }
}
