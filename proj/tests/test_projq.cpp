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

CVec5 e(std::size_t k) { return unit<5>(k - 1); }

}  // namespace

TEST(QForm, Values) {
  EXPECT_EQ(q_form(e(1)), cplx(0));
  EXPECT_EQ(q_form({1, 1, 1, 1, 2}), cplx(0));
  EXPECT_EQ(q_form({1, 2, 3, 4, 5}), cplx(-12));
}

TEST(Bilinear, BasisAndPolarization) {
  EXPECT_EQ(bilinear_b(e(1), e(5)), cplx(0.5));
  EXPECT_EQ(bilinear_b(e(1), e(2)), cplx(0));
  Rng rng(kDefaultSeed);
  for (int i = 0; i < 100; ++i) {
    const CVec5 v = random_cvec<5>(rng), w = random_cvec<5>(rng);
    EXPECT_LE(std::abs(bilinear_b(v, v) - q_form(v)), 1e-12 * norm2(v));
    const cplx pol = 0.5 * (q_form(axpy(1.0, v, w)) - q_form(v) - q_form(w));
    EXPECT_LE(std::abs(bilinear_b(v, w) - pol), 1e-12 * (norm2(v) + norm2(w)));
    EXPECT_EQ(bilinear_b(v, w), bilinear_b(w, v));
  }
}

TEST(Normalize, CanonicalAndIdempotent) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const CVec5 v = scaled(random_cvec<5>(rng), random_cplx(rng, 100.0));
    const CVec5 n1 = normalized(v);
    const CVec5 n2 = normalized(n1);
    EXPECT_EQ(n1, n2);
    EXPECT_NEAR(norm(n1), 1.0, 1e-12);
    EXPECT_LT(line_distance(v, n1), 1e-12);
  }
  const CVec<2> tie = normalized(CVec<2>{cplx(0, 1), cplx(0, 1)});
  EXPECT_EQ(tie[0].imag(), 0.0);
  EXPECT_GT(tie[0].real(), 0.0);
  EXPECT_THROW(normalized(CVec<2>{}), std::invalid_argument);
}

TEST(Quadric, Membership) {
  EXPECT_NO_THROW(qp({1, 1, 1, 1, 2}));
  try {
    qp({1, 2, 3, 4, 5});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::NotOnQuadric);
  }
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) EXPECT_LE(std::abs(q_form(random_theta_point(rng).coords())), 1e-10);
}

TEST(Q2, SplitExamples) {
  auto [x1, y1] = q2_split(qp({1, 0, 0, 0, 0}));
  EXPECT_TRUE(proj_equal(x1, cp1(1, 0)));
  EXPECT_TRUE(proj_equal(y1, cp1(0, 1)));
  auto [x5, y5] = q2_split(qp({0, 0, 0, 0, 1}));
  EXPECT_TRUE(proj_equal(x5, cp1(0, 1)));
  EXPECT_TRUE(proj_equal(y5, cp1(1, 0)));
  try {
    q2_split(qp({1, 0, 1, 0, 1}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::NotOnQ2);
  }
}

TEST(Q2, JoinExamples) {
  EXPECT_LT(chordal(q2_join(cp1(1, 0), cp1(0, 1)), qp({1, 0, 0, 0, 0})), 1e-15);
  EXPECT_LT(chordal(q2_join(cp1(1, 1), cp1(1, 1)), qp({1, -1, 0, 1, -1})), 1e-15);
}

TEST(Q2, RoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const QuadricPoint p = random_q2_point(rng);
    auto [x, y] = q2_split(p);
    EXPECT_LT(chordal(q2_join(x, y), p), 1e-12);
    const CP1 a = random_cp1(rng), b = random_cp1(rng);
    auto [a2, b2] = q2_split(q2_join(a, b));
    EXPECT_LT(chordal(a, a2), 1e-12);
    EXPECT_LT(chordal(b, b2), 1e-12);
  }
}

TEST(Cone, Contains) {
  const QuadricPoint v = qp({1, 0, 0, 0, 0});
  EXPECT_TRUE(cone_contains(v, qp({0, 1, 0, 0, 0})));
  EXPECT_FALSE(cone_contains(v, qp({0, 0, 0, 0, 1})));
  // z2 z4 + z3^2 = 0 with z1 = z5 = 0
  EXPECT_TRUE(cone_contains(v, qp({0, 1, cplx(0, 2), 4, 0})));
  EXPECT_TRUE(cone_contains(v, qp({0, 1, 1, -1, 0})));
}

TEST(Geodesic, Through) {
  const LightGeodesic np = geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 1, 0, 0, 0}));
  EXPECT_EQ(np.tag, Orientation::Vertical);
  ASSERT_TRUE(np.base);
  EXPECT_TRUE(proj_equal(*np.base, cp1(1, 0)));
  const LightGeodesic nm = geodesic_through(qp({0, 0, 0, 1, 0}), qp({0, 0, 0, 0, 1}));
  EXPECT_EQ(nm.tag, Orientation::Vertical);
  EXPECT_TRUE(proj_equal(*nm.base, cp1(0, 1)));
  try {
    geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 0, 0, 0, 1}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::NotIsotropicPair);
  }
  const LightGeodesic hz = geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 0, 0, 1, 0}));
  EXPECT_EQ(hz.tag, Orientation::Horizontal);
  EXPECT_TRUE(proj_equal(*hz.base, cp1(0, 1)));
  const LightGeodesic off = geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 1, cplx(0, 2), 4, 0}));
  EXPECT_EQ(off.tag, Orientation::None);
}

TEST(Geodesic, LeavesMatchSplit) {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const CP1 x = random_cp1(rng), y = random_cp1(rng);
    const LightGeodesic v = vertical_geodesic(x);
    EXPECT_EQ(v.tag, Orientation::Vertical);
    EXPECT_LT(chordal(*v.base, x), 1e-12);
    EXPECT_TRUE(v.contains(q2_join(x, random_cp1(rng))));
    EXPECT_FALSE(v.contains(q2_join(y, random_cp1(rng)), 1e-6));
    const LightGeodesic h = horizontal_geodesic(y);
    EXPECT_EQ(h.tag, Orientation::Horizontal);
    EXPECT_TRUE(h.contains(q2_join(random_cp1(rng), y)));
  }
}

TEST(ConeGeodesics, ModelFibres) {
  const ConeFamily fam = cone_geodesics(qp({1, 0, 0, 0, 0}));
  const LightGeodesic g01 = fam(cp1(0, 1));
  const LightGeodesic e14 = geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 0, 0, 1, 0}));
  EXPECT_LT(geodesic_distance(g01, e14), 1e-12);
  const LightGeodesic g10 = fam(cp1(1, 0));
  const LightGeodesic e12 = geodesic_through(qp({1, 0, 0, 0, 0}), qp({0, 1, 0, 0, 0}));
  EXPECT_LT(geodesic_distance(g10, e12), 1e-12);
}

TEST(ConeGeodesics, WittFrameIsOrthogonal) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const QuadricPoint v = random_quadric_point(rng);
    const Mat5 a = witt_frame(v);
    const Mat5 g = matmul(transpose(a), matmul(form_matrix(), a));
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 5; ++c) EXPECT_LT(std::abs(g[r][c] - form_matrix()[r][c]), 1e-9);
    EXPECT_LT(line_distance(column(a, 0), v.coords()), 1e-14);
  }
}

TEST(ConeGeodesics, MembersLieOnCone) {
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const QuadricPoint v = random_quadric_point(rng);
    const ConeFamily fam = cone_geodesics(v);
    for (int i = 0; i < 50; ++i) {
      const LightGeodesic g = fam(random_cp1(rng));
      EXPECT_TRUE(g.contains(v));
      const QuadricPoint p = g.at(random_cp1(rng));
      EXPECT_LT(p.residual, 1e-9);
      EXPECT_TRUE(cone_contains(v, p));
    }
  }
}

// points of C(v): v-lift plus an isotropic vector of the frame's middle block
TEST(ConeGeodesics, SweepsCone) {
  Rng rng(7);
  std::vector<CP1> grid;
  const int n = 60;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < 2 * n; ++j) {
      const double th = M_PI * i / n, ph = 2 * M_PI * j / (2 * n);
      grid.push_back(cp1(std::cos(th / 2), std::polar(std::sin(th / 2), ph)));
    }
  for (int k = 0; k < 5; ++k) {
    const QuadricPoint v = random_quadric_point(rng);
    const ConeFamily fam = cone_geodesics(v);
    // random cone point from the model: s^2 f2 + i s r f3 + r^2 f4 + c p
    const CP1 t = random_cp1(rng);
    const CVec5 r = axpy(random_cplx(rng), v.coords(), fam.direction(t));
    const QuadricPoint p = quadric_point(r);
    ASSERT_TRUE(cone_contains(v, p));
    // coarse grid then local refinement on the sphere
    double best = 1;
    CP1 bt;
    for (const auto& g : grid) {
      const double d = fam(g).distance(p);
      if (d < best) best = d, bt = g;
    }
    double step = M_PI / n;
    for (int it = 0; it < 60; ++it) {
      bool moved = false;
      for (int dir = 0; dir < 4; ++dir) {
        const cplx z = affine(bt);
        const cplx dz = std::polar(step * (1 + std::abs(z) * std::abs(z)), M_PI / 2 * dir);
        const CP1 cand = std::isfinite(z.real()) ? cp1(z + dz, 1) : cp1(1, dz);
        const double d = fam(cand).distance(p);
        if (d < best) best = d, bt = cand, moved = true;
      }
      if (!moved) step /= 2;
    }
    EXPECT_LT(best, 1e-6);
  }
}
