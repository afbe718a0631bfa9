#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lacuna/error.hpp"
#include "lacuna/trigpoly.hpp"
#include "oracles.hpp"

using namespace lacuna;
using oracle::kPi;


TEST_CASE("TrigPoly construction rules") {
  CHECK_THROWS_AS(TrigPoly(0, {}), Error);
  CHECK_THROWS_AS(TrigPoly(0, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(TrigPoly(0, {1.0, 0.0}), Error);
  CHECK_NOTHROW(TrigPoly(0, {0.0, 1.0}, true));
  const TrigPoly p(-2, {1.0, 2.0, 3.0});
  CHECK(p.max_freq() == 0);
  CHECK(p.degree() == 2);
  CHECK(p.coeff(-1) == cplx(2.0));
  CHECK(p.coeff(5) == cplx(0.0));
  CHECK(TrigPoly(3, {1.0, 1.0}).degree() == 4);
  CHECK(TrigPoly(0, {0.0, 2.0, 0.0}, true).trimmed() == TrigPoly(1, {2.0}));
}

TEST_CASE("fejer coefficients") {
  SUBCASE("d = 0 is the constant one half") {
    const TrigPoly k = fejer(0);
    CHECK(k.min_freq() == 0);
    REQUIRE(k.size() == 1);
    CHECK(k.coeffs()[0] == cplx(0.5));
  }
  SUBCASE("d = 2") {
    const TrigPoly k = fejer(2);
    CHECK(k.min_freq() == -2);
    const double expect[] = {1.0 / 6, 1.0 / 3, 0.5, 1.0 / 3, 1.0 / 6};
    for (int i = 0; i < 5; ++i) CHECK(k.coeffs()[static_cast<std::size_t>(i)].real() == doctest::Approx(expect[i]).epsilon(1e-15));
    CHECK(std::abs(k(0.0) - cplx(1.5)) < 1e-14);
    CHECK(oracle::fejer_closed(2, 1e-9) == doctest::Approx(1.5));
  }
  SUBCASE("mean is one half and values match the closed form") {
    for (std::int64_t d = 1; d <= 40; ++d) {
      const TrigPoly k = fejer(d - 1);
      CHECK(k.coeff(0) == cplx(0.5));
      for (double x : {0.1, 0.7, 2.0, 3.1, -1.3}) CHECK(std::abs(k(x) - oracle::fejer_closed(d - 1, x)) < 1e-12);
    }
  }
}

TEST_CASE("fejer pointwise bound min(d/2, pi^2/(2 d x^2))") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (std::int64_t d = 1; d <= 64; d += 3) {
    const TrigPoly k = fejer(d - 1);
    for (int i = 0; i < 2000; ++i) {
      const double x = u(rng);
      if (x == 0.0) continue;
      const double bound = std::min(0.5 * static_cast<double>(d), kPi * kPi / (2.0 * static_cast<double>(d) * x * x));
      CHECK(k(x).real() <= bound + 1e-9);
    }
  }
}

TEST_CASE("grid_eval") {
  SUBCASE("single frequency gives powers of roots of unity") {
    const auto v = grid_eval(TrigPoly::monomial(3), 8);
    REQUIRE(v.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      const cplx w = std::polar(1.0, kTwoPi * 3.0 * static_cast<double>(k) / 8.0);
      CHECK(std::abs(v[k] - w) < 1e-14);
    }
  }
  SUBCASE("fejer samples are real and nonnegative") {
    for (const cplx& z : grid_eval(fejer(2), 16)) {
      CHECK(std::abs(z.imag()) < 1e-14);
      CHECK(z.real() >= -1e-12);
    }
  }
  SUBCASE("linearity over disjoint spectra") {
    std::mt19937_64 rng(11);
    const TrigPoly a = oracle::random_poly(rng, 5, 20);
    const TrigPoly b = oracle::random_poly(rng, 40, 30);
    const TrigPoly s = sum(a, b);
    const std::size_t G = 256;
    const auto va = grid_eval(a, G), vb = grid_eval(b, G), vs = grid_eval(s, G);
    double worst = 0.0;
    for (std::size_t k = 0; k < G; ++k) worst = std::max(worst, std::abs(vs[k] - va[k] - vb[k]));
    CHECK(worst <= 1e-10 * s.coeff_l1());
  }
  SUBCASE("grid must exceed twice the degree") {
    try {
      grid_eval(TrigPoly::monomial(4), 8);
      FAIL("expected GridTooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooSmall);
    }
  }
}

TEST_CASE("sample folds aliased frequencies exactly") {
  std::mt19937_64 rng(3);
  const TrigPoly p = oracle::random_poly(rng, -37, 90);
  for (std::size_t G : {1u, 5u, 16u, 33u, 1000u}) {
    const auto v = sample(p, G);
    for (std::size_t k = 0; k < G; ++k) {
      const double x = kTwoPi * static_cast<double>(k) / static_cast<double>(G);
      CHECK(std::abs(v[k] - oracle::eval(p, x)) < 1e-11 * p.coeff_l1());
    }
  }
}

TEST_CASE("sup_norm brackets") {
  SUBCASE("unimodular exponential") {
    for (std::int64_t M : {0, 1, 7, 1000, -45}) {
      const NormBracket b = sup_norm(TrigPoly::monomial(M), 16);
      CHECK(b.contains(1.0, 1e-12));
      const double deg = static_cast<double>(std::abs(M));
      CHECK(b.upper <= 1.0 / (1.0 - kPi / 16.0 * (deg / (deg + 1.0))) + 1e-12);
    }
  }
  SUBCASE("fejer peak") {
    const NormBracket b = sup_norm(fejer(7), 64);
    CHECK(b.contains(4.0, 1e-12));
    CHECK((b.upper - b.lower) / 4.0 <= 0.06);
  }
  SUBCASE("cosine") {
    const TrigPoly c(-1, {0.5, 0.0, 0.5});
    CHECK(sup_norm(c, 16).contains(1.0, 1e-12));
  }
  SUBCASE("oversample below 8 is rejected") { CHECK_THROWS_AS(sup_norm(fejer(3), 4), Error); }
}

TEST_CASE("sup_norm upper bound is never exceeded on a 16x finer grid") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> off(-200, 200);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  for (int trial = 0; trial < 200; ++trial) {
    const TrigPoly p = oracle::random_poly(rng, off(rng), len(rng));
    const NormBracket b = sup_norm(p, 8);
    const std::size_t fine = 16 * b.grid;
    const GridStats s = grid_stats(p, fine);
    CHECK(s.max_abs <= b.upper + 1e-9 * p.coeff_l1());
    CHECK(b.lower <= s.max_abs + 1e-9 * p.coeff_l1());
  }
}

TEST_CASE("l1_norm brackets") {
  const NormBracket c = l1_norm(TrigPoly::monomial(0, cplx(0.0, -3.0)), 4);
  CHECK(c.lower == doctest::Approx(3.0));
  CHECK(c.upper == doctest::Approx(3.0));
  CHECK(l1_norm(TrigPoly::monomial(17), 64).contains(1.0, 1e-12));
  for (std::int64_t d : {1, 2, 5, 16, 100}) {
    const TrigPoly k = fejer(d - 1);
    const NormBracket b = l1_norm(k, sup_grid_size(k.degree(), 16));
    CHECK(b.contains(0.5, 1e-12));
  }
  CHECK_THROWS_AS(l1_norm(TrigPoly::monomial(10), 16), Error);
}

TEST_CASE("l2_norm") {
  CHECK(l2_norm(TrigPoly::monomial(12)) == 1.0);
  const double fejer2 = std::sqrt(0.25 + 2.0 / 9.0 + 2.0 / 36.0);
  CHECK(l2_norm(fejer(2)) == doctest::Approx(fejer2).epsilon(1e-15));
  CHECK(std::sqrt(grid_stats(fejer(2), 64).mean_sq) == doctest::Approx(fejer2).epsilon(1e-14));
  CHECK(l2_norm(TrigPoly::zero()) == 0.0);
}

TEST_CASE("Parseval against grid quadrature") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> off(-5000, 5000);
  std::uniform_int_distribution<std::size_t> len(1, 4000);
  for (int trial = 0; trial < 40; ++trial) {
    const TrigPoly p = oracle::random_poly(rng, off(rng), len(rng));
    const double exact = l2_norm(p);
    const double quad = std::sqrt(grid_stats(p, next_pow2(2 * static_cast<std::size_t>(p.degree()) + 1)).mean_sq);
    CHECK(std::abs(exact - quad) <= 1e-9 * exact);
  }
  // one large case near the stated degree limit
  const TrigPoly big = oracle::random_poly(rng, (1 << 20) - 3000, 3000);
  const double exact = l2_norm(big);
  CHECK(std::abs(std::sqrt(grid_stats(big, 1u << 21).mean_sq) - exact) <= 1e-9 * exact);
}

TEST_CASE("modulate") {
  const TrigPoly m = modulate(fejer(1), 5);
  CHECK(m.min_freq() == 4);
  CHECK(m.max_freq() == 6);
  CHECK(modulate(fejer(3), 0) == fejer(3));
  std::mt19937_64 rng(17);
  const TrigPoly p = oracle::random_poly(rng, -10, 40);
  const double base = sup_norm(p, 16).lower;
  for (std::int64_t M : {1, 13, -400, 4096}) {
    const TrigPoly q = modulate(p, M);
    // same grid for both, so the moduli are identical sample by sample
    const auto grid = sup_grid_size(std::max(p.degree(), q.degree()), 16);
    const auto vp = grid_eval(p, grid), vq = grid_eval(q, grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid; ++k) worst = std::max(worst, std::abs(std::abs(vp[k]) - std::abs(vq[k])));
    CHECK(worst <= 1e-12 * p.coeff_l1());
    CHECK(grid_stats(q, grid).max_abs == doctest::Approx(grid_stats(p, grid).max_abs).epsilon(1e-12));
  }
  CHECK(base > 0.0);
}

TEST_CASE("sum") {
  SUBCASE("disjoint blocks add in L2 squared") {
    const TrigPoly a(2, {1.0, 2.0});
    const TrigPoly b(10, {cplx(0, 1), 3.0});
    const TrigPoly s = sum(a, b);
    CHECK(s.min_freq() == 2);
    CHECK(s.max_freq() == 11);
    CHECK(s.coeff(3) == cplx(2.0));
    CHECK(s.coeff(6) == cplx(0.0));
    CHECK(std::pow(l2_norm(s), 2) == doctest::Approx(std::pow(l2_norm(a), 2) + std::pow(l2_norm(b), 2)));
  }
  SUBCASE("p plus its negation vanishes") {
    const TrigPoly p(-3, {1.0, cplx(2, -1), 4.0});
    const TrigPoly z = sum(p, negate(p));
    CHECK(z.padded());
    for (const cplx& c : z.coeffs()) CHECK(c == cplx(0.0));
    CHECK(l2_norm(z) == 0.0);
  }
  SUBCASE("N copies of one exponential") {
    std::vector<TrigPoly> ps(9, TrigPoly::monomial(1));
    const TrigPoly s = sum(ps);
    CHECK(s.coeff(1) == cplx(9.0));
    CHECK(s.size() == 1);
  }
}

TEST_CASE("real_part") {
  SUBCASE("exponential becomes cosine") {
    const RealTrigPoly r = real_part(TrigPoly::monomial(5));
    REQUIRE(r.degree() == 5);
    for (std::int64_t k = 0; k <= 5; ++k) {
      CHECK(r.cos_coeffs[static_cast<std::size_t>(k)] == (k == 5 ? 1.0 : 0.0));
      CHECK(r.sin_coeffs[static_cast<std::size_t>(k)] == 0.0);
    }
    for (double x : {0.0, 0.3, 2.2}) CHECK(r(x) == doctest::Approx(std::cos(5 * x)));
  }
  SUBCASE("agrees with Re p pointwise and the sup ordering holds") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const TrigPoly p = oracle::random_poly(rng, -30 + trial, 50);
      const RealTrigPoly r = real_part(p);
      for (double x : {0.1, 1.0, 4.0, 6.0}) CHECK(std::abs(r(x) - p(x).real()) < 1e-11 * p.coeff_l1());
      const TrigPoly rc = r.to_complex();
      CHECK(sup_norm(rc, 16).upper <= sup_norm(p, 16).upper * (1.0 + 1e-12) + 1e-9 * p.coeff_l1());
      for (std::int64_t s = -rc.degree(); s <= rc.degree(); ++s)
        CHECK(std::abs(rc.coeff(s) - std::conj(rc.coeff(-s))) < 1e-15);
    }
  }
}

TEST_CASE("composites commute with evaluation") {
  std::mt19937_64 rng(31);
  const TrigPoly a = oracle::random_poly(rng, -20, 60);
  const TrigPoly b = oracle::random_poly(rng, 10, 80);
  const std::size_t G = 512;
  const auto va = grid_eval(a, G), vb = grid_eval(b, G);
  const auto vsum = grid_eval(sum(a, b), G);
  const auto vmod = grid_eval(modulate(a, 7), G);
  const auto vre = grid_eval(real_part(a).to_complex(), G);
  const double scale = a.coeff_l1() + b.coeff_l1();
  for (std::size_t k = 0; k < G; ++k) {
    const double x = kTwoPi * static_cast<double>(k) / static_cast<double>(G);
    CHECK(std::abs(vsum[k] - (va[k] + vb[k])) <= 1e-10 * scale);
    CHECK(std::abs(vmod[k] - std::polar(1.0, 7.0 * x) * va[k]) <= 1e-10 * scale);
    CHECK(std::abs(vre[k] - cplx(va[k].real(), 0.0)) <= 1e-10 * scale);
  }
}

TEST_CASE("direct evaluation stays accurate at large frequencies") {
  std::mt19937_64 rng(41);
  const TrigPoly p = oracle::random_poly(rng, 3'000'000, 5000);
  for (double x : {0.001, 1.234567, 5.9}) CHECK(std::abs(p(x) - oracle::eval(p, x)) < 1e-9 * p.coeff_l1());
}
