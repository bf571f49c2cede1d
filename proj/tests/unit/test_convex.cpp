#include "doctest.h"
#include "oracles.hpp"
#include "sqpm/convex.hpp"
#include "sqpm/error.hpp"

using namespace sqpm;
using doctest::Approx;

TEST_CASE("norms of (3,-4,0)") {
  const Vec v{3.0, -4.0, 0.0};
  CHECK(norm(v, NormKind::L2) == Approx(5.0));
  CHECK(norm(v, NormKind::L1) == Approx(7.0));
  CHECK(norm(v, NormKind::LInf) == Approx(4.0));
  CHECK(dual_norm(v, NormKind::L2) == Approx(5.0));
  CHECK(dual_norm(v, NormKind::LInf) == Approx(7.0));
  CHECK(dual_norm(Vec{1.0, 1.0, 1.0}, NormKind::L1) == Approx(1.0));
}

TEST_CASE("dual pairs") {
  CHECK(dual(NormKind::L1) == NormKind::LInf);
  CHECK(dual(NormKind::LInf) == NormKind::L1);
  CHECK(dual(NormKind::L2) == NormKind::L2);
  CHECK(parse_norm("LInf") == NormKind::LInf);
  CHECK_THROWS_AS(parse_norm("l3"), invalid_input);
}

TEST_CASE("norm rejects non-finite input") {
  CHECK_THROWS_AS(norm(Vec{1.0, NAN}, NormKind::L2), invalid_input);
  CHECK_THROWS_AS(dual_norm(Vec{INFINITY, 0.0}, NormKind::L1), invalid_input);
}

TEST_CASE("l2 norm does not overflow on large entries") {
  CHECK(norm(Vec{3e200, 4e200}, NormKind::L2) == Approx(5e200));
}

TEST_CASE("dual norm is the sup of <u,v> over the unit ball (sampled)") {
  Rng rng(11);
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::LInf}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec v = oracle::uniform(rng, 3, -2.0, 2.0);
      double sup = 0.0;
      for (int s = 0; s < 10000; ++s) {
        Vec u = oracle::uniform(rng, 3, -1.0, 1.0);
        // Bend samples toward axes or corners so the extreme points get hit.
        const double k = s % 3 == 0 ? 1.0 : (s % 3 == 1 ? 8.0 : 0.125);
        for (double& x : u) x = std::copysign(std::pow(std::abs(x), k), x);
        const double n = norm(u, kind);
        if (n == 0.0) continue;
        for (double& x : u) x /= n;
        sup = std::max(sup, dot(u, v));
      }
      const double closed = dual_norm(v, kind);
      CHECK(sup <= closed + 1e-12);
      CHECK(sup >= 0.99 * closed);
    }
  }
}

TEST_CASE("project_simplex fixed examples") {
  const double third = 1.0 / 3.0;
  CHECK(oracle::max_abs_diff(project_simplex(Vec{third, third, third}), Vec{third, third, third}) <
        1e-15);
  CHECK(oracle::max_abs_diff(project_simplex(Vec{0.5, 0.5, 0.5}), Vec{third, third, third}) <
        1e-15);
  CHECK(project_simplex(Vec{2.0, 0.0, 0.0}) == Vec{1.0, 0.0, 0.0});
}

TEST_CASE("project_simplex matches a brute-force grid") {
  const double step = 1e-3;
  CHECK(oracle::max_abs_diff(project_simplex(Vec{2.0, 0.0, 0.0}),
                             oracle::simplex_projection_3({2.0, 0.0, 0.0}, step)) < 1e-12);
  Rng rng(3);
  for (int i = 0; i < 15; ++i) {
    const Vec z = oracle::uniform(rng, 3, -1.5, 1.5);
    const Vec p = project_simplex(z);
    CHECK(on_simplex(p));
    CHECK(oracle::max_abs_diff(p, oracle::simplex_projection_3(z, step)) <= 1.5 * step);
  }
}

TEST_CASE("project_simplex is nonexpansive and idempotent") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t d = 2 + rng.below(6);
    const Vec a = oracle::uniform(rng, d, -5.0, 5.0);
    const Vec b = oracle::uniform(rng, d, -5.0, 5.0);
    const Vec pa = project_simplex(a);
    const Vec pb = project_simplex(b);
    CHECK(norm(sub(pa, pb), NormKind::L2) <= norm(sub(a, b), NormKind::L2) + 1e-12);
    CHECK(oracle::max_abs_diff(project_simplex(pa), pa) < 1e-15);
  }
}

TEST_CASE("project_simplex ties do not change the value") {
  const Vec p = project_simplex(Vec{1.0, 1.0, 0.0});
  CHECK(p[0] == Approx(0.5));
  CHECK(p[1] == Approx(0.5));
  CHECK(p[2] == 0.0);
}

TEST_CASE("generic bregman of a quadratic is half the squared distance") {
  const ScalarField f = [](ConstVecRef x) { return 0.5 * dot(x, x); };
  const VectorField g = [](ConstVecRef x) { return Vec(x.begin(), x.end()); };
  const Vec x{1.0, 2.0};
  const Vec y{-1.0, 0.5};
  CHECK(bregman(f, g, x, y) == Approx(0.5 * (4.0 + 2.25)));
  CHECK(bregman(f, g, x, x) == 0.0);
}

TEST_CASE("quadrature") {
  SUBCASE("polynomial") {
    const auto res = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(res.value == Approx(1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("peaked integrand needs subdivision") {
    const auto res = integrate([](double x) { return 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)); }, 0.0,
                               1.0, 1e-9);
    const double exact = 100.0 * (std::atan(0.7 / 1e-2) + std::atan(0.3 / 1e-2));
    CHECK(res.value == Approx(exact).epsilon(1e-11));
    CHECK(res.intervals > 1);
  }
  SUBCASE("empty interval") { CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-9).value == 0.0); }
  SUBCASE("nan integrand hits the interval cap") {
    CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0.0, 1.0, 1e-9), numeric_failure);
  }
  SUBCASE("bad tolerance") {
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, 0.0), invalid_input);
  }
}

TEST_CASE("line integral of a conservative field") {
  // f = x0^2 x1 has gradient (2 x0 x1, x0^2).
  const VectorField g = [](ConstVecRef x) { return Vec{2.0 * x[0] * x[1], x[0] * x[0]}; };
  const Vec q{1.0, 2.0};
  const Vec r{0.5, -1.0};
  const double exact = 1.5 * 1.5 * 1.0 - 1.0 * 2.0;
  CHECK(line_integral_price(g, q, r, 1e-12) == Approx(exact).epsilon(1e-12));
  CHECK(line_integral_price(g, q, Vec{0.0, 0.0}, 1e-12) == 0.0);
}

TEST_CASE("finite differences") {
  const Vec c{1.5, -2.0, 0.25};
  const ScalarField linear = [&](ConstVecRef x) { return dot(c, x); };
  const Vec x{0.3, 0.1, -4.0};
  for (DiffScheme s : {DiffScheme::Central, DiffScheme::Forward, DiffScheme::Backward}) {
    CHECK(oracle::max_abs_diff(finite_diff_grad(linear, x, 0.0, s), c) < 1e-8);
  }
  CHECK(default_fd_step(x) == Approx(1e-6 * 5.0));
  const ScalarField cubic = [](ConstVecRef v) { return v[0] * v[0] * v[0]; };
  CHECK(finite_diff_grad(cubic, Vec{2.0}, 1e-4)[0] == Approx(12.0).epsilon(1e-7));
}

TEST_CASE("simplex membership") {
  CHECK(on_simplex(Vec{0.5, 0.5}));
  CHECK(on_simplex(Vec{1.0, 0.0, 0.0}));
  CHECK_FALSE(on_simplex(Vec{0.3, 0.3, 0.3}));
  CHECK_FALSE(on_simplex(Vec{1.5, -0.5}));
  CHECK_FALSE(on_simplex(Vec{NAN, 1.0}));
}
