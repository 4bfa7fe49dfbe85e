#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "vicinal/field.hpp"

using namespace vicinal;
using Catch::Approx;

namespace {
const PeriodicGrid g256(256);

bool dual_representation_consistent(const SpectralField& f) {
  std::vector<std::complex<double>> c;
  detail::dft_forward(f.samples(), c);
  double err = 0.0, scale = 1e-30;
  for (std::size_t k = 0; k < c.size(); ++k) {
    err = std::max(err, std::abs(c[k] - f.coeffs()[k]));
    scale = std::max(scale, std::abs(c[k]));
  }
  return err <= 1e-12 * std::max(1.0, scale);
}
}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PeriodicGrid(7), Error);
  CHECK_THROWS_AS(PeriodicGrid(6), Error);
  PeriodicGrid g(8);
  CHECK(g.dx() == Approx(kTwoPi / 8));
  CHECK(g.node(0) == Approx(-kPi));
}

TEST_CASE("make_field on a single Fourier mode") {
  auto f = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(x); }));
  CHECK(std::abs(f.coeff(1) - std::complex<double>(0.0, -0.5)) < 1e-12);
  CHECK(std::abs(f.coeff(-1) - std::complex<double>(0.0, 0.5)) < 1e-12);
  for (int k = 2; k <= 128; ++k) CHECK(std::abs(f.coeff(k)) < 1e-12);
  CHECK(dual_representation_consistent(f));
  CHECK(std::abs(mean(f.samples())) < 1e-13);
}

TEST_CASE("make_field of zeros is the zero field") {
  auto f = make_field(g256, std::vector<double>(256, 0.0));
  CHECK(f.max_abs() == 0.0);
}

TEST_CASE("make_field rejects nonzero mean") {
  auto s = oracles::sample(g256, [](double x) { return 1.0 + std::sin(x); });
  CHECK_THROWS_AS(make_field(g256, s), MeanNotZero);
  CHECK_THROWS_AS(make_field(g256, std::vector<double>(255, 0.0)), Error);
}

TEST_CASE("project_zero_mean") {
  std::vector<double> c5(64, 5.0);
  for (double v : project_zero_mean(c5)) CHECK(v == Approx(0.0).margin(1e-15));

  PeriodicGrid g(64);
  auto s = oracles::sample(g, [](double x) { return std::sin(x) + 2.0; });
  auto p = project_zero_mean(s);
  for (int j = 0; j < 64; ++j)
    CHECK(p[j] == Approx(std::sin(g.node(j))).margin(1e-14));

  auto again = project_zero_mean(p);
  for (int j = 0; j < 64; ++j) CHECK(again[j] == Approx(p[j]).margin(1e-15));
}

TEST_CASE("hilbert transform against the PV kernel oracle") {
  // cos x -> sin x and sin 3x -> -cos 3x pin the -i sgn(k) convention.
  auto c1 = make_field(g256, oracles::sample(g256, [](double x) { return std::cos(x); }));
  auto h1 = hilbert(c1);
  auto o1 = oracles::pv_hilbert(c1);
  for (int j = 0; j < 256; ++j) {
    CHECK(h1.sample(j) == Approx(std::sin(g256.node(j))).margin(1e-12));
    CHECK(h1.sample(j) == Approx(o1.sample(j)).margin(1e-6));
  }

  auto s3 = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(3 * x); }));
  auto h3 = hilbert(s3);
  auto o3 = oracles::pv_hilbert(s3);
  for (int j = 0; j < 256; ++j) {
    CHECK(h3.sample(j) == Approx(-std::cos(3 * g256.node(j))).margin(1e-12));
    CHECK(h3.sample(j) == Approx(o3.sample(j)).margin(1e-6));
  }

  auto z = hilbert(SpectralField(g256));
  CHECK(z.max_abs() == 0.0);
}

TEST_CASE("hilbert matches PV oracle on random smooth fields") {
  std::mt19937_64 rng(0x5eed0001);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = oracles::random_field(g256, rng, 8);
    auto h = hilbert(f);
    auto o = oracles::pv_hilbert(f);
    for (int j = 0; j < 256; j += 7)
      CHECK(h.sample(j) == Approx(o.sample(j)).margin(1e-6));
  }
}

TEST_CASE("spectral derivatives") {
  auto s = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(x); }));
  auto s2 = derivative(s, 2);
  for (int j = 0; j < 256; ++j)
    CHECK(s2.sample(j) == Approx(-std::sin(g256.node(j))).margin(1e-12));

  auto c2 = make_field(g256, oracles::sample(g256, [](double x) { return std::cos(2 * x); }));
  auto d1 = derivative(c2, 1);
  for (int j = 0; j < 256; ++j)
    CHECK(d1.sample(j) == Approx(-2.0 * std::sin(2 * g256.node(j))).margin(1e-12));

  CHECK_THROWS_AS(derivative(s, 0), Error);
  CHECK_THROWS_AS(derivative(s, 5), Error);

  std::mt19937_64 rng(0x5eed0002);
  auto f = oracles::random_field(g256, rng, 20);
  auto back = derivative(antiderivative_zero_mean(f), 1);
  for (int j = 0; j < 256; ++j)
    CHECK(back.sample(j) == Approx(f.sample(j)).margin(1e-11));
}

TEST_CASE("antiderivative_zero_mean") {
  auto c = make_field(g256, oracles::sample(g256, [](double x) { return std::cos(x); }));
  auto a = antiderivative_zero_mean(c);
  for (int j = 0; j < 256; ++j)
    CHECK(a.sample(j) == Approx(std::sin(g256.node(j))).margin(1e-12));

  auto s2 = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(2 * x); }));
  auto a2 = antiderivative_zero_mean(s2);
  for (int j = 0; j < 256; ++j)
    CHECK(a2.sample(j) == Approx(-0.5 * std::cos(2 * g256.node(j))).margin(1e-12));
}

TEST_CASE("antiderivative matches the running-integral construction") {
  std::mt19937_64 rng(0x5eed0003);
  auto f = oracles::random_field(g256, rng, 3);
  auto a = antiderivative_zero_mean(f);
  auto q = oracles::running_antiderivative(f);
  for (int j = 0; j < 256; ++j) CHECK(a.sample(j) == Approx(q[j]).margin(1e-10));
}

TEST_CASE("inner products") {
  auto s = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(x); }));
  auto c = make_field(g256, oracles::sample(g256, [](double x) { return std::cos(x); }));
  CHECK(inner_product(s, s) == Approx(kPi).margin(1e-12));
  CHECK(inner_product(s, c) == Approx(0.0).margin(1e-12));

  std::mt19937_64 rng(0x5eed0004);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = oracles::random_field(g256, rng, 16);
    CHECK(inner_product(f, f) >= 0.0);
  }

  PeriodicGrid g128(128);
  auto other = SpectralField(g128);
  CHECK_THROWS_AS(inner_product(s, other), GridMismatch);
}

TEST_CASE("lp norms") {
  auto s = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(x); }));
  CHECK(norm_lp(s, 2) == Approx(std::sqrt(kPi)).margin(1e-12));
  CHECK(norm_lp(SpectralField(g256), 3) == 0.0);
  const double cube = std::pow(norm_lp(s, 3), 3);
  CHECK(cube == Approx(8.0 / 3.0).margin(1e-7));  // analytic integral of |sin|^3
  CHECK(norm_lp(s, std::numeric_limits<double>::infinity()) == Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(norm_lp(s, 0.5), Error);
}

TEST_CASE("Hilbert isometry, involution, skew-adjointness, commutation") {
  std::mt19937_64 rng(0x5eed0005);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = oracles::random_field(g256, rng, 100);
    auto hf = hilbert(f);
    const double nf = norm_l2(f);
    CHECK(norm_l2(hf) == Approx(nf).epsilon(1e-12));

    auto hhf = hilbert(hf);
    for (int j = 0; j < 256; j += 11)
      CHECK(hhf.sample(j) == Approx(-f.sample(j)).margin(1e-12 * std::max(1.0, f.max_abs())));

    auto gf = oracles::random_field(g256, rng, 100);
    CHECK(inner_product(hf, gf) ==
          Approx(-inner_product(f, hilbert(gf))).margin(1e-12 * (1.0 + nf * norm_l2(gf))));

    auto lhs = hilbert(derivative(f, 1));
    auto rhs = derivative(hf, 1);
    for (int j = 0; j < 256; j += 11)
      CHECK(lhs.sample(j) == Approx(rhs.sample(j)).margin(1e-12 * std::max(1.0, lhs.max_abs())));
  }
}

TEST_CASE("sharp Poincare inequality") {
  std::mt19937_64 rng(0x5eed0006);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = oracles::random_field(g256, rng, 32);
    const double lhs = inner_product(f, f);
    auto fx = derivative(f, 1);
    CHECK(lhs <= inner_product(fx, fx) + 1e-10);
  }

  for (auto fn : {+[](double x) { return std::sin(x); },
                  +[](double x) { return std::cos(x); }}) {
    auto f = make_field(g256, oracles::sample(g256, fn));
    auto fx = derivative(f, 1);
    CHECK(inner_product(fx, fx) - inner_product(f, f) == Approx(0.0).margin(1e-10));
  }

  auto s2 = make_field(g256, oracles::sample(g256, [](double x) { return std::sin(2 * x); }));
  auto s2x = derivative(s2, 1);
  CHECK(inner_product(s2x, s2x) - inner_product(s2, s2) == Approx(3.0 * kPi).margin(1e-10));
}
