#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "qcap/jost.hpp"

using namespace qcap;

TEST_CASE("free jost solutions") {
  auto f = solve_jost(PotentialSpec::zero(), 1.3, Side::Right);
  double err = 0;
  for (std::size_t i = 0; i < f.x.size(); ++i)
    err = std::max(err, std::abs(f.f[i] - std::exp(cplx(0, 1.3 * f.x[i]))));
  CHECK(err < 1e-10);

  auto f1 = solve_jost(PotentialSpec::zero(), 2.0, Side::Right, std::vector<double>{-1, 0, 1});
  auto f2 = solve_jost(PotentialSpec::zero(), 2.0, Side::Left, std::vector<double>{-1, 0, 1});
  // f' g - f g' with f = e^{ikx}, g = e^{-ikx}
  CHECK(std::abs(wronskian(f1, f2) - cplx(0, 4.0)) < 1e-8);
  CHECK(std::abs(wronskian(f1, f1)) < 1e-12);
}

TEST_CASE("square barrier jost solution against closed form") {
  const double h = 4.0, k = 1.0;
  auto v0 = PotentialSpec::indicator(0, 1, h);
  std::vector<double> xs;
  for (int i = -20; i <= 40; ++i) xs.push_back(0.05 * i);
  auto f1 = solve_jost(v0, k, Side::Right, xs);
  // f1 = e^{ikx} right of the barrier; inside A e^{qx} + B e^{-qx}, left C e^{ikx} + D e^{-ikx}
  const double q = std::sqrt(h - k * k);
  const cplx I(0, 1), e1 = std::exp(I * k);
  const cplx A = 0.5 * e1 * (1.0 + I * k / q) * std::exp(-q);
  const cplx B = 0.5 * e1 * (1.0 - I * k / q) * std::exp(q);
  const cplx C = 0.5 * (A + B + (q * A - q * B) / (I * k));
  const cplx D = 0.5 * (A + B - (q * A - q * B) / (I * k));
  double err = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    cplx ref;
    if (x >= 1) ref = std::exp(I * k * x);
    else if (x >= 0) ref = A * std::exp(q * x) + B * std::exp(-q * x);
    else ref = C * std::exp(I * k * x) + D * std::exp(-I * k * x);
    err = std::max(err, std::abs(f1.f[i] - ref));
  }
  CHECK(err < 1e-8);

  auto fm = solve_jost(v0, -k, Side::Right, xs);
  double conj_err = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    conj_err = std::max(conj_err, std::abs(fm.f[i] - std::conj(f1.f[i])));
  CHECK(conj_err < 1e-10);
}

TEST_CASE("wronskian constancy on random barriers") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> h(0.2, 4.0), w(0.2, 1.5), k(0.1, 8.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double w1 = w(rng);
    auto v0 = PotentialSpec::double_barrier(h(rng), h(rng), -2, -2 + w1, 0.5, 0.5 + w(rng));
    const double kk = k(rng);
    auto f1 = solve_jost(v0, kk, Side::Right);
    auto f2 = solve_jost(v0, kk, Side::Left, f1.x);
    CHECK(wronskian_variation(f1, f2) < 1e-8);
  }
}

TEST_CASE("classification") {
  CHECK(classify(PotentialSpec::zero()).kind == Classification::Exceptional);
  auto barrier = PotentialSpec::indicator(0, 1, 1.0);
  auto c = classify(barrier);
  CHECK(c.kind == Classification::Generic);
  // direct k = 0 integration: f1 = 1 right, f2 = 1 left; W = -sinh(1) for the unit barrier
  CHECK(std::abs(std::abs(c.wronskian_at_zero) - std::sinh(1.0)) < 1e-8);
  CHECK(std::abs(c.wronskian_at_zero) > 100 * c.tolerance);
  CHECK(classify(barrier.scaled(1.001)).kind == Classification::Generic);
}

TEST_CASE("reflection and transmission") {
  auto zero = reflection_transmission(PotentialSpec::zero(), default_k_grid(16));
  for (std::size_t j = 0; j < zero.size(); ++j) {
    CHECK(std::abs(zero.t[j] - 1.0) < 1e-10);
    CHECK(std::abs(zero.r_left[j]) < 1e-10);
  }

  auto b4 = reflection_transmission(PotentialSpec::indicator(0, 1, 4.0), std::vector<double>{1.0});
  CHECK(std::abs(std::norm(b4.t[0]) - oracle::barrier_transmission(4.0, 1.0, 1.0)) < 1e-8);

  auto grid = default_k_grid();
  auto sd = reflection_transmission(PotentialSpec::indicator(0, 1, 1.0), grid);
  double err = 0;
  for (std::size_t j = 0; j < sd.size(); ++j) {
    auto ref = oracle::square_barrier(0, 1, 1.0, sd.k[j]);
    err = std::max({err, std::abs(sd.t[j] - ref.t), std::abs(sd.r_left[j] - ref.r_left),
                    std::abs(sd.r_right[j] - ref.r_right)});
  }
  CHECK(err < 1e-8);
  CHECK(sd.unitarity_defect() < 1e-8);

  // conjugate symmetry: the pair at -k is the conjugate of the pair at k
  auto p = jost_pair(PotentialSpec::indicator(0, 1, 1.0), 1.7);
  auto ref = oracle::square_barrier(0, 1, 1.0, -1.7);
  CHECK(std::abs(std::conj(p.t) - ref.t) < 1e-8);
  CHECK(std::abs(std::conj(p.r_left) - ref.r_left) < 1e-8);

  CHECK_THROWS_AS(reflection_transmission(PotentialSpec::indicator(0, 2, -3.0), grid), Error);
}

TEST_CASE("bound state count") {
  CHECK(count_bound_states(PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2)) == 0);
  CHECK(count_bound_states(PotentialSpec::zero()) == 0);
  const int expect = oracle::well_bound_states(2.0, 2.0);
  CHECK(expect == 1);  // z0 = sqrt(2) < pi/2
  CHECK(count_bound_states(PotentialSpec::indicator(-1, 1, -2.0)) == static_cast<std::size_t>(expect));
  CHECK(count_bound_states(PotentialSpec::indicator(-1, 1, -10.0)) ==
        static_cast<std::size_t>(oracle::well_bound_states(10.0, 2.0)));
}
