#include <doctest.h>

#include <cmath>

#include "qcap/evolve.hpp"
#include "qcap/scatter.hpp"

using namespace qcap;

namespace {

const PotentialSpec kCapacitor = PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2);

double rel(const WaveFunction& a, const WaveFunction& b) { return l2_norm(a - b) / l2_norm(b); }

struct Setup {
  GridPtr grid = make_grid(-80, 80, 2048);
  TransformPtr transform = build_wave_operators(kCapacitor, grid);
  NonlocalCoupling coupling = NonlocalCoupling::capacitor(1.0, -1, 1);
  ScatterConfig cfg = [] {
    ScatterConfig c;
    c.dt = 2e-3;
    return c;
  }();
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_CASE("wave operators") {
  auto g = make_grid(-40, 40, 512);
  auto free = build_wave_operators(PotentialSpec::zero(), g);
  auto phi = gaussian_packet(g, -2, 1.0, 1.5);
  CHECK(rel(free->w_minus(phi), phi) < 1e-10);
  CHECK(rel(free->w_plus(phi), phi) < 1e-10);

  const auto& s = setup();
  auto p = gaussian_packet(s.grid, -10, 1.0, 3.0);
  auto wm = s.transform->w_minus(p);
  CHECK(std::abs(l2_norm(wm) - 1.0) < 1e-8);
  CHECK(rel(s.transform->w_minus_adjoint(wm), p) < 1e-3);
  CHECK(rel(s.transform->w_minus_inverse(wm) + s.transform->zero_mode(p), p) < 1e-10);

  // intertwining H W- = W- H0 through the propagators over a short time
  Model lin(s.grid, kCapacitor, NonlocalCoupling::none());
  EvolutionConfig e;
  e.dt = 1e-4;
  e.t_final = 0.5;
  auto lhs = evolve(wm, lin, e).final_state();
  auto rhs = s.transform->w_minus(free_propagate(p, 0.5));
  // floor ~1.7e-5 from the periodic box edges, flat in n and dt
  CHECK(rel(lhs, rhs) < 5e-5);

  // e^{iTH} e^{-iTH0} p approaches W- p as T grows
  std::vector<double> errs;
  for (double T : {1.0, 2.5, 5.0}) {
    SplitStepper fwd(lin, 1e-3);
    auto u = free_propagate(p, -T).values;
    for (int i = 0; i < static_cast<int>(T * 1000 + 0.5); ++i) fwd.step_linear(u);
    errs.push_back(rel(WaveFunction(s.grid, u), wm));
  }
  CHECK(errs[1] <= errs[0] * 1.01);
  CHECK(errs[2] <= errs[1] * 1.01);
  CHECK(errs[2] < 2e-4);
}

TEST_CASE("linear scattering operator") {
  auto g = make_grid(-40, 40, 512);
  auto id = linear_scattering_operator(PotentialSpec::zero(), g);
  auto phi = gaussian_packet(g, 0, 1.0, 2.0);
  CHECK(rel(id.apply(phi), phi) < 1e-10);

  const auto& s = setup();
  LinearScatteringOperator SL(s.transform);
  for (double k0 : {0.5, 2.0, 8.0}) {
    auto p = gaussian_packet(s.grid, -5, 0.8, k0);
    auto a = SL.apply(p);
    CHECK(std::abs(l2_norm(a) - 1.0) < 1e-8);
    CHECK(rel(SL.apply(p, LinearScatteringOperator::Path::Composition), a) < 1e-6);
  }
}

TEST_CASE("nonlinear scattering") {
  const auto& s = setup();
  Model lin(s.grid, kCapacitor, NonlocalCoupling::none());
  auto phi = default_probe(s.grid, s.coupling);
  auto p0 = nonlinear_scattering(0.1 * phi, lin, s.cfg);
  CHECK(l2_norm(p0.phi_plus - p0.phi_minus) < 1e-8);

  Model m(s.grid, kCapacitor, s.coupling);
  auto pr = nonlinear_scattering(0.2 * phi, m, s.cfg);
  CHECK(pr.converged);
  CHECK(l2_norm(pr.phi_plus - pr.phi_minus) > 1e-6);

  // time reversal: conj(phi+) scatters back to conj(phi-)
  WaveFunction rev = pr.phi_plus;
  for (auto& v : rev.values) v = std::conj(v);
  auto back = nonlinear_scattering(rev, m, s.cfg);
  WaveFunction target = pr.phi_minus;
  for (auto& v : target.values) v = std::conj(v);
  CHECK(l2_norm(back.phi_plus - target) <= 2 * std::max(pr.matching_error, back.matching_error) + 1e-9);
}

TEST_CASE("full scattering") {
  const auto& s = setup();
  auto phi = default_probe(s.grid, s.coupling);
  FullScattering lin(Model(s.grid, kCapacitor, NonlocalCoupling::none()), s.transform, s.cfg);
  CHECK(rel(lin(phi), LinearScatteringOperator(s.transform).apply(phi)) < 1e-6);

  FullScattering S(Model(s.grid, kCapacitor, s.coupling), s.transform, s.cfg);
  auto out = S(0.2 * phi);
  CHECK(std::abs(l2_norm(out) - 0.2) < 1e-6 * 0.2 + 1e-9);

  auto g = make_grid(-40, 40, 512);
  auto p = gaussian_packet(g, 0, 1.0, 2.0);
  CHECK(rel(full_scattering(p, PotentialSpec::zero(), NonlocalCoupling::none()), p) < 1e-10);
}

TEST_CASE("small amplitude derivative") {
  const auto& s = setup();
  auto phi = default_probe(s.grid, s.coupling);
  const auto sl = LinearScatteringOperator(s.transform).apply(phi);

  FullScattering lin(Model(s.grid, kCapacitor, NonlocalCoupling::none()), s.transform, s.cfg);
  CHECK(rel(small_amplitude_derivative(phi, lin.as_map(), s.cfg).value, sl) < 1e-6);

  FullScattering S1(Model(s.grid, kCapacitor, s.coupling), s.transform, s.cfg);
  auto d1 = small_amplitude_derivative(phi, S1.as_map(), s.cfg);
  CHECK(rel(d1.value, sl) < 1e-4);

  FullScattering S2(Model(s.grid, kCapacitor, s.coupling.with_lambda(2.0)), s.transform, s.cfg);
  auto d2 = small_amplitude_derivative(phi, S2.as_map(), s.cfg);
  CHECK(l2_norm(d2.value - d1.value) <= 2 * (d1.error_estimate + d2.error_estimate) + 1e-9);
}

TEST_CASE("cubic response and quartic homogeneity") {
  const auto& s = setup();
  auto phi = default_probe(s.grid, s.coupling);
  Model zero(s.grid, kCapacitor, s.coupling.with_lambda(0.0));
  auto cz = cubic_response(phi, zero, 0.05, s.cfg);
  CHECK(std::abs(cz.direct) == 0.0);
  CHECK(std::abs(cz.from_scattering) < 1e-6);

  Model m(s.grid, kCapacitor, s.coupling);
  auto q1 = quartic_functional(phi, m, s.cfg);
  auto q2 = quartic_functional(2.0 * phi, m, s.cfg);
  CHECK(std::abs(q2.value - 16.0 * q1.value) < 1e-6 * std::abs(16.0 * q1.value));
}

TEST_CASE("lambda recovery with zero coupling") {
  const auto& s = setup();
  auto phi = default_probe(s.grid, s.coupling);
  FullScattering S(Model(s.grid, kCapacitor, s.coupling.with_lambda(0.0)), s.transform, s.cfg);
  auto est = recover_lambda(S.as_map(), phi, s.transform, s.coupling, s.cfg);
  CHECK(std::abs(est.lambda_hat) < 1e-3);
}

TEST_CASE("bound states are refused") {
  auto g = make_grid(-40, 40, 512);
  CHECK_THROWS_AS(build_wave_operators(PotentialSpec::indicator(-1, 1, -3.0), g), Error);
}
