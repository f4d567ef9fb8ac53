#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "qcap/conserve.hpp"
#include "qcap/evolve.hpp"

using namespace qcap;

namespace {

const PotentialSpec kCapacitor = PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2);

double max_diff(const WaveFunction& a, const WaveFunction& b) {
  double m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
  return m;
}

WaveFunction free_reference(GridPtr g, double t, double x0, double sigma, double k0,
                            const WaveFunction& at0) {
  const std::size_t j0 = g->size() / 2;
  const cplx scale = at0.values[j0] / oracle::free_gaussian(g->x(j0), 0, x0, sigma, k0);
  auto u = WaveFunction::zeros(g, t);
  for (std::size_t j = 0; j < g->size(); ++j)
    u.values[j] = scale * oracle::free_gaussian(g->x(j), t, x0, sigma, k0);
  return u;
}

}  // namespace

TEST_CASE("hamiltonian") {
  auto g = make_grid(0, 2 * oracle::pi, 128);
  auto u = WaveFunction::zeros(g);
  const double k = 5.0;
  for (std::size_t j = 0; j < g->size(); ++j) u.values[j] = std::exp(cplx(0, k * g->x(j)));
  auto hu = apply_hamiltonian(u, PotentialSpec::zero());
  CHECK(max_diff(hu, k * k * u) < 1e-10 * k * k);

  auto c = WaveFunction(g, std::vector<cplx>(128, 2.0));
  auto big = make_grid(-1, 7, 128);
  auto hc = apply_hamiltonian(c, PotentialSpec::indicator(-10, 10, 3.0));
  CHECK(max_diff(hc, 3.0 * c) < 1e-12);

  auto r = gaussian_packet(make_grid(-20, 20, 512), 0.3, 1.0, 1.0) +
           gaussian_packet(make_grid(-20, 20, 512), -2, 0.5, -3.0);
  const cplx q = inner_product(apply_hamiltonian(r, kCapacitor), r);
  CHECK(std::abs(q.imag()) < 1e-10 * std::norm(l2_norm(r)));
  (void)big;
}

TEST_CASE("nonlinear term") {
  auto g = make_grid(-10, 10, 2048);
  auto u = gaussian_packet(g, 0, 0.2, 1.0);
  CHECK(l2_norm(nonlinear_term(u, NonlocalCoupling::none())) == 0.0);

  // unit norm, supported in [-1, 1]: F(u) = Q(u) u = u
  auto v = WaveFunction::zeros(g);
  for (std::size_t j = 0; j < g->size(); ++j)
    if (std::abs(g->x(j)) < 0.8) v.values[j] = std::cos(g->x(j));
  v *= 1.0 / l2_norm(v);
  auto cap = NonlocalCoupling::capacitor(1.0, -1, 1);
  CHECK(max_diff(nonlinear_term(v, cap), v) < 1e-12);

  const double eps = 0.37;
  auto a = nonlinear_term(eps * u, cap);
  auto b = nonlinear_term(u, cap);
  CHECK(max_diff(a, eps * eps * eps * b) < 1e-14);
}

TEST_CASE("free propagation") {
  auto g = make_grid(-40, 40, 1024);
  auto phi = gaussian_packet(g, -3, 1.0, 2.0);
  CHECK(max_diff(free_propagate(phi, 0.0), phi) < 1e-14);
  auto ab = free_propagate(free_propagate(phi, 0.4), 0.7);
  CHECK(max_diff(ab, free_propagate(phi, 1.1)) < 1e-12);
  CHECK(max_diff(free_propagate(phi, 1.5), free_reference(g, 1.5, -3, 1.0, 2.0, phi)) < 1e-10);
}

TEST_CASE("split step: free gaussian and second order") {
  auto g = make_grid(-40, 40, 2048);
  auto phi = gaussian_packet(g, -3, 1.0, 2.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_final = 1.0;
  auto traj = evolve(phi, PotentialSpec::zero(), NonlocalCoupling::none(), cfg);
  auto ref = free_reference(g, 1.0, -3, 1.0, 2.0, phi);
  CHECK(l2_norm(traj.final_state() - ref) / l2_norm(ref) < 1e-8);

  // self-convergence in dt on a smooth reference with the coupling switched on
  auto smooth = PotentialSpec(SampledPotential{g, [&] {
                                std::vector<double> v(g->size());
                                for (std::size_t j = 0; j < v.size(); ++j)
                                  v[j] = 2.0 * std::exp(-g->x(j) * g->x(j));
                                return v;
                              }()});
  auto c = NonlocalCoupling::capacitor(1.0, -1, 1);
  auto run = [&](double dt) {
    EvolutionConfig e;
    e.dt = dt;
    e.t_final = 0.5;
    e.max_kinetic_phase = 0.0;
    return evolve(phi, smooth, c, e).final_state();
  };
  auto u1 = run(1e-3), u2 = run(5e-4), u4 = run(2.5e-4);
  const double order = std::log2(l2_norm(u1 - u2) / l2_norm(u2 - u4));
  CHECK(order >= 1.9);

  // norm per step, real lambda and V1 = V2
  Model m(g, kCapacitor, c);
  SplitStepper st(m, 1e-3);
  auto v = phi.values;
  for (int i = 0; i < 50; ++i) {
    const double before = l2_norm(v, g->dx());
    st.step(v);
    CHECK(std::abs(l2_norm(v, g->dx()) - before) < 1e-10);
  }
}

TEST_CASE("crank-nicolson") {
  auto g = make_grid(-40, 40, 2048);
  auto c = NonlocalCoupling::capacitor(1.0, -1, 1);

  // plane wave phase: Cayley factor of the three-point symbol
  auto pw = WaveFunction::zeros(g);
  const double k = g->k(20), dt = 1e-3;
  for (std::size_t j = 0; j < g->size(); ++j) pw.values[j] = std::exp(cplx(0, k * g->x(j)));
  auto next = step_crank_nicolson(pw, PotentialSpec::zero(), NonlocalCoupling::none(), dt);
  const double lam = 4.0 * std::pow(std::sin(k * g->dx() / 2) / g->dx(), 2);
  const cplx cayley = (1.0 - cplx(0, 0.5 * dt * lam)) / (1.0 + cplx(0, 0.5 * dt * lam));
  CHECK(std::abs(next.values[7] / pw.values[7] - cayley) < 1e-12);
  CHECK(std::abs(cayley - std::exp(cplx(0, -lam * dt))) < std::pow(lam * dt, 3));

  auto phi = gaussian_packet(g, -4, 1.5, 1.0);
  Model m(g, kCapacitor, c);
  CrankNicolsonStepper cn(m, 1e-3);
  auto v = phi.values;
  for (int i = 0; i < 50; ++i) {
    const double before = l2_norm(v, g->dx());
    cn.step(v);
    CHECK(std::abs(l2_norm(v, g->dx()) - before) < 1e-10);
  }

  // against the split step on smooth data: smooth V0, V1 = V2 and packet. The
  // gap is the O(dx^2) dispersion of the three-point stencil (1.7e-6 at dx = 5e-3),
  // hence the fine grid; nothing to resonate, so no sub-cycling.
  auto fg = make_grid(-16, 16, 16384);
  std::vector<double> bump(fg->size()), well(fg->size());
  for (std::size_t j = 0; j < bump.size(); ++j) {
    bump[j] = std::exp(-fg->x(j) * fg->x(j));
    well[j] = 0.5 * std::exp(-0.5 * std::pow(fg->x(j) - 1.0, 2));
  }
  const PotentialSpec sv0(SampledPotential{fg, well});
  const PotentialSpec sv(SampledPotential{fg, bump});
  const NonlocalCoupling sc(1.0, sv, sv);
  auto smooth = gaussian_packet(fg, -1, 1.5, 0.5);
  EvolutionConfig e;
  e.dt = 1e-3;
  e.t_final = 1.0;
  e.max_kinetic_phase = 0.0;
  auto a = evolve(smooth, sv0, sc, e).final_state();
  e.method = Method::CrankNicolson;
  auto b = evolve(smooth, sv0, sc, e).final_state();
  CHECK(l2_norm(a - b) <= 1e-6);
}

TEST_CASE("evolve contracts and blow-up detection") {
  auto g = make_grid(-40, 40, 1024);
  auto phi = gaussian_packet(g, 0, 1.0, 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  auto free = evolve(phi, PotentialSpec::zero(), NonlocalCoupling::none(), cfg);
  for (const auto& d : free.diagnostics) CHECK(std::abs(d.norm - 1.0) < 1e-9);

  auto complex_lambda = NonlocalCoupling::capacitor(cplx(1.0, 0.5), -1, 1);
  auto traj = evolve(phi, kCapacitor, complex_lambda, cfg);
  CHECK(traj.times.back() == doctest::Approx(1.0));
  CHECK_FALSE(traj.blew_up);

  EvolutionConfig bad = cfg;
  bad.dt = -1;
  CHECK_THROWS_AS(evolve(phi, kCapacitor, complex_lambda, bad), Error);

  // amplifying imaginary lambda drives the norm up until the factor trips
  auto grow = NonlocalCoupling::capacitor(cplx(0, 0.5), -1, 1);
  EvolutionConfig g2 = cfg;
  g2.t_final = 20.0;
  g2.blowup_factor = 1e3;
  auto blown = evolve(gaussian_packet(g, 0, 0.5, 0, 2.0), PotentialSpec::zero(), grow, g2);
  CHECK(blown.blew_up);
  CHECK(blown.times.back() < 20.0);
}

TEST_CASE("picard iteration") {
  auto g = make_grid(-40, 40, 2048);
  auto phi = gaussian_packet(g, 0, 1.0, 0.0, 0.5);
  PicardConfig pc;
  auto lin = picard_solve(phi, kCapacitor, NonlocalCoupling::none(), 0.2, pc);
  CHECK(lin.converged);
  CHECK(lin.iteration_errors.size() <= 2);

  auto c = NonlocalCoupling::capacitor(1.0, -1, 1);
  auto r02 = picard_solve(phi, kCapacitor, c, 0.2, pc);
  auto r01 = picard_solve(phi, kCapacitor, c, 0.1, pc);
  CHECK(r02.converged);
  const double d02 = contraction_ratio(r02.iteration_errors);
  CHECK(d02 < 0.5);
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(r02.iteration_errors[i] < r02.iteration_errors[i - 1]);
  CHECK(lipschitz_quotient(r01.iteration_errors) <= 0.5 * lipschitz_quotient(r02.iteration_errors) * 1.05);

  EvolutionConfig e;
  e.dt = 1e-4;
  e.t_final = 0.2;
  auto ev = evolve(phi, kCapacitor, c, e);
  CHECK(l2_norm(ev.final_state() - r02.trajectory.final_state()) < 1e-6);
}

TEST_CASE("continuous dependence is linear in the perturbation") {
  auto g = make_grid(-40, 40, 1024);
  Model m(g, kCapacitor, NonlocalCoupling::capacitor(1.0, -1, 1));
  auto phi = gaussian_packet(g, -3, 1.0, 1.5);
  auto eta = random_perturbation(g, 11);
  CHECK(l2_norm(eta) > 0);
  auto a = random_perturbation(g, 11), b = random_perturbation(g, 12);
  CHECK(max_diff(a, eta) == 0.0);
  CHECK(max_diff(a, b) > 0.0);
  auto rows = continuous_dependence(phi, eta, m, 0.5, 1e-3, {1e-2, 1e-3, 1e-4});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.ratio == doctest::Approx(rows[0].ratio).epsilon(0.2));
}
