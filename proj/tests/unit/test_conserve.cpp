#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "qcap/conserve.hpp"

using namespace qcap;

namespace {

const PotentialSpec kCapacitor = PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2);

// Analytic kinetic term of a Gaussian plus plain cell sums of the rest.
double energy_oracle(const WaveFunction& u, double sigma, double k0, const PotentialSpec& v0,
                     double lambda, double b, double c) {
  const auto& g = u.g();
  double n2 = 0, pot = 0, q = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double p = std::norm(u.values[j]);
    n2 += p * g.dx();
    pot += v0(g.x(j)) * p * g.dx();
    if (g.x(j) >= b && g.x(j) <= c) q += p * g.dx();
  }
  return n2 * (k0 * k0 + 1.0 / (4 * sigma * sigma)) + pot + 0.5 * lambda * q * q;
}

}  // namespace

TEST_CASE("energy values") {
  auto g = make_grid(0, 2 * oracle::pi, 256);
  auto pw = WaveFunction::zeros(g);
  const double k = 7.0;
  for (std::size_t j = 0; j < g->size(); ++j) pw.values[j] = std::exp(cplx(0, k * g->x(j)));
  const double n2 = std::pow(l2_norm(pw), 2);
  CHECK(std::abs(energy(pw, PotentialSpec::zero(), NonlocalCoupling::none()) - k * k * n2) <
        1e-10 * k * k * n2);
  CHECK(energy(WaveFunction::zeros(g), kCapacitor, NonlocalCoupling::none()) == 0.0);

  auto lg = make_grid(-40, 40, 2048);
  auto u = gaussian_packet(lg, -0.5, 1.0, 2.0);
  auto c = NonlocalCoupling::capacitor(1.0, -1, 1);
  const double e = energy(u, kCapacitor, c);
  CHECK(std::abs(e - energy_oracle(u, 1.0, 2.0, kCapacitor, 1.0, -1, 1)) < 1e-10);

  // global phase
  auto ph = cplx(std::cos(0.7), std::sin(0.7)) * u;
  CHECK(std::abs(energy(ph, kCapacitor, c) - e) < 1e-12 * std::abs(e));
}

TEST_CASE("conservation hypotheses") {
  auto h = hypotheses(NonlocalCoupling::capacitor(1.0, -1, 1));
  CHECK(h.norm_conserved);
  CHECK(h.energy_conserved);
  auto hc = hypotheses(NonlocalCoupling::capacitor(cplx(1, 0.2), -1, 1));
  CHECK_FALSE(hc.norm_conserved);
  CHECK_FALSE(hc.energy_conserved);
}

TEST_CASE("verify conservation") {
  auto g = make_grid(-40, 40, 2048);
  auto phi = gaussian_packet(g, -6, 1.0, 2.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.snapshot_every = 100;

  auto free = evolve(phi, PotentialSpec::zero(), NonlocalCoupling::none(), cfg);
  auto rf = verify_conservation(free, PotentialSpec::zero(), NonlocalCoupling::none());
  CHECK(rf.max_norm_drift < 1e-10);
  CHECK(rf.max_energy_drift < 1e-10);
  CHECK(rf.pass());

  auto cc = NonlocalCoupling::capacitor(cplx(1.0, 0.3), -1, 1);
  auto traj = evolve(phi, kCapacitor, cc, cfg);
  auto rc = verify_conservation(traj, kCapacitor, cc);
  CHECK_FALSE(rc.applicable.norm_conserved);
  CHECK(rc.times.size() == traj.times.size());

  auto rate = norm_squared_rate(traj);
  CHECK(rate.size() == traj.times.size());
}
