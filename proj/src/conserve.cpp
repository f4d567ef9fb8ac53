#include "qcap/conserve.hpp"

#include <algorithm>
#include <cmath>

namespace qcap {

cplx energy_complex(std::span<const cplx> u, const Model& model) {
  const auto& g = *model.grid();
  require(u.size() == g.size(), ErrorKind::GridMismatch, "state size differs from grid");
  Fft fft(g.size());
  std::vector<cplx> c(u.begin(), u.end());
  fft.forward(c);
  // Parseval: dx sum |u'|^2 = (dx / n) sum k^2 |c_k|^2.
  double kin = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) kin += g.k(j) * g.k(j) * std::norm(c[j]);
  kin *= g.dx() / static_cast<double>(g.size());

  double pot = 0.0;
  const auto v0 = model.v0();
  for (std::size_t j = 0; j < u.size(); ++j) pot += v0[j] * std::norm(u[j]);
  pot *= g.dx();

  cplx nl = 0.0;
  if (model.lambda() != cplx(0.0)) {
    nl = 0.5 * model.lambda() * model.v1_scalar(u) * model.v2_scalar(u);
  }
  return kin + pot + nl;
}

double energy(const WaveFunction& u, const Model& model) {
  require_same_grid(*u.grid, *model.grid());
  return energy_complex(u.values, model).real();
}

double energy(const WaveFunction& u, const PotentialSpec& v0, const NonlocalCoupling& c) {
  return energy(u, Model(u.grid, v0, c));
}

ConservationHypotheses hypotheses(const NonlocalCoupling& c) {
  const bool norm = c.lambda_real() && c.v1_real() && c.v2_real();
  return {norm, norm && c.v1_real_multiple_of_v2()};
}

ConservationReport verify_conservation(const Trajectory& traj, const Model& model,
                                       const ConservationTolerances& tol) {
  require(!traj.diagnostics.empty(), ErrorKind::InvalidArgument, "empty trajectory");
  ConservationReport r;
  r.applicable = hypotheses(model.coupling());
  r.tolerances = tol;
  r.times = traj.times;
  const double n0 = traj.diagnostics.front().norm;
  const double e0 = traj.diagnostics.front().energy;
  for (const auto& d : traj.diagnostics) {
    r.norm_drift.push_back(std::abs(d.norm - n0) / std::max(n0, 1e-300));
    r.energy_drift.push_back(std::abs(d.energy - e0) / (std::abs(e0) + 1.0));
  }
  r.max_norm_drift = *std::max_element(r.norm_drift.begin(), r.norm_drift.end());
  r.max_energy_drift = *std::max_element(r.energy_drift.begin(), r.energy_drift.end());
  r.norm_pass = r.max_norm_drift <= tol.norm;
  r.energy_pass = r.max_energy_drift <= tol.energy;
  return r;
}

ConservationReport verify_conservation(const Trajectory& traj, const PotentialSpec& v0,
                                       const NonlocalCoupling& c,
                                       const ConservationTolerances& tol) {
  require(!traj.states.empty(), ErrorKind::InvalidArgument, "empty trajectory");
  return verify_conservation(traj, Model(traj.states.front().grid, v0, c), tol);
}

std::vector<double> norm_squared_rate(const Trajectory& traj) {
  const auto& t = traj.times;
  const auto& d = traj.diagnostics;
  std::vector<double> rate(t.size(), 0.0);
  if (t.size() < 2) return rate;
  auto sq = [&](std::size_t i) { return d[i].norm * d[i].norm; };
  rate.front() = (sq(1) - sq(0)) / (t[1] - t[0]);
  rate.back() = (sq(t.size() - 1) - sq(t.size() - 2)) / (t.back() - t[t.size() - 2]);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    rate[i] = (sq(i + 1) - sq(i - 1)) / (t[i + 1] - t[i - 1]);
  }
  return rate;
}

}  // namespace qcap
