#pragma once

// Conserved quantities and the checks that a trajectory keeps them.

#include <string>
#include <vector>

#include "qcap/evolve.hpp"

namespace qcap {

/// E(u) = (u', u') + (V0 u, u) + (lambda/2) (V1 u, u) (V2 u, u), with u' spectral.
/// The imaginary part is only guaranteed to vanish when V1 is a real multiple of
/// a real V2 and lambda is real.
cplx energy_complex(std::span<const cplx> u, const Model& model);
double energy(const WaveFunction& u, const Model& model);
double energy(const WaveFunction& u, const PotentialSpec& v0, const NonlocalCoupling& c);

/// Which conservation statements apply to a coupling.
struct ConservationHypotheses {
  bool norm_conserved;    // lambda V2 and V1 real
  bool energy_conserved;  // additionally V1 a real multiple of V2
};

ConservationHypotheses hypotheses(const NonlocalCoupling& c);

struct ConservationTolerances {
  double norm = 1e-8;
  double energy = 1e-6;
};

struct ConservationReport {
  std::vector<double> times;
  /// |  ||u(t)|| - ||u(0)||  | / ||u(0)||
  std::vector<double> norm_drift;
  /// | E(t) - E(0) | / (|E(0)| + 1)
  std::vector<double> energy_drift;
  ConservationHypotheses applicable{};
  ConservationTolerances tolerances{};
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;
  bool norm_pass = false;
  bool energy_pass = false;

  /// Passes when every applicable quantity stays within tolerance.
  bool pass() const {
    return (!applicable.norm_conserved || norm_pass) &&
           (!applicable.energy_conserved || energy_pass);
  }
};

ConservationReport verify_conservation(const Trajectory& traj, const Model& model,
                                       const ConservationTolerances& tol = {});
ConservationReport verify_conservation(const Trajectory& traj, const PotentialSpec& v0,
                                       const NonlocalCoupling& c,
                                       const ConservationTolerances& tol = {});

/// Centered finite-difference derivative of ||u(t)||^2 along the recorded diagnostics.
std::vector<double> norm_squared_rate(const Trajectory& traj);

}  // namespace qcap
