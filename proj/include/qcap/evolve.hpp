#pragma once

// Time propagation of i u_t = -u'' + V0 u + lambda (V1 u, u) V2 u on a periodic grid.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "qcap/fft.hpp"
#include "qcap/field.hpp"

namespace qcap {

/// Grid samples of V0, V1, V2 plus the coupling, shared by all steppers.
class Model {
 public:
  Model(GridPtr grid, PotentialSpec v0, NonlocalCoupling coupling);

  const GridPtr& grid() const noexcept { return grid_; }
  const PotentialSpec& v0_spec() const noexcept { return v0_spec_; }
  const NonlocalCoupling& coupling() const noexcept { return coupling_; }
  cplx lambda() const noexcept { return coupling_.lambda(); }

  std::span<const double> v0() const noexcept { return v0_; }
  std::span<const cplx> v1() const noexcept { return v1_; }
  std::span<const cplx> v2() const noexcept { return v2_; }
  /// Indices where V1 (resp. V2) is nonzero.
  std::span<const std::size_t> v1_support() const noexcept { return v1_idx_; }
  std::span<const std::size_t> v2_support() const noexcept { return v2_idx_; }

  /// (V1 u, u) = dx sum V1 |u|^2.
  cplx v1_scalar(std::span<const cplx> u) const noexcept;
  /// (V2 u, u).
  cplx v2_scalar(std::span<const cplx> u) const noexcept;

  Model with_lambda(cplx lambda) const;
  Model linear() const { return with_lambda(0.0); }

 private:
  GridPtr grid_;
  PotentialSpec v0_spec_;
  NonlocalCoupling coupling_;
  std::vector<double> v0_;
  std::vector<cplx> v1_, v2_;
  std::vector<std::size_t> v1_idx_, v2_idx_;
};

/// -u'' + V0 u with the derivative taken spectrally.
WaveFunction apply_hamiltonian(const WaveFunction& u, const PotentialSpec& v0);
WaveFunction apply_hamiltonian(const WaveFunction& u, const Model& model);

/// lambda (V1 u, u) V2 u.
WaveFunction nonlinear_term(const WaveFunction& u, const NonlocalCoupling& c);
WaveFunction nonlinear_term(const WaveFunction& u, const Model& model);

/// Exact discrete free flow: Fourier coefficients times exp(-i k^2 t).
WaveFunction free_propagate(const WaveFunction& phi, double t);

/// Strang splitting: half potential step with the nonlocal scalar frozen at its
/// current value, exact kinetic step, half potential step with the scalar
/// recomputed. A negative dt runs the same scheme backwards; for lambda = 0 the
/// steps for dt and -dt are exact inverses.
class SplitStepper {
 public:
  SplitStepper(const Model& model, double dt);

  double dt() const noexcept { return dt_; }
  void step(std::vector<cplx>& u) const;
  /// Same step with lambda treated as zero.
  void step_linear(std::vector<cplx>& u) const;

 private:
  void potential_half(std::vector<cplx>& u, bool nonlinear) const;

  const Model* model_;
  double dt_;
  Fft fft_;
  std::vector<cplx> kinetic_;
  std::vector<cplx> half_v0_;
  mutable std::vector<cplx> scratch_;
};

/// Crank-Nicolson with the three-point Laplacian on the periodic grid and the
/// nonlocal scalar taken at the half step (predictor plus one correction).
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const Model& model, double dt);

  double dt() const noexcept { return dt_; }
  void step(std::vector<cplx>& u) const;

 private:
  void solve(std::vector<cplx>& out, const std::vector<cplx>& u, cplx scalar) const;

  const Model* model_;
  double dt_;
};

WaveFunction step_split(const WaveFunction& u, const PotentialSpec& v0, const NonlocalCoupling& c,
                        double dt);
WaveFunction step_crank_nicolson(const WaveFunction& u, const PotentialSpec& v0,
                                 const NonlocalCoupling& c, double dt);

// ---------------------------------------------------------------------------

enum class Method { SplitStep, CrankNicolson };

/// Smooth absorber: each step multiplies by exp(-strength dt cos^2(pi d / (2 width)))
/// at distance d < width from either grid edge.
struct AbsorbingMask {
  double width;
  double strength;
};

struct PicardConfig {
  /// Quadrature nodes on [0, T]; 0 picks the smallest count >= min_time_nodes with
  /// k_max^2 h <= max_kinetic_phase for the node spacing h. Coarser node sets put
  /// the trapezoidal Duhamel sum on an unresolved oscillation.
  std::size_t n_time_nodes = 0;
  std::size_t min_time_nodes = 101;
  double max_kinetic_phase = std::numbers::pi;
  std::size_t max_iters = 60;
  double tol = 1e-12;
  /// Linear split steps per node interval when applying exp(-i h H).
  std::size_t substeps = 8;
};

struct EvolutionConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  Method method = Method::SplitStep;
  std::optional<AbsorbingMask> absorbing;  // periodic when empty
  PicardConfig picard;
  /// Keep every n-th state (the first and last state are always kept); 0 keeps only those two.
  std::size_t snapshot_every = 0;
  /// Interval for the trapped-charge diagnostic; defaults to the support of V2.
  std::optional<Interval> charge_window;
  /// Growth factor of the L2 norm treated as blow-up.
  double blowup_factor = 1e6;
  /// Split step only: each step of size dt is cut into equal substeps h with
  /// k_max^2 h <= this phase, which keeps the kinetic phase clear of the 2 pi
  /// step-size resonance. Zero disables sub-cycling.
  double max_kinetic_phase = std::numbers::pi;

  void validate(const SpatialGrid& grid) const;
};

struct Diagnostics {
  double norm;
  double energy;
  double charge;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Diagnostics> diagnostics;
  std::vector<WaveFunction> states;
  bool blew_up = false;

  const WaveFunction& final_state() const { return states.back(); }
};

Trajectory evolve(const WaveFunction& phi, const Model& model, const EvolutionConfig& cfg);
Trajectory evolve(const WaveFunction& phi, const PotentialSpec& v0, const NonlocalCoupling& c,
                  const EvolutionConfig& cfg);

struct PicardResult {
  Trajectory trajectory;
  /// sup over time nodes of ||u^{m+1} - u^m||, one entry per iteration.
  std::vector<double> iteration_errors;
  bool converged = false;
};

/// Node count used by picard_solve on [0, T].
std::size_t picard_nodes(const SpatialGrid& grid, double T, const PicardConfig& cfg);

/// Fixed-point iteration of the Duhamel form u = exp(-itH) phi - i int_0^t exp(-i(t-s)H) F(u(s)) ds
/// on a uniform node set of [0, T] with trapezoidal quadrature.
PicardResult picard_solve(const WaveFunction& phi, const Model& model, double T,
                          const PicardConfig& cfg);
PicardResult picard_solve(const WaveFunction& phi, const PotentialSpec& v0,
                          const NonlocalCoupling& c, double T, const PicardConfig& cfg);

/// Largest ratio of successive Picard iteration errors, ignoring errors already
/// at the rounding floor.
/// Substeps used by evolve for a split step of size dt.
std::size_t split_substeps(const SpatialGrid& grid, double dt, double max_kinetic_phase);

double contraction_ratio(const std::vector<double>& iteration_errors, double floor = 1e-14);

/// e_1 / e_0: the first-step quotient ||u^2 - u^1|| / ||u^1 - u^0||, an empirical
/// Lipschitz constant of the Picard map on [0, T].
double lipschitz_quotient(const std::vector<double>& iteration_errors);

struct DependenceRow {
  double delta;         // ||phi_delta - phi||
  double sup_distance;  // max over step times of ||u_delta(t) - u(t)||
  double ratio;         // sup_distance / delta
};

/// Evolves phi and phi + delta eta / ||eta|| side by side with the sub-cycled
/// split step and records the largest distance over the step times.
std::vector<DependenceRow> continuous_dependence(const WaveFunction& phi, const WaveFunction& eta,
                                                 const Model& model, double t_final, double dt,
                                                 const std::vector<double>& deltas);

/// Smooth random perturbation: a few Gaussians with random centres in the middle
/// half of the grid, widths in [0.5, 2], momenta in [-3, 3] and complex weights.
WaveFunction random_perturbation(GridPtr grid, std::uint64_t seed);

}  // namespace qcap
