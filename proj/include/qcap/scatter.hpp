#pragma once

// Wave operators, linear and nonlinear scattering operators, the small-amplitude
// derivative, the cubic response and recovery of the coupling constant.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qcap/evolve.hpp"
#include "qcap/jost.hpp"

namespace qcap {

/// Generalized Fourier transforms built from the scattering states of H on the
/// DFT wavenumbers of a grid. W- synthesizes with psi+(x,k) (k > 0: t f1(x,k);
/// k < 0: t f2(x,|k|)), W+ with psi-(x,k) = conj psi+(x,-k). Outside the support
/// of V0 the states are two plane waves, so those regions go through FFTs; only
/// the samples inside the support use a dense sum. The Nyquist mode is kept as
/// a free plane wave; the k = 0 mode too for exceptional V0, and it is dropped
/// for generic V0, whose zero-energy scattering states vanish.
class DistortedTransform {
 public:
  DistortedTransform(GridPtr grid, PotentialSpec v0, const JostOptions& opt = {});

  const GridPtr& grid() const noexcept { return grid_; }
  const PotentialSpec& potential() const noexcept { return v0_; }
  /// Scattering coefficients on the positive DFT wavenumbers k_1 .. k_{n/2-1}.
  const ScatteringData& data() const noexcept { return data_; }

  WaveFunction w_minus(const WaveFunction& phi) const { return apply(incoming_, phi); }
  WaveFunction w_plus(const WaveFunction& phi) const { return apply(outgoing_, phi); }
  WaveFunction w_minus_adjoint(const WaveFunction& g) const { return adjoint(incoming_, g); }
  WaveFunction w_plus_adjoint(const WaveFunction& g) const { return adjoint(outgoing_, g); }
  /// Least-squares inverses. On a finite periodic box the sampled states are not
  /// exactly orthonormal, so the adjoint is only an approximate inverse; these
  /// refine it by iterating x += W*(g - W x).
  WaveFunction w_minus_inverse(const WaveFunction& g) const { return inverse(incoming_, g); }
  WaveFunction w_plus_inverse(const WaveFunction& g) const { return inverse(outgoing_, g); }
  /// The k = 0 component when it is dropped (generic V0), else zero. S acts on
  /// it as the identity.
  WaveFunction zero_mode(const WaveFunction& phi) const;

 private:
  // Per DFT index m: psi = alpha e^{ik x} + beta e^{-ik x} on each side, plus
  // the interior samples psi(x_i, k_m), stored row-major [interior i][m].
  struct Family {
    std::vector<cplx> alpha_left, beta_left, alpha_right, beta_right;
    std::vector<cplx> interior;
  };

  WaveFunction apply(const Family& fam, const WaveFunction& phi) const;
  WaveFunction adjoint(const Family& fam, const WaveFunction& g) const;
  WaveFunction inverse(const Family& fam, const WaveFunction& g) const;

  GridPtr grid_;
  PotentialSpec v0_;
  ScatteringData data_;
  std::vector<std::size_t> left_, interior_, right_;
  std::vector<std::size_t> mirror_;
  std::vector<cplx> phase_;  // e^{-i k_m x_min}
  Family incoming_, outgoing_;
};

using TransformPtr = std::shared_ptr<const DistortedTransform>;

/// Screens for bound states (PreconditionViolated) and builds the transform.
TransformPtr build_wave_operators(const PotentialSpec& v0, GridPtr grid, const JostOptions& opt = {});

/// S_L = W+* W-.
class LinearScatteringOperator {
 public:
  enum class Path { Matrix, Composition };

  explicit LinearScatteringOperator(TransformPtr transform);

  /// Matrix path: on each pair (k, -k), k > 0, the amplitudes transform by
  /// [[t, r_right], [r_left, t]]. Composition path: W+*(W- phi).
  WaveFunction apply(const WaveFunction& phi, Path path = Path::Matrix) const;
  const TransformPtr& transform() const noexcept { return transform_; }

 private:
  TransformPtr transform_;
};

LinearScatteringOperator linear_scattering_operator(const PotentialSpec& v0, GridPtr grid,
                                                    const JostOptions& opt = {});

// ---------------------------------------------------------------------------

struct ScatterConfig {
  double dt = 1e-3;
  /// Split-step sub-cycling as in EvolutionConfig; zero disables.
  double max_kinetic_phase = 0.0;
  /// Asymptotic time; zero picks T = factor * R / v_min from the packet, where R
  /// bounds the interaction region and the packet, and v_min = 2 max(kbar - 2 sk, 0.5).
  double T = 0.0;
  double T_factor = 10.0;
  double T_min = 1.0;
  double T_max = 20.0;
  /// Accepted change of phi+ between T and 1.25 T, relative to ||phi-||.
  double matching_tol = 1e-6;
  std::size_t max_refinements = 3;
  /// Ladder for the derivative and lambda recovery.
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  /// Cubic functional: stop once the integrand drops below this fraction of its peak.
  double quartic_cutoff = 1e-12;
  double quartic_T_max = 20.0;
};

/// phi- and phi+ relative to the linear flow exp(-itH): u(t) ~ exp(-itH) phi-
/// as t -> -inf and ~ exp(-itH) phi+ as t -> +inf.
struct AsymptoticPair {
  WaveFunction phi_minus;
  WaveFunction phi_plus;
  bool converged = false;
  /// ||phi+(1.25 T) - phi+(T)||, the change under the last refinement of T.
  double matching_error = 0.0;
  double T = 0.0;
};

/// Asymptotic time chosen from the packet's momentum content.
double asymptotic_time(const WaveFunction& phi, const Model& model, const ScatterConfig& cfg);

/// u(-T) = exp(iTH) phi-, full evolution to +T, phi+ = exp(iTH) u(T); repeated
/// with T -> 1.25 T until phi+ settles (NotAsymptotic after max_refinements).
AsymptoticPair nonlinear_scattering(const WaveFunction& phi_minus, const Model& model,
                                    const ScatterConfig& cfg = {});
AsymptoticPair nonlinear_scattering(const WaveFunction& phi_minus, const PotentialSpec& v0,
                                    const NonlocalCoupling& c, const ScatterConfig& cfg = {});

/// A map between free asymptotic states, e.g. the full scattering operator.
using ScatteringMap = std::function<WaveFunction(const WaveFunction&)>;

/// S = W+* S_V0 W- for a fixed model; holds the transform.
class FullScattering {
 public:
  FullScattering(Model model, TransformPtr transform, ScatterConfig cfg = {});

  WaveFunction operator()(const WaveFunction& phi_minus) const;
  /// Same, also returning the interaction-picture pair.
  WaveFunction apply(const WaveFunction& phi_minus, AsymptoticPair* pair) const;

  const Model& model() const noexcept { return model_; }
  const TransformPtr& transform() const noexcept { return transform_; }
  const ScatterConfig& config() const noexcept { return cfg_; }
  ScatteringMap as_map() const;

 private:
  Model model_;
  TransformPtr transform_;
  ScatterConfig cfg_;
};

WaveFunction full_scattering(const WaveFunction& phi_minus, const PotentialSpec& v0,
                             const NonlocalCoupling& c, const ScatterConfig& cfg = {});

// ---------------------------------------------------------------------------

/// Coefficients of S(eps phi)/eps = A + eps^2 B + eps^4 C + ... fitted over the ladder.
struct EpsilonFit {
  std::vector<double> epsilons;
  std::vector<WaveFunction> quotients;  // S(eps phi)/eps
  WaveFunction limit;                   // A
  WaveFunction cubic;                   // B
  /// ||A - A'|| and ||B - B'|| with A', B' from the fit of one order lower
  /// through the smallest epsilons.
  double limit_error = 0.0;
  double cubic_error = 0.0;
};

/// Evaluates the ladder (in parallel) and fits it. Throws NonMonotoneConvergence
/// when successive quotients do not approach each other.
EpsilonFit epsilon_ladder(const WaveFunction& phi, const ScatteringMap& S,
                          const std::vector<double>& epsilons);

struct DerivativeEstimate {
  WaveFunction value;  // extrapolated S_L phi
  double error_estimate;
  EpsilonFit fit;
};

DerivativeEstimate small_amplitude_derivative(const WaveFunction& phi, const ScatteringMap& S,
                                              const ScatterConfig& cfg = {});
DerivativeEstimate small_amplitude_derivative(const WaveFunction& phi, const PotentialSpec& v0,
                                              const NonlocalCoupling& c,
                                              const ScatterConfig& cfg = {});

struct QuarticFunctional {
  /// int (V1 u, u)(V2 u, u) dt over u = exp(-itH) phi, t in R (truncated).
  cplx value = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// False when the cutoff was not reached before quartic_T_max on either side.
  bool truncation_reached = true;
};

QuarticFunctional quartic_functional(const WaveFunction& phi, const Model& model,
                                     const ScatterConfig& cfg = {});

struct CubicResponse {
  cplx direct;           // lambda * quartic functional
  cplx from_scattering;  // eps^-3 i ((S_V0 - I)(eps phi), phi)
  double epsilon;
  bool truncation_reached;
};

CubicResponse cubic_response(const WaveFunction& phi, const Model& model, double epsilon,
                             const ScatterConfig& cfg = {});
CubicResponse cubic_response(const WaveFunction& phi, const PotentialSpec& v0,
                             const NonlocalCoupling& c, double epsilon,
                             const ScatterConfig& cfg = {});

struct LambdaEstimate {
  cplx lambda_hat;
  double error_estimate;
  cplx denominator;
  bool truncation_reached;
  EpsilonFit fit;
};

/// lambda from the black-box S: with psi = W-* phi, fit S(eps psi)/eps over the
/// ladder, then lambda = i (B, W+* phi) / D with D the quartic functional of phi.
/// `shape` supplies V1 and V2 (its lambda is ignored); `transform` must be built
/// from the known or reconstructed V0.
LambdaEstimate recover_lambda(const ScatteringMap& S, const WaveFunction& phi,
                              const TransformPtr& transform, const NonlocalCoupling& shape,
                              const ScatterConfig& cfg = {});

/// Default probe: unit-norm Gaussian, k0 = 2, centred on the V2 support.
WaveFunction default_probe(GridPtr grid, const NonlocalCoupling& c, double sigma = 2.0,
                           double k0 = 2.0);

}  // namespace qcap
