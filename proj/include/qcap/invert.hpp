#pragma once

// Reconstruction of V0 from one reflection coefficient (Marchenko equation) and
// extraction of the capacitor parameters.

#include <vector>

#include "qcap/jost.hpp"
#include "qcap/scatter.hpp"

namespace qcap {

/// F(s) = (1/2 pi) int r_right(k) e^{iks} dk on s = 2 x_0 + j dx, j = 0 .. 2(n-1),
/// for the reconstruction grid x_j. Zero beyond the last sample.
struct MarchenkoKernel {
  GridPtr x_grid;
  std::vector<double> s;
  std::vector<double> F;
  /// Largest |Im F| before the real part is taken.
  double max_imag = 0.0;
  /// Start of the taper; above it the kernel no longer follows the data.
  double k_window = 0.0;
  ScatteringData source;
};

struct KernelOptions {
  /// Raised-cosine taper over this trailing fraction of the k range.
  double taper_fraction = 0.1;
  /// Accepted max | |t|^2 + |r|^2 - 1 | of the input.
  double unitarity_tol = 1e-4;
};

/// The k grid must be uniform and start within one spacing of 0; r(0) is
/// extrapolated linearly. BadData on non-uniform or non-unitary input.
MarchenkoKernel build_kernel(const ScatteringData& sd, GridPtr x_grid,
                             const KernelOptions& opt = {});

struct MarchenkoOptions {
  double condition_limit = 1e12;
  /// Re-run the forward problem on the result and record the residual.
  bool compute_residual = true;
  /// Only every stride-th input k enters the residual.
  std::size_t residual_stride = 1;
};

struct ReconstructionResult {
  GridPtr x_grid;
  std::vector<double> v0_hat;  // cell values on x_grid
  std::vector<double> k_diag;  // K(x, x)
  /// sup |r_right(v0_hat) - r_right(input)| over the input k below the taper;
  /// negative when not computed.
  double residual = -1.0;
  double max_condition = 0.0;
  ScatteringData source;

  PotentialSpec potential() const { return SampledPotential{x_grid, v0_hat}; }
};

/// For each x: K(x,y) + F(x+y) + int_x^{s_max - x} K(x,z) F(z+y) dz = 0 by a
/// trapezoidal Nystrom system on the x grid spacing; V0(x) = -2 d/dx K(x,x).
/// IllPosed when a system's condition number exceeds the limit.
ReconstructionResult marchenko_solve(const MarchenkoKernel& kernel,
                                     const MarchenkoOptions& opt = {});

/// Reflection data on the uniform positive grid k_j = j dk, j = 1..n, from the Jost module.
ScatteringData uniform_scattering_data(const PotentialSpec& v0, double dk, double k_max,
                                       const JostOptions& opt = {});

// ---------------------------------------------------------------------------

struct ReconstructConfig {
  /// Probe packets: Gaussians of width sigma at mean momentum k0 each, started
  /// at -offset (k0 > 0) or +offset (k0 < 0) so they come in toward the origin.
  std::vector<double> probe_k0{5, -5, 10, -10, 20, -20, 30, -30, 40, -40};
  double probe_sigma = 0.25;
  double probe_offset = 3.0;
  /// Reflection data are read off on the DFT wavenumbers up to k_max.
  double k_max = 40.0;
  /// Pairs whose probe amplitude matrix has a smaller relative singular value are dropped.
  double min_singular = 1e-6;
  ScatterConfig scatter;
  KernelOptions kernel;
  MarchenkoOptions marchenko;
};

struct SFromProbes {
  ScatteringData data;          // on the DFT wavenumbers up to k_max
  std::vector<double> rel_error;  // Richardson error estimate per probe
};

/// Assembles S_L in momentum space from small_amplitude_derivative over the probe
/// basis and reads off t, r_left, r_right by least squares per (k, -k) pair.
SFromProbes scattering_data_from_S(const ScatteringMap& S, GridPtr grid,
                                   const ReconstructConfig& cfg);

/// scattering_data_from_S, then build_kernel and marchenko_solve on x_grid.
ReconstructionResult reconstruct_from_S(const ScatteringMap& S, GridPtr grid, GridPtr x_grid,
                                        const ReconstructConfig& cfg = {});

// ---------------------------------------------------------------------------

struct CapacitorParams {
  double beta1, beta2, a, b, c, d;
};

struct CapacitorFit {
  CapacitorParams value;
  CapacitorParams uncertainty;
};

/// Two plateaus above a quarter of the maximum: edges at half-height crossings
/// (linear interpolation), heights as plateau medians, uncertainties from the
/// plateau spread. ShapeMismatch unless exactly two plateaus are found.
CapacitorFit fit_capacitor_params(const ReconstructionResult& r);
CapacitorFit fit_capacitor_params(const SpatialGrid& grid, const std::vector<double>& values);

}  // namespace qcap
