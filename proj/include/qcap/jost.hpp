#pragma once

// Stationary scattering for -f'' + V0 f = k^2 f: Jost solutions, Wronskians,
// zero-energy classification, reflection/transmission, bound-state screening.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "qcap/field.hpp"

namespace qcap {

/// Right: f1 ~ e^{ikx} as x -> +inf. Left: f2 ~ e^{-ikx} as x -> -inf.
enum class Side { Left, Right };

enum class Classification { Generic, Exceptional };
const char* to_string(Classification c) noexcept;

struct JostOptions {
  /// Sampling extends this far beyond the support of V0 on both sides.
  double margin = 1.0;
  /// Sample spacing of solve_jost's default grid.
  double spacing = 0.01;
  double rtol = 1e-12;
  double atol = 1e-13;
};

struct JostSolution {
  double k = 0.0;
  Side side = Side::Right;
  std::vector<double> x;
  std::vector<cplx> f;
  std::vector<cplx> df;
};

/// Integrates inward from the potential-free side with adaptive Dormand-Prince,
/// piecewise between the jumps of V0. Outside the support the samples use the
/// exact plane-wave combination.
JostSolution solve_jost(const PotentialSpec& v0, double k, Side side, const JostOptions& opt = {});
/// Same, sampled at the sorted points `xs`.
JostSolution solve_jost(const PotentialSpec& v0, double k, Side side, std::span<const double> xs,
                        const JostOptions& opt = {});

/// [f, g] = f' g - f g' at the middle sample; throws IllConditioned when it
/// varies by more than 1e-6 across the samples.
cplx wronskian(const JostSolution& f, const JostSolution& g);
/// Largest deviation of the pointwise Wronskian from its mid-point value.
double wronskian_variation(const JostSolution& f, const JostSolution& g);

struct ClassifyResult {
  Classification kind;
  cplx wronskian_at_zero;
  double tolerance;
};

/// Zero-energy Jost solutions (f1 = 1 right of the support, f2 = 1 left of it)
/// and their Wronskian; Exceptional when |W| < 1e-6 (1 + ||V0||_1).
ClassifyResult classify(const PotentialSpec& v0, const JostOptions& opt = {});

/// Both Jost solutions at one k > 0 together with the scattering coefficients.
/// t = 2ik / [f1, f2]; r_left from f1 = (e^{ikx} + r_left e^{-ikx}) / t left of
/// the support, r_right from f2 = (e^{-ikx} + r_right e^{ikx}) / t right of it.
struct JostPair {
  double k;
  cplx t;
  cplx r_left;
  cplx r_right;
  cplx wronskian;
  std::vector<cplx> f1;  // at the requested points
  std::vector<cplx> f2;
};

JostPair jost_pair(const PotentialSpec& v0, double k, std::span<const double> xs = {},
                   const JostOptions& opt = {});

struct ScatteringData {
  std::vector<double> k;
  std::vector<cplx> t;
  std::vector<cplx> r_left;
  std::vector<cplx> r_right;
  Classification classification = Classification::Generic;
  cplx wronskian_at_zero = 0.0;

  std::size_t size() const noexcept { return k.size(); }
  /// max_k max(| |t|^2 + |r_left|^2 - 1 |, | |t|^2 + |r_right|^2 - 1 |)
  double unitarity_defect() const;
};

/// 256 log-spaced wavenumbers in [0.05, 40].
std::vector<double> default_k_grid(std::size_t n = 256, double k_min = 0.05, double k_max = 40.0);

/// Screens for bound states first (PreconditionViolated if any), then maps
/// jost_pair over k_grid in parallel.
ScatteringData reflection_transmission(const PotentialSpec& v0, std::span<const double> k_grid,
                                       const JostOptions& opt = {});

struct BoundStateOptions {
  /// Finite-difference spacing and the Dirichlet box margin around the support.
  double spacing = 0.01;
  double margin = 20.0;
};

/// Negative eigenvalues of the finite-difference H on a Dirichlet box; checked
/// against the zero count of f2(x, 0) on the whole line (Inconsistent on mismatch).
std::size_t count_bound_states(const PotentialSpec& v0, const BoundStateOptions& opt = {});
std::size_t count_bound_states_eigen(const PotentialSpec& v0, const BoundStateOptions& opt = {});
std::size_t count_bound_states_sturm(const PotentialSpec& v0, const JostOptions& opt = {});

/// Columns k, re_t, im_t, re_rl, im_rl, re_rr, im_rr.
void write_csv(std::ostream& os, const ScatteringData& sd);

}  // namespace qcap
