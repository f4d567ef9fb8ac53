#pragma once

// Discretisation backbone: the periodic 1D grid, sampled wavefunctions, the
// real external potential V0 and the nonlocal coupling (lambda, V1, V2).

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "qcap/errors.hpp"

namespace qcap {

using cplx = std::complex<double>;

/// Uniform grid x_j = x_min + j*dx, j = 0..n-1, dx = (x_max - x_min)/n, together
/// with the dual DFT wavenumbers k_j = 2*pi*m/L for m in [-n/2, n/2).
/// Immutable; shared between fields through GridPtr.
class SpatialGrid {
 public:
  SpatialGrid(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double dx() const noexcept { return dx_; }
  std::size_t size() const noexcept { return n_; }

  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }
  double k(std::size_t j) const noexcept { return k_[j]; }
  std::span<const double> xs() const noexcept { return x_; }
  std::span<const double> ks() const noexcept { return k_; }

  /// DFT index of the wavenumber -k_j (the Nyquist index maps to itself).
  std::size_t mirror(std::size_t j) const noexcept { return j == 0 ? 0 : n_ - j; }
  std::size_t nyquist_index() const noexcept { return n_ / 2; }

  bool same_as(const SpatialGrid& other) const noexcept {
    return this == &other ||
           (n_ == other.n_ && x_min_ == other.x_min_ && x_max_ == other.x_max_);
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
  std::vector<double> x_;
  std::vector<double> k_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

GridPtr make_grid(double x_min, double x_max, std::size_t n);

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b);

/// Complex samples of u(., t) on a grid.
struct WaveFunction {
  GridPtr grid;
  std::vector<cplx> values;
  double t = 0.0;

  WaveFunction() = default;
  WaveFunction(GridPtr g, std::vector<cplx> v, double time = 0.0);

  static WaveFunction zeros(GridPtr g, double time = 0.0);

  std::size_t size() const noexcept { return values.size(); }
  const SpatialGrid& g() const noexcept { return *grid; }

  WaveFunction& operator+=(const WaveFunction& o);
  WaveFunction& operator-=(const WaveFunction& o);
  WaveFunction& operator*=(cplx s);
  friend WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
  friend WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a -= b; }
  friend WaveFunction operator*(cplx s, WaveFunction a) { return a *= s; }
  friend WaveFunction operator*(WaveFunction a, cplx s) { return a *= s; }
};

bool all_finite(std::span<const cplx> values) noexcept;

// ---------------------------------------------------------------------------
// Potentials

struct Interval {
  double left;
  double right;
};

/// Heights on disjoint half-open intervals [left, right); zero elsewhere.
struct PiecewiseConstant {
  std::vector<Interval> intervals;
  std::vector<double> heights;
};

/// Values on the cells [x_j - dx/2, x_j + dx/2) of a grid; zero outside it.
struct SampledPotential {
  GridPtr grid;
  std::vector<double> values;
};

/// beta1 on [a, b), beta2 on [c, d).
struct DoubleBarrier {
  double beta1;
  double beta2;
  double a;
  double b;
  double c;
  double d;
};

class PotentialSpec {
 public:
  using Variant = std::variant<PiecewiseConstant, SampledPotential, DoubleBarrier>;

  PotentialSpec() : PotentialSpec(PiecewiseConstant{}) {}
  PotentialSpec(PiecewiseConstant p);
  PotentialSpec(SampledPotential s);
  PotentialSpec(DoubleBarrier d);

  static PotentialSpec zero() { return PotentialSpec(); }
  static PotentialSpec indicator(double left, double right, double height = 1.0);
  static PotentialSpec double_barrier(double beta1, double beta2, double a, double b, double c,
                                      double d);

  const Variant& variant() const noexcept { return v_; }

  /// Value at an arbitrary point of the line.
  double operator()(double x) const;

  /// Sorted points where the value may jump, within the support.
  std::vector<double> breakpoints() const;

  /// Smallest interval outside of which the potential vanishes; empty for V = 0.
  std::optional<Interval> support() const;

  double l1_norm() const;
  double sup_norm() const;
  bool is_zero() const { return !support().has_value(); }

  PotentialSpec scaled(double factor) const;

 private:
  Variant v_;
};

/// Real samples of a potential at the cell centres of a grid. Parts of the
/// spec lying outside the grid are clipped with a warning.
std::vector<double> evaluate_potential(const PotentialSpec& spec, const SpatialGrid& grid);

/// The nonlocal nonlinearity lambda (V1 u, u) V2 u. Complex weights are held as
/// real/imaginary pairs of specs.
class NonlocalCoupling {
 public:
  NonlocalCoupling(cplx lambda, PotentialSpec v1_re, PotentialSpec v1_im, PotentialSpec v2_re,
                   PotentialSpec v2_im);
  NonlocalCoupling(cplx lambda, PotentialSpec v1, PotentialSpec v2);

  static NonlocalCoupling none() { return {0.0, PotentialSpec(), PotentialSpec()}; }
  /// V1 = V2 = chi_[b,c], the charge trapped in the well.
  static NonlocalCoupling capacitor(cplx lambda, double b, double c);

  cplx lambda() const noexcept { return lambda_; }
  const PotentialSpec& v1_re() const noexcept { return v1_re_; }
  const PotentialSpec& v1_im() const noexcept { return v1_im_; }
  const PotentialSpec& v2_re() const noexcept { return v2_re_; }
  const PotentialSpec& v2_im() const noexcept { return v2_im_; }

  bool v1_real() const noexcept { return v1_real_; }
  bool v2_real() const noexcept { return v2_real_; }
  bool lambda_real() const noexcept { return lambda_.imag() == 0.0; }
  /// V1 = mu V2 with V1, V2 real and mu real; with real lambda this is the
  /// hypothesis under which the energy is conserved.
  bool v1_real_multiple_of_v2() const noexcept { return v1_multiple_of_v2_; }

  NonlocalCoupling with_lambda(cplx lambda) const;

 private:
  cplx lambda_;
  PotentialSpec v1_re_, v1_im_, v2_re_, v2_im_;
  bool v1_real_ = true;
  bool v2_real_ = true;
  bool v1_multiple_of_v2_ = false;
};

// ---------------------------------------------------------------------------
// Functionals

/// dx * sum conj(g_j) f_j: linear in the first slot, antilinear in the second.
cplx inner_product(const WaveFunction& f, const WaveFunction& g);
double l2_norm(const WaveFunction& f);
double l2_norm(std::span<const cplx> values, double dx);

/// Q(u) = integral over [b, c] of |u|^2, summed over the cells whose centres lie in [b, c].
double trapped_charge(const WaveFunction& u, double b, double c);

/// Unit-norm (or `norm`-normed) Gaussian packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x).
WaveFunction gaussian_packet(GridPtr grid, double x0, double sigma, double k0, double norm = 1.0);

}  // namespace qcap
