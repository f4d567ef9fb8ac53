#include "qcap/invert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "qcap/fft.hpp"
#include "qcap/log.hpp"
#include "qcap/parallel.hpp"

namespace qcap {

namespace {

constexpr cplx I{0.0, 1.0};

void check_uniform(const ScatteringData& sd) {
  require(sd.size() >= 2, ErrorKind::BadData, "need at least two wavenumbers");
  const double dk = sd.k[1] - sd.k[0];
  require(dk > 0.0, ErrorKind::BadData, "wavenumbers must increase");
  const double tol = 1e-9 * sd.k.back();
  for (std::size_t j = 0; j < sd.size(); ++j) {
    if (std::abs(sd.k[j] - sd.k[0] - static_cast<double>(j) * dk) > tol) {
      std::ostringstream os;
      os << "k grid is not uniform at index " << j;
      fail(ErrorKind::BadData, os.str());
    }
  }
  require(sd.k[0] >= 0.0 && sd.k[0] <= dk * (1.0 + 1e-9), ErrorKind::BadData,
          "k grid must start within one spacing of zero");
}

}  // namespace

MarchenkoKernel build_kernel(const ScatteringData& sd, GridPtr x_grid, const KernelOptions& opt) {
  require(x_grid != nullptr, ErrorKind::InvalidArgument, "kernel without an x grid");
  check_uniform(sd);
  const double defect = sd.unitarity_defect();
  if (defect > opt.unitarity_tol) {
    std::ostringstream os;
    os << "reflection data not unitary: defect " << defect;
    fail(ErrorKind::BadData, os.str());
  }

  // Nodes 0, k_0, k_1, ... with r(0) extrapolated unless supplied.
  std::vector<double> kap;
  std::vector<cplx> r;
  if (sd.k[0] > 0.0) {
    const cplx slope = (sd.r_right[1] - sd.r_right[0]) / (sd.k[1] - sd.k[0]);
    kap.push_back(0.0);
    r.push_back(cplx(std::real(sd.r_right[0] - sd.k[0] * slope), 0.0));
  }
  kap.insert(kap.end(), sd.k.begin(), sd.k.end());
  r.insert(r.end(), sd.r_right.begin(), sd.r_right.end());

  const std::size_t nk = kap.size();
  const double k_max = kap.back();
  const double k_taper = (1.0 - opt.taper_fraction) * k_max;
  std::vector<cplx> wr(nk);
  for (std::size_t j = 0; j < nk; ++j) {
    const double lo = j > 0 ? kap[j - 1] : kap[j];
    const double hi = j + 1 < nk ? kap[j + 1] : kap[j];
    double w = 0.5 * (hi - lo);
    if (kap[j] > k_taper && opt.taper_fraction > 0.0)
      w *= 0.5 * (1.0 + std::cos(std::numbers::pi * (kap[j] - k_taper) / (k_max - k_taper)));
    wr[j] = w * r[j];
  }

  const auto& g = *x_grid;
  const std::size_t ns = 2 * (g.size() - 1) + 1;
  MarchenkoKernel out;
  out.x_grid = x_grid;
  out.s.resize(ns);
  out.F.resize(ns);
  std::vector<double> imag(ns);
  parallel_for(ns, [&](std::size_t j) {
    const double s = 2.0 * g.x(0) + static_cast<double>(j) * g.dx();
    cplx sum = 0.0;
    for (std::size_t m = 0; m < nk; ++m) {
      const cplx e = std::exp(I * kap[m] * s);
      sum += wr[m] * e + std::conj(wr[m]) / e;
    }
    sum /= 2.0 * std::numbers::pi;
    out.s[j] = s;
    out.F[j] = sum.real();
    imag[j] = std::abs(sum.imag());
  });
  out.max_imag = *std::max_element(imag.begin(), imag.end());
  out.k_window = opt.taper_fraction > 0.0 ? k_taper : k_max;
  out.source = sd;
  return out;
}

ReconstructionResult marchenko_solve(const MarchenkoKernel& kernel, const MarchenkoOptions& opt) {
  require(kernel.x_grid != nullptr, ErrorKind::InvalidArgument, "kernel without an x grid");
  const auto& g = *kernel.x_grid;
  const std::size_t n = g.size();
  const double h = g.dx();
  const auto& F = kernel.F;
  require(F.size() == 2 * (n - 1) + 1, ErrorKind::InvalidArgument, "kernel does not match its grid");
  for (double f : F)
    require(std::isfinite(f), ErrorKind::PreconditionViolated, "kernel is not finite");

  // Truncation: F is taken as zero past the last sample above 1e-10 of its peak.
  double peak = 0.0;
  for (double f : F) peak = std::max(peak, std::abs(f));
  std::ptrdiff_t cut = -1;
  for (std::size_t j = 0; j < F.size(); ++j)
    if (std::abs(F[j]) >= 1e-10 * peak && peak > 0.0) cut = static_cast<std::ptrdiff_t>(j);
  auto Fat = [&](std::size_t j) { return static_cast<std::ptrdiff_t>(j) <= cut ? F[j] : 0.0; };

  ReconstructionResult out;
  out.x_grid = kernel.x_grid;
  out.source = kernel.source;
  out.k_diag.assign(n, 0.0);
  std::vector<double> cond(n, 1.0);

  parallel_for(n, [&](std::size_t p) {
    const std::ptrdiff_t top = cut - static_cast<std::ptrdiff_t>(2 * p);
    if (top < 0) return;  // F(x + y) = 0 for all y >= x
    const auto m = static_cast<Eigen::Index>(top) + 1;
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i) = -Fat(2 * p + static_cast<std::size_t>(i));
      for (Eigen::Index j = 0; j < m; ++j) {
        const double w = (j == 0 || j == m - 1) ? 0.5 * h : h;
        A(i, j) = (i == j ? 1.0 : 0.0) + w * Fat(2 * p + static_cast<std::size_t>(i + j));
      }
    }
    if (m == 1) A(0, 0) = 1.0;  // zero-length integral
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    cond[p] = rc > 0.0 ? 1.0 / rc : INFINITY;
    if (!(cond[p] <= opt.condition_limit)) {
      std::ostringstream os;
      os << "Nystrom system at x = " << g.x(p) << " has condition " << cond[p];
      fail(ErrorKind::IllPosed, os.str());
    }
    const Eigen::VectorXd sol = lu.solve(b);
    out.k_diag[p] = sol(0);
  });
  out.max_condition = *std::max_element(cond.begin(), cond.end());

  out.v0_hat.assign(n, 0.0);
  const auto& K = out.k_diag;
  for (std::size_t p = 0; p < n; ++p) {
    double d;
    if (n == 1) {
      d = 0.0;
    } else if (p == 0) {
      d = (K[1] - K[0]) / h;
    } else if (p + 1 == n) {
      d = (K[n - 1] - K[n - 2]) / h;
    } else {
      d = (K[p + 1] - K[p - 1]) / (2.0 * h);
    }
    out.v0_hat[p] = -2.0 * d;
  }

  if (opt.compute_residual && out.source.size() > 0 && out.source.k[0] <= kernel.k_window) {
    const std::size_t stride = std::max<std::size_t>(1, opt.residual_stride);
    std::vector<double> ks;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < out.source.size(); j += stride) {
      if (out.source.k[j] > kernel.k_window) break;
      ks.push_back(out.source.k[j]);
      idx.push_back(j);
    }
    try {
      const ScatteringData again = reflection_transmission(out.potential(), ks);
      double res = 0.0;
      for (std::size_t j = 0; j < ks.size(); ++j)
        res = std::max(res, std::abs(again.r_right[j] - out.source.r_right[idx[j]]));
      out.residual = res;
    } catch (const Error& e) {
      // e.g. a near-zero reconstruction with a shallow bound state; residual stays -1
      if (e.kind() != ErrorKind::PreconditionViolated && e.kind() != ErrorKind::Inconsistent) throw;
      log::warn(std::string("residual not computed: ") + e.what());
    }
  }
  log::info("marchenko: n = " + std::to_string(n) + ", max condition " +
             std::to_string(out.max_condition));
  return out;
}

ScatteringData uniform_scattering_data(const PotentialSpec& v0, double dk, double k_max,
                                       const JostOptions& opt) {
  require(dk > 0.0 && k_max >= dk, ErrorKind::InvalidArgument, "need 0 < dk <= k_max");
  const auto count = static_cast<std::size_t>(std::floor(k_max / dk + 1e-9));
  std::vector<double> ks(count);
  for (std::size_t j = 0; j < count; ++j) ks[j] = static_cast<double>(j + 1) * dk;
  return reflection_transmission(v0, ks, opt);
}

// ---------------------------------------------------------------------------

namespace {

// Free momentum amplitudes sum_j f_j e^{-i k_m x_j}.
std::vector<cplx> amplitudes(const WaveFunction& f) {
  const auto& g = *f.grid;
  const std::size_t n = g.size();
  std::vector<cplx> c = f.values;
  Fft(n).forward(c);
  for (std::size_t m = 0; m < n; ++m) c[m] *= std::exp(-I * g.k(m) * g.x_min());
  return c;
}

}  // namespace

SFromProbes scattering_data_from_S(const ScatteringMap& S, GridPtr grid,
                                   const ReconstructConfig& cfg) {
  require(grid != nullptr, ErrorKind::InvalidArgument, "probes without a grid");
  require(cfg.probe_k0.size() >= 2, ErrorKind::InvalidArgument, "need at least two probes");
  const auto& g = *grid;
  const std::size_t n = g.size();
  const std::size_t np = cfg.probe_k0.size();

  std::vector<std::vector<cplx>> in(np), out(np);
  SFromProbes res;
  res.rel_error.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double k0 = cfg.probe_k0[p];
    const double x0 = k0 >= 0.0 ? -cfg.probe_offset : cfg.probe_offset;
    const WaveFunction phi = gaussian_packet(grid, x0, cfg.probe_sigma, k0);
    const DerivativeEstimate d = small_amplitude_derivative(phi, S, cfg.scatter);
    res.rel_error[p] = d.error_estimate / l2_norm(phi);
    in[p] = amplitudes(phi);
    out[p] = amplitudes(d.value);
    log::info("probe k0 = " + std::to_string(k0) + ": derivative error " +
              std::to_string(res.rel_error[p]));
  }

  ScatteringData& sd = res.data;
  const auto eq = static_cast<Eigen::Index>(2 * np);
  for (std::size_t m = 1; m < n / 2 && g.k(m) <= cfg.k_max * (1.0 + 1e-12); ++m) {
    const std::size_t mm = n - m;
    // Unknowns (t, r_right, r_left):
    //   out(k)  = t in(k) + r_right in(-k)
    //   out(-k) = r_left in(k) + t in(-k)
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(eq, 3);
    Eigen::VectorXcd b(eq);
    for (std::size_t p = 0; p < np; ++p) {
      const auto r0 = static_cast<Eigen::Index>(2 * p);
      A(r0, 0) = in[p][m];
      A(r0, 1) = in[p][mm];
      b(r0) = out[p][m];
      A(r0 + 1, 2) = in[p][m];
      A(r0 + 1, 0) = in[p][mm];
      b(r0 + 1) = out[p][mm];
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(2) > cfg.min_singular * sv(0))) {
      std::ostringstream os;
      os << "probe basis does not resolve k = " << g.k(m);
      fail(ErrorKind::BadData, os.str());
    }
    const Eigen::VectorXcd x = svd.solve(b);
    sd.k.push_back(g.k(m));
    sd.t.push_back(x(0));
    sd.r_right.push_back(x(1));
    sd.r_left.push_back(x(2));
  }
  // Not determined from the probes; reported as generic.
  sd.classification = Classification::Generic;
  return res;
}

ReconstructionResult reconstruct_from_S(const ScatteringMap& S, GridPtr grid, GridPtr x_grid,
                                        const ReconstructConfig& cfg) {
  const SFromProbes data = scattering_data_from_S(S, std::move(grid), cfg);
  log::info("reflection data from probes: " + std::to_string(data.data.size()) +
            " wavenumbers, unitarity defect " + std::to_string(data.data.unitarity_defect()));
  const MarchenkoKernel kernel = build_kernel(data.data, std::move(x_grid), cfg.kernel);
  return marchenko_solve(kernel, cfg.marchenko);
}

// ---------------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CapacitorFit fit_capacitor_params(const SpatialGrid& grid, const std::vector<double>& v) {
  require(v.size() == grid.size(), ErrorKind::GridMismatch, "samples do not match the grid");
  const std::size_t n = v.size();
  const double vmax = *std::max_element(v.begin(), v.end());
  require(vmax > 0.0, ErrorKind::ShapeMismatch, "no positive plateau");
  const double thr = 0.25 * vmax;

  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last]
  for (std::size_t i = 0; i < n;) {
    if (v[i] > thr) {
      std::size_t j = i;
      while (j + 1 < n && v[j + 1] > thr) ++j;
      runs.emplace_back(i, j);
      i = j + 1;
    } else {
      ++i;
    }
  }
  if (runs.size() != 2) {
    std::ostringstream os;
    os << "expected two plateaus, found " << runs.size();
    fail(ErrorKind::ShapeMismatch, os.str());
  }

  const double dx = grid.dx();
  struct Plateau {
    double height, spread, left, right, left_err, right_err;
  };
  auto analyse = [&](std::size_t first, std::size_t last) {
    require(first > 0 && last + 1 < n, ErrorKind::ShapeMismatch, "plateau touches the grid edge");
    const std::size_t len = last - first + 1;
    const std::size_t lo = first + len / 4, hi = last - len / 4;
    std::vector<double> core(v.begin() + static_cast<std::ptrdiff_t>(lo),
                             v.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    Plateau pl{};
    pl.height = median(core);
    double var = 0.0;
    for (double c : core) var += (c - pl.height) * (c - pl.height);
    pl.spread = std::sqrt(var / static_cast<double>(core.size()));
    const double level = 0.5 * pl.height;
    const std::size_t mid = (lo + hi) / 2;

    auto crossing = [&](std::size_t below, std::size_t above) {
      const double slope = (v[above] - v[below]) / (grid.x(above) - grid.x(below));
      const double x = grid.x(below) + (level - v[below]) / slope;
      const double err = std::hypot(0.5 * dx, pl.spread / std::abs(slope));
      return std::pair{x, err};
    };
    std::size_t i = mid;
    while (i > 0 && v[i] >= level) --i;
    std::tie(pl.left, pl.left_err) = crossing(i, i + 1);
    i = mid;
    while (i + 1 < n && v[i] >= level) ++i;
    std::tie(pl.right, pl.right_err) = crossing(i, i - 1);
    return pl;
  };
  const Plateau p1 = analyse(runs[0].first, runs[0].second);
  const Plateau p2 = analyse(runs[1].first, runs[1].second);

  CapacitorFit fit;
  fit.value = {p1.height, p2.height, p1.left, p1.right, p2.left, p2.right};
  fit.uncertainty = {p1.spread, p2.spread, p1.left_err, p1.right_err, p2.left_err, p2.right_err};
  return fit;
}

CapacitorFit fit_capacitor_params(const ReconstructionResult& r) {
  require(r.x_grid != nullptr, ErrorKind::InvalidArgument, "reconstruction without a grid");
  return fit_capacitor_params(*r.x_grid, r.v0_hat);
}

}  // namespace qcap
