#include "qcap/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qcap/log.hpp"

namespace qcap {

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t n)
    : x_min_(x_min), x_max_(x_max), n_(n), dx_(0.0) {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
          ErrorKind::InvalidArgument, "grid needs finite x_min < x_max");
  require(n >= 16 && (n & (n - 1)) == 0, ErrorKind::InvalidArgument,
          "grid size must be a power of two >= 16");
  dx_ = (x_max - x_min) / static_cast<double>(n);
  x_.resize(n);
  k_.resize(n);
  const double dk = 2.0 * std::numbers::pi / (x_max - x_min);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    x_[j] = x_min + static_cast<double>(j) * dx_;
    auto m = static_cast<std::ptrdiff_t>(j);
    if (m >= half) m -= static_cast<std::ptrdiff_t>(n);
    k_[j] = dk * static_cast<double>(m);
  }
}

GridPtr make_grid(double x_min, double x_max, std::size_t n) {
  return std::make_shared<const SpatialGrid>(x_min, x_max, n);
}

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  if (!a.same_as(b)) {
    std::ostringstream os;
    os << "fields live on different grids ([" << a.x_min() << ", " << a.x_max() << "] n=" << a.size()
       << " vs [" << b.x_min() << ", " << b.x_max() << "] n=" << b.size() << ")";
    fail(ErrorKind::GridMismatch, os.str());
  }
}

bool all_finite(std::span<const cplx> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

WaveFunction::WaveFunction(GridPtr g, std::vector<cplx> v, double time)
    : grid(std::move(g)), values(std::move(v)), t(time) {
  require(grid != nullptr, ErrorKind::InvalidArgument, "wavefunction without a grid");
  require(values.size() == grid->size(), ErrorKind::InvalidArgument,
          "wavefunction length does not match its grid");
  require(all_finite(values), ErrorKind::InvalidArgument, "wavefunction has non-finite samples");
}

WaveFunction WaveFunction::zeros(GridPtr g, double time) {
  const std::size_t n = g->size();
  return WaveFunction(std::move(g), std::vector<cplx>(n), time);
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& o) {
  require_same_grid(*grid, *o.grid);
  for (std::size_t j = 0; j < values.size(); ++j) values[j] += o.values[j];
  return *this;
}

WaveFunction& WaveFunction::operator-=(const WaveFunction& o) {
  require_same_grid(*grid, *o.grid);
  for (std::size_t j = 0; j < values.size(); ++j) values[j] -= o.values[j];
  return *this;
}

WaveFunction& WaveFunction::operator*=(cplx s) {
  for (auto& v : values) v *= s;
  return *this;
}

// ---------------------------------------------------------------------------

namespace {

void validate(const PiecewiseConstant& p) {
  require(p.intervals.size() == p.heights.size(), ErrorKind::InvalidArgument,
          "piecewise potential needs one height per interval");
  std::vector<Interval> sorted = p.intervals;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    require(std::isfinite(sorted[i].left) && std::isfinite(sorted[i].right) &&
                sorted[i].left < sorted[i].right && std::isfinite(p.heights[i]),
            ErrorKind::InvalidArgument, "piecewise potential interval must satisfy left < right");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.left < b.left; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    require(sorted[i].left >= sorted[i - 1].right, ErrorKind::InvalidArgument,
            "piecewise potential intervals overlap");
  }
}

void validate(const SampledPotential& s) {
  require(s.grid != nullptr, ErrorKind::InvalidArgument, "sampled potential without a grid");
  require(s.values.size() == s.grid->size(), ErrorKind::InvalidArgument,
          "sampled potential length does not match its grid");
  require(std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isfinite(v); }),
          ErrorKind::InvalidArgument, "sampled potential has non-finite values");
}

void validate(const DoubleBarrier& d) {
  require(d.a < d.b && d.b < d.c && d.c < d.d, ErrorKind::InvalidArgument,
          "double barrier requires a < b < c < d");
  require(std::isfinite(d.beta1) && std::isfinite(d.beta2) && std::isfinite(d.a) &&
              std::isfinite(d.d),
          ErrorKind::InvalidArgument, "double barrier parameters must be finite");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

PotentialSpec::PotentialSpec(PiecewiseConstant p) : v_(std::move(p)) {
  validate(std::get<PiecewiseConstant>(v_));
}
PotentialSpec::PotentialSpec(SampledPotential s) : v_(std::move(s)) {
  validate(std::get<SampledPotential>(v_));
}
PotentialSpec::PotentialSpec(DoubleBarrier d) : v_(d) { validate(d); }

PotentialSpec PotentialSpec::indicator(double left, double right, double height) {
  return PotentialSpec(PiecewiseConstant{{Interval{left, right}}, {height}});
}

PotentialSpec PotentialSpec::double_barrier(double beta1, double beta2, double a, double b,
                                            double c, double d) {
  return PotentialSpec(DoubleBarrier{beta1, beta2, a, b, c, d});
}

double PotentialSpec::operator()(double x) const {
  return std::visit(
      overloaded{
          [x](const PiecewiseConstant& p) {
            for (std::size_t i = 0; i < p.intervals.size(); ++i) {
              if (x >= p.intervals[i].left && x < p.intervals[i].right) return p.heights[i];
            }
            return 0.0;
          },
          [x](const SampledPotential& s) {
            const auto& g = *s.grid;
            const double pos = std::floor((x - g.x_min()) / g.dx() + 0.5);
            if (pos < 0.0 || pos >= static_cast<double>(g.size())) return 0.0;
            return s.values[static_cast<std::size_t>(pos)];
          },
          [x](const DoubleBarrier& d) {
            if (x >= d.a && x < d.b) return d.beta1;
            if (x >= d.c && x < d.d) return d.beta2;
            return 0.0;
          },
      },
      v_);
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> pts = std::visit(
      overloaded{
          [](const PiecewiseConstant& p) {
            std::vector<double> out;
            for (std::size_t i = 0; i < p.intervals.size(); ++i) {
              if (p.heights[i] == 0.0) continue;
              out.push_back(p.intervals[i].left);
              out.push_back(p.intervals[i].right);
            }
            return out;
          },
          [](const SampledPotential& s) {
            std::vector<double> out;
            const auto& g = *s.grid;
            double prev = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) {
              if (s.values[j] != prev) out.push_back(g.x(j) - 0.5 * g.dx());
              prev = s.values[j];
            }
            if (prev != 0.0) out.push_back(g.x(g.size() - 1) + 0.5 * g.dx());
            return out;
          },
          [](const DoubleBarrier& d) {
            std::vector<double> out;
            if (d.beta1 != 0.0) {
              out.push_back(d.a);
              out.push_back(d.b);
            }
            if (d.beta2 != 0.0) {
              out.push_back(d.c);
              out.push_back(d.d);
            }
            return out;
          },
      },
      v_);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::optional<Interval> PotentialSpec::support() const {
  const auto pts = breakpoints();
  if (pts.empty()) return std::nullopt;
  return Interval{pts.front(), pts.back()};
}

double PotentialSpec::l1_norm() const {
  return std::visit(
      overloaded{
          [](const PiecewiseConstant& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < p.intervals.size(); ++i) {
              s += std::abs(p.heights[i]) * (p.intervals[i].right - p.intervals[i].left);
            }
            return s;
          },
          [](const SampledPotential& s) {
            double acc = 0.0;
            for (double v : s.values) acc += std::abs(v);
            return acc * s.grid->dx();
          },
          [](const DoubleBarrier& d) {
            return std::abs(d.beta1) * (d.b - d.a) + std::abs(d.beta2) * (d.d - d.c);
          },
      },
      v_);
}

double PotentialSpec::sup_norm() const {
  return std::visit(
      overloaded{
          [](const PiecewiseConstant& p) {
            double s = 0.0;
            for (double h : p.heights) s = std::max(s, std::abs(h));
            return s;
          },
          [](const SampledPotential& s) {
            double m = 0.0;
            for (double v : s.values) m = std::max(m, std::abs(v));
            return m;
          },
          [](const DoubleBarrier& d) { return std::max(std::abs(d.beta1), std::abs(d.beta2)); },
      },
      v_);
}

PotentialSpec PotentialSpec::scaled(double factor) const {
  return std::visit(
      overloaded{
          [factor](PiecewiseConstant p) {
            for (auto& h : p.heights) h *= factor;
            return PotentialSpec(std::move(p));
          },
          [factor](SampledPotential s) {
            for (auto& v : s.values) v *= factor;
            return PotentialSpec(std::move(s));
          },
          [factor](DoubleBarrier d) {
            d.beta1 *= factor;
            d.beta2 *= factor;
            return PotentialSpec(d);
          },
      },
      v_);
}

std::vector<double> evaluate_potential(const PotentialSpec& spec, const SpatialGrid& grid) {
  if (auto sup = spec.support()) {
    const double lo = grid.x_min() - 0.5 * grid.dx();
    const double hi = grid.x_max() - 0.5 * grid.dx();
    if (sup->left < lo || sup->right > hi) {
      std::ostringstream os;
      os << "potential support [" << sup->left << ", " << sup->right
         << ") is clipped by the grid [" << grid.x_min() << ", " << grid.x_max() << ")";
      log::warn(os.str());
    }
  }
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = spec(grid.x(j));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Representative points: one inside every constant piece of either spec.
std::vector<double> probe_points(const PotentialSpec& a, const PotentialSpec& b) {
  std::vector<double> pts = a.breakpoints();
  const auto pb = b.breakpoints();
  pts.insert(pts.end(), pb.begin(), pb.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> mids;
  for (std::size_t i = 1; i < pts.size(); ++i) mids.push_back(0.5 * (pts[i - 1] + pts[i]));
  return mids;
}

}  // namespace

NonlocalCoupling::NonlocalCoupling(cplx lambda, PotentialSpec v1_re, PotentialSpec v1_im,
                                   PotentialSpec v2_re, PotentialSpec v2_im)
    : lambda_(lambda),
      v1_re_(std::move(v1_re)),
      v1_im_(std::move(v1_im)),
      v2_re_(std::move(v2_re)),
      v2_im_(std::move(v2_im)) {
  require(std::isfinite(lambda.real()) && std::isfinite(lambda.imag()),
          ErrorKind::InvalidArgument, "coupling constant must be finite");
  constexpr double tol = 1e-12;
  v1_real_ = v1_im_.sup_norm() <= tol;
  v2_real_ = v2_im_.sup_norm() <= tol;
  v1_multiple_of_v2_ = false;
  if (v1_real_ && v2_real_) {
    const auto pts = probe_points(v1_re_, v2_re_);
    std::optional<double> mu;
    for (double x : pts) {
      if (std::abs(v2_re_(x)) > tol) {
        mu = v1_re_(x) / v2_re_(x);
        break;
      }
    }
    if (!mu) mu = v1_re_.sup_norm() <= tol ? std::optional<double>(0.0) : std::nullopt;
    if (mu) {
      v1_multiple_of_v2_ = std::all_of(pts.begin(), pts.end(), [&](double x) {
        return std::abs(v1_re_(x) - *mu * v2_re_(x)) <= tol * (1.0 + std::abs(v1_re_(x)));
      });
    }
  }
}

NonlocalCoupling::NonlocalCoupling(cplx lambda, PotentialSpec v1, PotentialSpec v2)
    : NonlocalCoupling(lambda, std::move(v1), PotentialSpec(), std::move(v2), PotentialSpec()) {}

NonlocalCoupling NonlocalCoupling::capacitor(cplx lambda, double b, double c) {
  return {lambda, PotentialSpec::indicator(b, c), PotentialSpec::indicator(b, c)};
}

NonlocalCoupling NonlocalCoupling::with_lambda(cplx lambda) const {
  return {lambda, v1_re_, v1_im_, v2_re_, v2_im_};
}

// ---------------------------------------------------------------------------

cplx inner_product(const WaveFunction& f, const WaveFunction& g) {
  require_same_grid(*f.grid, *g.grid);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) acc += std::conj(g.values[j]) * f.values[j];
  return acc * f.grid->dx();
}

double l2_norm(std::span<const cplx> values, double dx) {
  double acc = 0.0;
  for (const auto& v : values) acc += std::norm(v);
  return std::sqrt(acc * dx);
}

double l2_norm(const WaveFunction& f) { return l2_norm(f.values, f.grid->dx()); }

double trapped_charge(const WaveFunction& u, double b, double c) {
  const auto& g = *u.grid;
  require(b < c, ErrorKind::InvalidArgument, "trapped charge needs b < c");
  require(b >= g.x_min() && c <= g.x_max(), ErrorKind::InvalidArgument,
          "trapped-charge interval lies outside the grid");
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    if (x >= b && x <= c) acc += std::norm(u.values[j]);
  }
  return acc * g.dx();
}

WaveFunction gaussian_packet(GridPtr grid, double x0, double sigma, double k0, double norm) {
  require(sigma > 0.0, ErrorKind::InvalidArgument, "packet width must be positive");
  std::vector<cplx> v(grid->size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double x = grid->x(j) - x0;
    v[j] = std::exp(cplx(-x * x / (4.0 * sigma * sigma), k0 * grid->x(j)));
  }
  WaveFunction psi(std::move(grid), std::move(v));
  psi *= norm / l2_norm(psi);
  return psi;
}

}  // namespace qcap
