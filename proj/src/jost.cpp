#include "qcap/jost.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "qcap/parallel.hpp"

namespace qcap {

namespace odeint = boost::numeric::odeint;

const char* to_string(Classification c) noexcept {
  return c == Classification::Generic ? "Generic" : "Exceptional";
}

namespace {

constexpr cplx I{0.0, 1.0};
using State = std::array<cplx, 2>;

struct Segment {
  double energy;
  double v;
  void operator()(const State& y, State& dy, double /*x*/) const {
    dy[0] = y[1];
    dy[1] = (v - energy) * y[0];
  }
};

Interval support_or_origin(const PotentialSpec& v0) {
  if (auto s = v0.support()) return *s;
  return {0.0, 0.0};
}

// Exact continuation through a potential-free stretch.
State free_continue(const State& y, double k, double s) {
  const double c = std::cos(k * s);
  const double sn = k == 0.0 ? s : std::sin(k * s) / k;
  return {y[0] * c + y[1] * sn, -y[0] * k * k * sn + y[1] * c};
}

struct SweepResult {
  std::vector<State> at_targets;  // same order as the targets
  State far;                      // state at the far edge of the support
  std::size_t sign_changes = 0;   // of Re f, inside the support
};

// Integrates from one edge of the support to the other. `targets` are interior
// points ordered in the direction of travel.
SweepResult sweep(const PotentialSpec& v0, double k, State y, double x_from, double x_to,
                  const std::vector<double>& targets, const JostOptions& opt, bool count_signs) {
  const double dir = x_to >= x_from ? 1.0 : -1.0;
  std::vector<double> stops;
  for (double b : v0.breakpoints()) {
    if ((b - x_from) * dir > 0.0 && (x_to - b) * dir > 0.0) stops.push_back(b);
  }
  stops.insert(stops.end(), targets.begin(), targets.end());
  stops.push_back(x_to);
  std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return a * dir < b * dir; });
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  SweepResult out;
  out.at_targets.reserve(targets.size());
  std::size_t next_target = 0;
  double prev_sign = 0.0;
  auto note_sign = [&](const State& s) {
    const double re = s[0].real();
    if (re == 0.0) return;
    const double sg = re > 0.0 ? 1.0 : -1.0;
    if (prev_sign != 0.0 && sg != prev_sign) ++out.sign_changes;
    prev_sign = sg;
  };
  if (count_signs) note_sign(y);

  const double e = k * k;
  auto stepper = odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
  double x = x_from;
  for (double xs : stops) {
    if (xs != x) {
      Segment rhs{e, v0(0.5 * (x + xs))};
      const double scale = std::sqrt(std::abs(rhs.v - e)) + 1.0;
      const double dt0 = dir * std::min(std::abs(xs - x), 0.05 / scale);
      try {
        if (count_signs) {
          odeint::integrate_adaptive(stepper, rhs, y, x, xs, dt0,
                                     [&](const State& s, double) { note_sign(s); });
        } else {
          odeint::integrate_adaptive(stepper, rhs, y, x, xs, dt0);
        }
      } catch (const std::exception& ex) {
        std::ostringstream os;
        os << "Jost integration failed at k = " << k << ": " << ex.what();
        fail(ErrorKind::StiffFailure, os.str());
      }
      if (!std::isfinite(std::abs(y[0])) || !std::isfinite(std::abs(y[1]))) {
        std::ostringstream os;
        os << "Jost integration lost finiteness at k = " << k;
        fail(ErrorKind::StiffFailure, os.str());
      }
      x = xs;
    }
    while (next_target < targets.size() && targets[next_target] == xs) {
      out.at_targets.push_back(y);
      ++next_target;
    }
  }
  out.far = y;
  return out;
}

std::vector<double> default_samples(const PotentialSpec& v0, const JostOptions& opt) {
  const Interval s = support_or_origin(v0);
  const double lo = s.left - opt.margin;
  const double hi = s.right + opt.margin;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / opt.spacing)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

// Samples of one Jost solution at sorted xs, plus its state at the far edge.
std::pair<JostSolution, State> sample_jost(const PotentialSpec& v0, double k, Side side,
                                           std::span<const double> xs, const JostOptions& opt) {
  require(std::is_sorted(xs.begin(), xs.end()), ErrorKind::InvalidArgument,
          "Jost sample points must be sorted");
  const Interval s = support_or_origin(v0);
  const bool right = side == Side::Right;
  const double x_start = right ? s.right : s.left;
  const double x_end = right ? s.left : s.right;
  const double sgn = right ? 1.0 : -1.0;
  const cplx e0 = std::exp(sgn * I * k * x_start);
  const State y0{e0, sgn * I * k * e0};

  std::vector<double> interior;
  for (double x : xs) {
    if (x > s.left && x < s.right) interior.push_back(x);
  }
  if (right) std::reverse(interior.begin(), interior.end());
  const SweepResult sw = s.left < s.right
                             ? sweep(v0, k, y0, x_start, x_end, interior, opt, false)
                             : SweepResult{{}, y0, 0};

  JostSolution sol;
  sol.k = k;
  sol.side = side;
  sol.x.assign(xs.begin(), xs.end());
  sol.f.resize(xs.size());
  sol.df.resize(xs.size());
  std::size_t interior_seen = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    State y;
    const bool near_side = right ? x >= s.right : x <= s.left;
    const bool far_side = right ? x <= s.left : x >= s.right;
    if (near_side) {
      y = free_continue(y0, k, x - x_start);
    } else if (far_side) {
      y = free_continue(sw.far, k, x - x_end);
    } else {
      const std::size_t idx = right ? interior.size() - 1 - interior_seen : interior_seen;
      y = sw.at_targets[idx];
      ++interior_seen;
    }
    sol.f[i] = y[0];
    sol.df[i] = y[1];
  }
  return {std::move(sol), sw.far};
}

}  // namespace

JostSolution solve_jost(const PotentialSpec& v0, double k, Side side, std::span<const double> xs,
                        const JostOptions& opt) {
  require(std::isfinite(k), ErrorKind::InvalidArgument, "k must be finite");
  return sample_jost(v0, k, side, xs, opt).first;
}

JostSolution solve_jost(const PotentialSpec& v0, double k, Side side, const JostOptions& opt) {
  const auto xs = default_samples(v0, opt);
  return solve_jost(v0, k, side, xs, opt);
}

namespace {
std::vector<cplx> pointwise_wronskian(const JostSolution& f, const JostSolution& g) {
  require(f.k == g.k, ErrorKind::InvalidArgument, "Wronskian needs solutions at the same k");
  require(f.x == g.x, ErrorKind::GridMismatch, "Wronskian needs solutions on the same points");
  require(!f.x.empty(), ErrorKind::InvalidArgument, "empty Jost solution");
  std::vector<cplx> w(f.x.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = f.df[i] * g.f[i] - f.f[i] * g.df[i];
  return w;
}
}  // namespace

double wronskian_variation(const JostSolution& f, const JostSolution& g) {
  const auto w = pointwise_wronskian(f, g);
  const cplx mid = w[w.size() / 2];
  double var = 0.0;
  for (cplx v : w) var = std::max(var, std::abs(v - mid));
  return var / std::max(1.0, std::abs(mid));
}

cplx wronskian(const JostSolution& f, const JostSolution& g) {
  const auto w = pointwise_wronskian(f, g);
  const double var = wronskian_variation(f, g);
  if (var > 1e-6) {
    std::ostringstream os;
    os << "Wronskian varies by " << var << " across x at k = " << f.k;
    fail(ErrorKind::IllConditioned, os.str());
  }
  return w[w.size() / 2];
}

ClassifyResult classify(const PotentialSpec& v0, const JostOptions& opt) {
  const auto xs = default_samples(v0, opt);
  const auto f1 = solve_jost(v0, 0.0, Side::Right, xs, opt);
  const auto f2 = solve_jost(v0, 0.0, Side::Left, xs, opt);
  const cplx w = wronskian(f1, f2);
  const double tol = 1e-6 * (1.0 + v0.l1_norm());
  return {std::abs(w) < tol ? Classification::Exceptional : Classification::Generic, w, tol};
}

JostPair jost_pair(const PotentialSpec& v0, double k, std::span<const double> xs,
                   const JostOptions& opt) {
  require(k > 0.0 && std::isfinite(k), ErrorKind::InvalidArgument, "jost_pair needs k > 0");
  const Interval s = support_or_origin(v0);
  auto [f1, f1_left] = sample_jost(v0, k, Side::Right, xs, opt);
  auto [f2, f2_right] = sample_jost(v0, k, Side::Left, xs, opt);

  // f1 = C e^{ikx} + D e^{-ikx} left of the support; f2 = A e^{ikx} + B e^{-ikx} right of it.
  const cplx two_ik = 2.0 * I * k;
  const cplx C = (I * k * f1_left[0] + f1_left[1]) / two_ik * std::exp(-I * k * s.left);
  const cplx D = (I * k * f1_left[0] - f1_left[1]) / two_ik * std::exp(I * k * s.left);
  const cplx A = (I * k * f2_right[0] + f2_right[1]) / two_ik * std::exp(-I * k * s.right);
  const cplx e_r = std::exp(I * k * s.right);
  const cplx w = I * k * e_r * f2_right[0] - e_r * f2_right[1];

  JostPair out;
  out.k = k;
  out.wronskian = w;
  out.t = two_ik / w;
  out.r_left = D / C;
  out.r_right = A * out.t;
  out.f1 = std::move(f1.f);
  out.f2 = std::move(f2.f);
  return out;
}

double ScatteringData::unitarity_defect() const {
  double d = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tt = std::norm(t[i]);
    d = std::max({d, std::abs(tt + std::norm(r_left[i]) - 1.0),
                  std::abs(tt + std::norm(r_right[i]) - 1.0)});
  }
  return d;
}

std::vector<double> default_k_grid(std::size_t n, double k_min, double k_max) {
  require(n >= 2 && k_min > 0.0 && k_max > k_min, ErrorKind::InvalidArgument,
          "k grid needs n >= 2 and 0 < k_min < k_max");
  std::vector<double> k(n);
  const double r = std::log(k_max / k_min);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = k_min * std::exp(r * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  k.back() = k_max;
  return k;
}

ScatteringData reflection_transmission(const PotentialSpec& v0, std::span<const double> k_grid,
                                       const JostOptions& opt) {
  for (double k : k_grid) {
    require(k > 0.0 && std::isfinite(k), ErrorKind::InvalidArgument, "k grid must be positive");
  }
  const std::size_t nb = count_bound_states(v0);
  if (nb > 0) {
    std::ostringstream os;
    os << "V0 has " << nb << " bound state(s); scattering requires none";
    fail(ErrorKind::PreconditionViolated, os.str());
  }
  const auto cls = classify(v0, opt);

  ScatteringData sd;
  sd.k.assign(k_grid.begin(), k_grid.end());
  sd.t.resize(sd.k.size());
  sd.r_left.resize(sd.k.size());
  sd.r_right.resize(sd.k.size());
  sd.classification = cls.kind;
  sd.wronskian_at_zero = cls.wronskian_at_zero;
  parallel_for(sd.k.size(), [&](std::size_t i) {
    const auto p = jost_pair(v0, sd.k[i], {}, opt);
    sd.t[i] = p.t;
    sd.r_left[i] = p.r_left;
    sd.r_right[i] = p.r_right;
  });
  return sd;
}

std::size_t count_bound_states_eigen(const PotentialSpec& v0, const BoundStateOptions& opt) {
  require(opt.spacing > 0.0 && opt.margin > 0.0, ErrorKind::InvalidArgument,
          "bound-state box needs positive spacing and margin");
  const Interval s = support_or_origin(v0);
  const double lo = s.left - opt.margin;
  const double hi = s.right + opt.margin;
  const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / opt.spacing)) - 1;
  const double h = (hi - lo) / static_cast<double>(n + 1);
  Eigen::VectorXd diag(n), sub(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = 2.0 / (h * h) + v0(lo + h * static_cast<double>(i + 1));
  sub.setConstant(-1.0 / (h * h));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::LinearSolve, "tridiagonal eigensolve failed");
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) count += es.eigenvalues()[i] < 0.0;
  return count;
}

std::size_t count_bound_states_sturm(const PotentialSpec& v0, const JostOptions& opt) {
  const auto sup = v0.support();
  if (!sup) return 0;
  const State y0{1.0, 0.0};
  const auto sw = sweep(v0, 0.0, y0, sup->left, sup->right, {}, opt, true);
  std::size_t zeros = sw.sign_changes;
  // Linear tail f(x) = f + f' (x - right) beyond the support.
  if (sw.far[0].real() * sw.far[1].real() < 0.0) ++zeros;
  return zeros;
}

std::size_t count_bound_states(const PotentialSpec& v0, const BoundStateOptions& opt) {
  if (v0.is_zero()) return 0;
  const std::size_t by_eigen = count_bound_states_eigen(v0, opt);
  const std::size_t by_sturm = count_bound_states_sturm(v0);
  if (by_eigen != by_sturm) {
    std::ostringstream os;
    os << "bound-state counts disagree: eigensolve " << by_eigen << ", zero-energy zeros "
       << by_sturm << " (refine the spacing or widen the margin)";
    fail(ErrorKind::Inconsistent, os.str());
  }
  return by_eigen;
}

void write_csv(std::ostream& os, const ScatteringData& sd) {
  const auto prec = os.precision(17);
  os << "k,re_t,im_t,re_rl,im_rl,re_rr,im_rr\n";
  for (std::size_t i = 0; i < sd.size(); ++i) {
    os << sd.k[i] << ',' << sd.t[i].real() << ',' << sd.t[i].imag() << ',' << sd.r_left[i].real()
       << ',' << sd.r_left[i].imag() << ',' << sd.r_right[i].real() << ','
       << sd.r_right[i].imag() << '\n';
  }
  os.precision(prec);
}

}  // namespace qcap
