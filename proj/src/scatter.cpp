#include "qcap/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "qcap/log.hpp"
#include "qcap/parallel.hpp"

namespace qcap {

namespace {

constexpr cplx I{0.0, 1.0};

Interval support_or_origin(const PotentialSpec& v) {
  if (auto s = v.support()) return *s;
  return {0.0, 0.0};
}

}  // namespace

// ---------------------------------------------------------------------------
// Distorted Fourier transform

DistortedTransform::DistortedTransform(GridPtr grid, PotentialSpec v0, const JostOptions& opt)
    : grid_(std::move(grid)), v0_(std::move(v0)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "transform without a grid");
  const auto& g = *grid_;
  const std::size_t n = g.size();
  const Interval s = support_or_origin(v0_);
  require(s.left > g.x_min() && s.right < g.x_max(), ErrorKind::InvalidArgument,
          "support of V0 must lie strictly inside the grid");

  std::vector<double> xs_int;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x(i);
    if (x <= s.left) {
      left_.push_back(i);
    } else if (x >= s.right) {
      right_.push_back(i);
    } else {
      interior_.push_back(i);
      xs_int.push_back(x);
    }
  }
  mirror_.resize(n);
  phase_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    mirror_[m] = (n - m) % n;
    phase_[m] = std::exp(-I * g.k(m) * g.x_min());
  }

  const std::size_t ni = interior_.size();
  for (Family* fam : {&incoming_, &outgoing_}) {
    fam->alpha_left.assign(n, 1.0);
    fam->alpha_right.assign(n, 1.0);
    fam->beta_left.assign(n, 0.0);
    fam->beta_right.assign(n, 0.0);
    fam->interior.resize(ni * n);
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t m = 0; m < n; ++m) fam->interior[i * n + m] = std::exp(I * g.k(m) * xs_int[i]);
    }
  }

  const std::size_t half = n / 2;
  const auto cls = classify(v0_, opt);
  if (cls.kind == Classification::Generic) {
    // t(0) = 0: the zero-energy scattering states vanish.
    for (Family* fam : {&incoming_, &outgoing_}) {
      fam->alpha_left[0] = fam->alpha_right[0] = 0.0;
      for (std::size_t i = 0; i < ni; ++i) fam->interior[i * n] = 0.0;
    }
  }
  data_.k.resize(half - 1);
  data_.t.resize(half - 1);
  data_.r_left.resize(half - 1);
  data_.r_right.resize(half - 1);
  data_.classification = cls.kind;
  data_.wronskian_at_zero = cls.wronskian_at_zero;

  parallel_for(half - 1, [&](std::size_t idx) {
    const std::size_t m = idx + 1;
    const std::size_t mm = mirror_[m];
    const double k = g.k(m);
    const JostPair p = jost_pair(v0_, k, xs_int, opt);
    data_.k[idx] = k;
    data_.t[idx] = p.t;
    data_.r_left[idx] = p.r_left;
    data_.r_right[idx] = p.r_right;
    const cplx t = p.t, rl = p.r_left, rr = p.r_right;

    // psi+(., k), k > 0: t f1
    incoming_.alpha_right[m] = t;
    incoming_.beta_right[m] = 0.0;
    incoming_.alpha_left[m] = 1.0;
    incoming_.beta_left[m] = rl;
    // psi+(., -k): t f2
    incoming_.alpha_right[mm] = 1.0;
    incoming_.beta_right[mm] = rr;
    incoming_.alpha_left[mm] = t;
    incoming_.beta_left[mm] = 0.0;
    // psi-(., k) = conj psi+(., -k)
    outgoing_.alpha_right[m] = 1.0;
    outgoing_.beta_right[m] = std::conj(rr);
    outgoing_.alpha_left[m] = std::conj(t);
    outgoing_.beta_left[m] = 0.0;
    // psi-(., -k) = conj psi+(., k)
    outgoing_.alpha_right[mm] = std::conj(t);
    outgoing_.beta_right[mm] = 0.0;
    outgoing_.alpha_left[mm] = 1.0;
    outgoing_.beta_left[mm] = std::conj(rl);

    for (std::size_t i = 0; i < ni; ++i) {
      const cplx tf1 = t * p.f1[i];
      const cplx tf2 = t * p.f2[i];
      incoming_.interior[i * n + m] = tf1;
      incoming_.interior[i * n + mm] = tf2;
      outgoing_.interior[i * n + m] = std::conj(tf2);
      outgoing_.interior[i * n + mm] = std::conj(tf1);
    }
  });
}

WaveFunction DistortedTransform::apply(const Family& fam, const WaveFunction& phi) const {
  require_same_grid(*phi.grid, *grid_);
  const std::size_t n = grid_->size();
  const Fft fft(n);
  std::vector<cplx> c = phi.values;
  fft.forward(c);
  for (std::size_t m = 0; m < n; ++m) c[m] *= phase_[m];

  std::vector<cplx> out(n, 0.0);
  std::vector<cplx> a(n);
  auto side = [&](const std::vector<std::size_t>& idx, const std::vector<cplx>& alpha,
                  const std::vector<cplx>& beta) {
    if (idx.empty()) return;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t mm = mirror_[m];
      a[m] = (c[m] * alpha[m] + c[mm] * beta[mm]) * std::conj(phase_[m]);
    }
    fft.backward(a);
    for (std::size_t i : idx) out[i] = a[i];
  };
  side(left_, fam.alpha_left, fam.beta_left);
  side(right_, fam.alpha_right, fam.beta_right);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    const cplx* row = fam.interior.data() + i * n;
    cplx acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) acc += c[m] * row[m];
    out[interior_[i]] = acc * inv_n;
  }
  return WaveFunction(phi.grid, std::move(out), phi.t);
}

WaveFunction DistortedTransform::adjoint(const Family& fam, const WaveFunction& g) const {
  require_same_grid(*g.grid, *grid_);
  const std::size_t n = grid_->size();
  const Fft fft(n);
  std::vector<cplx> d(n, 0.0);
  std::vector<cplx> G(n);
  auto side = [&](const std::vector<std::size_t>& idx, const std::vector<cplx>& alpha,
                  const std::vector<cplx>& beta) {
    if (idx.empty()) return;
    std::fill(G.begin(), G.end(), cplx(0.0));
    for (std::size_t i : idx) G[i] = g.values[i];
    fft.forward(G);
    for (std::size_t m = 0; m < n; ++m) G[m] *= phase_[m];
    for (std::size_t m = 0; m < n; ++m) {
      d[m] += std::conj(alpha[m]) * G[m] + std::conj(beta[m]) * G[mirror_[m]];
    }
  };
  side(left_, fam.alpha_left, fam.beta_left);
  side(right_, fam.alpha_right, fam.beta_right);

  for (std::size_t i = 0; i < interior_.size(); ++i) {
    const cplx* row = fam.interior.data() + i * n;
    const cplx gi = g.values[interior_[i]];
    for (std::size_t m = 0; m < n; ++m) d[m] += std::conj(row[m]) * gi;
  }
  for (std::size_t m = 0; m < n; ++m) d[m] *= std::conj(phase_[m]);
  fft.backward(d);
  return WaveFunction(g.grid, std::move(d), g.t);
}

WaveFunction DistortedTransform::zero_mode(const WaveFunction& phi) const {
  require_same_grid(*phi.grid, *grid_);
  cplx mean = 0.0;
  if (incoming_.alpha_left[0] == 0.0) {
    for (const cplx& v : phi.values) mean += v;
    mean /= static_cast<double>(phi.values.size());
  }
  return WaveFunction(phi.grid, std::vector<cplx>(phi.values.size(), mean), phi.t);
}

WaveFunction DistortedTransform::inverse(const Family& fam, const WaveFunction& g) const {
  // CGLS on min ||W x - g||, started from x = W* g.
  WaveFunction x = adjoint(fam, g);
  const double gn = l2_norm(g);
  if (gn == 0.0) return x;
  WaveFunction r = g - apply(fam, x);
  WaveFunction s = adjoint(fam, r);
  WaveFunction p = s;
  double gamma = std::pow(l2_norm(s), 2);
  for (int it = 0; it < 50 && std::sqrt(gamma) > 1e-14 * gn; ++it) {
    const WaveFunction q = apply(fam, p);
    const double qq = std::pow(l2_norm(q), 2);
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    x = x + alpha * p;
    r = r - alpha * q;
    s = adjoint(fam, r);
    const double gamma_new = std::pow(l2_norm(s), 2);
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  return x;
}

TransformPtr build_wave_operators(const PotentialSpec& v0, GridPtr grid, const JostOptions& opt) {
  const std::size_t nb = count_bound_states(v0);
  if (nb > 0) {
    std::ostringstream os;
    os << "V0 has " << nb << " bound state(s); wave operators are not unitary";
    fail(ErrorKind::PreconditionViolated, os.str());
  }
  return std::make_shared<const DistortedTransform>(std::move(grid), v0, opt);
}

LinearScatteringOperator::LinearScatteringOperator(TransformPtr transform)
    : transform_(std::move(transform)) {
  require(transform_ != nullptr, ErrorKind::InvalidArgument, "null transform");
}

WaveFunction LinearScatteringOperator::apply(const WaveFunction& phi, Path path) const {
  if (path == Path::Composition) {
    return transform_->w_plus_inverse(transform_->w_minus(phi)) + transform_->zero_mode(phi);
  }
  const auto& g = *transform_->grid();
  require_same_grid(*phi.grid, g);
  const std::size_t n = g.size();
  const Fft fft(n);
  std::vector<cplx> c = phi.values;
  fft.forward(c);
  std::vector<cplx> ph(n);
  for (std::size_t m = 0; m < n; ++m) {
    ph[m] = std::exp(-I * g.k(m) * g.x_min());
    c[m] *= ph[m];
  }
  std::vector<cplx> out = c;
  const auto& sd = transform_->data();
  for (std::size_t m = 1; m < n / 2; ++m) {
    const std::size_t mm = n - m;
    const cplx t = sd.t[m - 1], rl = sd.r_left[m - 1], rr = sd.r_right[m - 1];
    out[m] = t * c[m] + rr * c[mm];
    out[mm] = rl * c[m] + t * c[mm];
  }
  for (std::size_t m = 0; m < n; ++m) out[m] *= std::conj(ph[m]);
  fft.backward(out);
  return WaveFunction(phi.grid, std::move(out), phi.t);
}

LinearScatteringOperator linear_scattering_operator(const PotentialSpec& v0, GridPtr grid,
                                                    const JostOptions& opt) {
  return LinearScatteringOperator(build_wave_operators(v0, std::move(grid), opt));
}

// ---------------------------------------------------------------------------
// Nonlinear scattering

double asymptotic_time(const WaveFunction& phi, const Model& model, const ScatterConfig& cfg) {
  if (cfg.T > 0.0) return cfg.T;
  const auto& g = *phi.grid;
  const std::size_t n = g.size();
  std::vector<cplx> c = phi.values;
  Fft(n).forward(c);
  double w = 0.0, k1 = 0.0, k2 = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double p = std::norm(c[m]);
    const double k = std::abs(g.k(m));
    w += p;
    k1 += p * k;
    k2 += p * k * k;
  }
  require(w > 0.0, ErrorKind::InvalidArgument, "zero state has no asymptotic time");
  const double kbar = k1 / w;
  const double sk = std::sqrt(std::max(0.0, k2 / w - kbar * kbar));
  const double v_min = 2.0 * std::max(kbar - 2.0 * sk, 0.5);

  double x1 = 0.0, x2 = 0.0, q = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::norm(phi.values[j]);
    q += p;
    x1 += p * g.x(j);
    x2 += p * g.x(j) * g.x(j);
  }
  const double xbar = x1 / q;
  const double sx = std::sqrt(std::max(0.0, x2 / q - xbar * xbar));
  double r = std::abs(xbar) + 3.0 * sx;
  for (const PotentialSpec* v : {&model.v0_spec(), &model.coupling().v2_re()}) {
    if (auto s = v->support()) r = std::max({r, std::abs(s->left), std::abs(s->right)});
  }
  return std::clamp(cfg.T_factor * r / v_min, cfg.T_min, cfg.T_max);
}

namespace {

std::vector<cplx> scatter_once(const WaveFunction& phi, const Model& model, const Model& linear,
                               double T, const ScatterConfig& cfg) {
  const std::size_t sub = split_substeps(*phi.grid, cfg.dt, cfg.max_kinetic_phase);
  const auto n = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-9)) * sub;
  const double h = T / static_cast<double>(n);
  const SplitStepper back(linear, -h);
  const SplitStepper fwd(model, h);
  std::vector<cplx> u = phi.values;
  for (std::size_t i = 0; i < n; ++i) back.step_linear(u);
  const double norm0 = std::max(l2_norm(u, phi.grid->dx()), 1e-300);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    fwd.step(u);
    if (i % 256 == 255) {
      const double nr = l2_norm(u, phi.grid->dx());
      if (!std::isfinite(nr) || nr > 1e6 * norm0) {
        throw BlowUpError(-T + h * static_cast<double>(i - 255),
                          "solution blew up during the scattering run");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) back.step_linear(u);
  if (!all_finite(u)) throw BlowUpError(T, "scattering run produced a non-finite state");
  return u;
}

}  // namespace

AsymptoticPair nonlinear_scattering(const WaveFunction& phi_minus, const Model& model,
                                    const ScatterConfig& cfg) {
  require_same_grid(*phi_minus.grid, *model.grid());
  require(cfg.dt > 0.0 && cfg.matching_tol > 0.0, ErrorKind::InvalidArgument,
          "scattering needs dt > 0 and a positive matching tolerance");
  const Model linear = model.linear();
  double T = asymptotic_time(phi_minus, model, cfg);
  const double scale = std::max(l2_norm(phi_minus), 1e-300);

  AsymptoticPair pair{phi_minus, phi_minus, false, 0.0, T};
  std::vector<cplx> prev = scatter_once(phi_minus, model, linear, T, cfg);
  for (std::size_t r = 0; r <= cfg.max_refinements; ++r) {
    const double T2 = 1.25 * T;
    std::vector<cplx> next = scatter_once(phi_minus, model, linear, T2, cfg);
    double d2 = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) d2 += std::norm(next[j] - prev[j]);
    pair.matching_error = std::sqrt(d2 * phi_minus.grid->dx());
    pair.T = T2;
    pair.phi_plus = WaveFunction(phi_minus.grid, std::move(next), phi_minus.t);
    if (pair.matching_error <= cfg.matching_tol * scale) {
      pair.converged = true;
      return pair;
    }
    prev = pair.phi_plus.values;
    T = T2;
  }
  std::ostringstream os;
  os << "phi+ did not settle under T -> 1.25 T (last change " << pair.matching_error / scale
     << " relative at T = " << pair.T << ")";
  fail(ErrorKind::NotAsymptotic, os.str());
}

AsymptoticPair nonlinear_scattering(const WaveFunction& phi_minus, const PotentialSpec& v0,
                                    const NonlocalCoupling& c, const ScatterConfig& cfg) {
  return nonlinear_scattering(phi_minus, Model(phi_minus.grid, v0, c), cfg);
}

FullScattering::FullScattering(Model model, TransformPtr transform, ScatterConfig cfg)
    : model_(std::move(model)), transform_(std::move(transform)), cfg_(std::move(cfg)) {
  require(transform_ != nullptr, ErrorKind::InvalidArgument, "null transform");
  require_same_grid(*model_.grid(), *transform_->grid());
}

WaveFunction FullScattering::apply(const WaveFunction& phi_minus, AsymptoticPair* out) const {
  const WaveFunction distorted = transform_->w_minus(phi_minus);
  AsymptoticPair pair = nonlinear_scattering(distorted, model_, cfg_);
  WaveFunction result = transform_->w_plus_inverse(pair.phi_plus) + transform_->zero_mode(phi_minus);
  if (out) *out = std::move(pair);
  return result;
}

WaveFunction FullScattering::operator()(const WaveFunction& phi_minus) const {
  return apply(phi_minus, nullptr);
}

ScatteringMap FullScattering::as_map() const {
  auto self = std::make_shared<const FullScattering>(*this);
  return [self](const WaveFunction& phi) { return (*self)(phi); };
}

WaveFunction full_scattering(const WaveFunction& phi_minus, const PotentialSpec& v0,
                             const NonlocalCoupling& c, const ScatterConfig& cfg) {
  auto transform = build_wave_operators(v0, phi_minus.grid);
  return FullScattering(Model(phi_minus.grid, v0, c), transform, cfg)(phi_minus);
}

// ---------------------------------------------------------------------------
// Small-amplitude expansion

namespace {

// Weights w(p, i) with a_p = sum_i w(p, i) y_i for y = sum_p a_p eps^{2p}.
Eigen::MatrixXd ladder_weights(const std::vector<double>& eps) {
  const auto m = static_cast<Eigen::Index>(eps.size());
  Eigen::MatrixXd v(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index p = 0; p < m; ++p) v(i, p) = std::pow(eps[static_cast<std::size_t>(i)], 2.0 * static_cast<double>(p));
  }
  return v.fullPivLu().inverse();
}

WaveFunction combine(const std::vector<WaveFunction>& ys, const Eigen::MatrixXd& w, Eigen::Index p,
                     std::size_t offset) {
  WaveFunction out = WaveFunction::zeros(ys.front().grid, ys.front().t);
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    out += w(p, i) * ys[offset + static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

EpsilonFit epsilon_ladder(const WaveFunction& phi, const ScatteringMap& S,
                          const std::vector<double>& epsilons) {
  require(epsilons.size() >= 2, ErrorKind::InvalidArgument, "epsilon ladder needs two rungs");
  std::vector<double> eps = epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  require(eps.back() > 0.0 && std::adjacent_find(eps.begin(), eps.end()) == eps.end(),
          ErrorKind::InvalidArgument, "epsilons must be positive and distinct");

  EpsilonFit fit;
  fit.epsilons = eps;
  std::vector<std::optional<WaveFunction>> q(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    WaveFunction y = S(cplx(eps[i]) * phi);
    y *= 1.0 / eps[i];
    q[i] = std::move(y);
  });
  for (auto& y : q) fit.quotients.push_back(std::move(*y));

  double ymax = 0.0;
  for (const auto& y : fit.quotients) ymax = std::max(ymax, l2_norm(y));
  const double floor = 1e-10 * std::max(ymax, 1e-300);
  for (std::size_t i = 0; i + 2 < eps.size(); ++i) {
    const double d0 = l2_norm(fit.quotients[i] - fit.quotients[i + 1]);
    const double d1 = l2_norm(fit.quotients[i + 1] - fit.quotients[i + 2]);
    if (d1 > floor && d1 >= d0) {
      std::ostringstream os;
      os << "S(eps phi)/eps does not converge monotonically: successive differences " << d0
         << ", " << d1;
      fail(ErrorKind::NonMonotoneConvergence, os.str());
    }
  }

  const auto w = ladder_weights(eps);
  fit.limit = combine(fit.quotients, w, 0, 0);
  fit.cubic = combine(fit.quotients, w, 1, 0);
  // One order lower through the smallest rungs.
  const std::vector<double> low(eps.begin() + 1, eps.end());
  const auto wl = ladder_weights(low);
  const WaveFunction limit_low = combine(fit.quotients, wl, 0, 1);
  fit.limit_error = l2_norm(fit.limit - limit_low);
  if (low.size() >= 2) {
    fit.cubic_error = l2_norm(fit.cubic - combine(fit.quotients, wl, 1, 1));
  } else {
    fit.cubic_error = l2_norm(fit.cubic);
  }
  return fit;
}

DerivativeEstimate small_amplitude_derivative(const WaveFunction& phi, const ScatteringMap& S,
                                              const ScatterConfig& cfg) {
  EpsilonFit fit = epsilon_ladder(phi, S, cfg.epsilons);
  WaveFunction value = fit.limit;
  const double err = fit.limit_error;
  return {std::move(value), err, std::move(fit)};
}

DerivativeEstimate small_amplitude_derivative(const WaveFunction& phi, const PotentialSpec& v0,
                                              const NonlocalCoupling& c, const ScatterConfig& cfg) {
  auto transform = build_wave_operators(v0, phi.grid);
  const FullScattering S(Model(phi.grid, v0, c), transform, cfg);
  return small_amplitude_derivative(phi, S.as_map(), cfg);
}

QuarticFunctional quartic_functional(const WaveFunction& phi, const Model& model,
                                     const ScatterConfig& cfg) {
  require_same_grid(*phi.grid, *model.grid());
  const Model linear = model.linear();
  const std::size_t sub = split_substeps(*phi.grid, cfg.dt, cfg.max_kinetic_phase);
  const double h = cfg.dt / static_cast<double>(sub);
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.quartic_T_max / h));

  QuarticFunctional out;
  auto integrand = [&](const std::vector<cplx>& u) {
    return model.v1_scalar(u) * model.v2_scalar(u);
  };
  auto half_line = [&](double dir, double& t_end) {
    const SplitStepper stepper(linear, dir * h);
    std::vector<cplx> u = phi.values;
    cplx g_prev = integrand(u);
    double peak = std::abs(g_prev);
    cplx sum = 0.0;
    std::size_t s = 0;
    bool reached = false;
    for (; s < max_steps; ++s) {
      stepper.step_linear(u);
      const cplx g = integrand(u);
      sum += 0.5 * h * (g + g_prev);
      g_prev = g;
      peak = std::max(peak, std::abs(g));
      if (std::abs(g) < cfg.quartic_cutoff * peak) {
        reached = true;
        ++s;
        break;
      }
    }
    t_end = dir * h * static_cast<double>(s);
    return std::pair{sum, reached};
  };
  const auto [fwd, fwd_ok] = half_line(1.0, out.t_hi);
  const auto [bwd, bwd_ok] = half_line(-1.0, out.t_lo);
  out.value = fwd + bwd;
  out.truncation_reached = fwd_ok && bwd_ok;
  if (!out.truncation_reached) {
    std::ostringstream os;
    os << "quartic functional integrand still above cutoff at |t| = " << cfg.quartic_T_max;
    log::warn(os.str());
  }
  return out;
}

CubicResponse cubic_response(const WaveFunction& phi, const Model& model, double epsilon,
                             const ScatterConfig& cfg) {
  require(epsilon > 0.0, ErrorKind::InvalidArgument, "epsilon must be positive");
  const QuarticFunctional q = quartic_functional(phi, model, cfg);
  const WaveFunction probe = cplx(epsilon) * phi;
  const AsymptoticPair pair = nonlinear_scattering(probe, model, cfg);
  const cplx b = I * inner_product(pair.phi_plus - probe, phi) / (epsilon * epsilon * epsilon);
  return {model.lambda() * q.value, b, epsilon, q.truncation_reached};
}

CubicResponse cubic_response(const WaveFunction& phi, const PotentialSpec& v0,
                             const NonlocalCoupling& c, double epsilon, const ScatterConfig& cfg) {
  return cubic_response(phi, Model(phi.grid, v0, c), epsilon, cfg);
}

LambdaEstimate recover_lambda(const ScatteringMap& S, const WaveFunction& phi,
                              const TransformPtr& transform, const NonlocalCoupling& shape,
                              const ScatterConfig& cfg) {
  require(transform != nullptr, ErrorKind::InvalidArgument, "null transform");
  const Model model(phi.grid, transform->potential(), shape.with_lambda(1.0));
  const QuarticFunctional q = quartic_functional(phi, model, cfg);
  const double nphi = l2_norm(phi);
  if (std::abs(q.value) < 1e-10 * std::pow(nphi, 4)) {
    std::ostringstream os;
    os << "probe gives a vanishing quartic functional (" << std::abs(q.value)
       << "); choose another probe";
    fail(ErrorKind::DegenerateProbe, os.str());
  }

  const WaveFunction psi = transform->w_minus_inverse(phi);
  const WaveFunction chi = transform->w_plus_inverse(phi);
  EpsilonFit fit = epsilon_ladder(psi, S, cfg.epsilons);
  const cplx num = I * inner_product(fit.cubic, chi);
  LambdaEstimate est;
  est.lambda_hat = num / q.value;
  est.error_estimate = fit.cubic_error * l2_norm(chi) / std::abs(q.value);
  est.denominator = q.value;
  est.truncation_reached = q.truncation_reached;
  est.fit = std::move(fit);
  return est;
}

WaveFunction default_probe(GridPtr grid, const NonlocalCoupling& c, double sigma, double k0) {
  double x0 = 0.0;
  if (auto s = c.v2_re().support()) x0 = 0.5 * (s->left + s->right);
  return gaussian_packet(std::move(grid), x0, sigma, k0);
}

}  // namespace qcap
