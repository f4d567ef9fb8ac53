#include "qcap/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "qcap/conserve.hpp"

namespace qcap {

namespace {

constexpr cplx I{0.0, 1.0};

std::vector<cplx> sample_complex(const PotentialSpec& re, const PotentialSpec& im,
                                 const SpatialGrid& g) {
  const auto r = evaluate_potential(re, g);
  const auto i = evaluate_potential(im, g);
  std::vector<cplx> out(g.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = {r[j], i[j]};
  return out;
}

std::vector<std::size_t> nonzero_indices(const std::vector<cplx>& v) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] != cplx(0.0)) idx.push_back(j);
  }
  return idx;
}

cplx weighted_scalar(std::span<const cplx> w, std::span<const std::size_t> idx,
                     std::span<const cplx> u, double dx) {
  cplx acc = 0.0;
  for (std::size_t j : idx) acc += w[j] * std::norm(u[j]);
  return acc * dx;
}

// Periodic tridiagonal solve with constant off-diagonals (Sherman-Morrison on
// top of the Thomas algorithm). `diag` is overwritten.
void solve_cyclic_tridiagonal(std::vector<cplx>& diag, cplx off, std::vector<cplx>& rhs) {
  const std::size_t n = diag.size();
  const cplx gamma = -diag[0];
  const cplx alpha = off;  // bottom-left corner
  const cplx beta = off;   // top-right corner
  std::vector<cplx> b = diag;
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;

  std::vector<cplx> cprime(n);
  auto thomas = [&](std::vector<cplx>& x) {
    cplx bet = b[0];
    if (std::abs(bet) < 1e-300) fail(ErrorKind::LinearSolve, "zero pivot in tridiagonal solve");
    x[0] /= bet;
    for (std::size_t j = 1; j < n; ++j) {
      cprime[j] = off / bet;
      bet = b[j] - off * cprime[j];
      if (std::abs(bet) < 1e-300 || !std::isfinite(bet.real())) {
        fail(ErrorKind::LinearSolve, "zero pivot in tridiagonal solve");
      }
      x[j] = (x[j] - off * x[j - 1]) / bet;
    }
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= cprime[j + 1] * x[j + 1];
  };

  thomas(rhs);
  std::vector<cplx> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = alpha;
  thomas(z);
  const cplx fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t j = 0; j < n; ++j) rhs[j] -= fact * z[j];
}

}  // namespace

// ---------------------------------------------------------------------------

Model::Model(GridPtr grid, PotentialSpec v0, NonlocalCoupling coupling)
    : grid_(std::move(grid)), v0_spec_(std::move(v0)), coupling_(std::move(coupling)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "model without a grid");
  v0_ = evaluate_potential(v0_spec_, *grid_);
  v1_ = sample_complex(coupling_.v1_re(), coupling_.v1_im(), *grid_);
  v2_ = sample_complex(coupling_.v2_re(), coupling_.v2_im(), *grid_);
  v1_idx_ = nonzero_indices(v1_);
  v2_idx_ = nonzero_indices(v2_);
}

cplx Model::v1_scalar(std::span<const cplx> u) const noexcept {
  return weighted_scalar(v1_, v1_idx_, u, grid_->dx());
}

cplx Model::v2_scalar(std::span<const cplx> u) const noexcept {
  return weighted_scalar(v2_, v2_idx_, u, grid_->dx());
}

Model Model::with_lambda(cplx lambda) const {
  Model m = *this;
  m.coupling_ = coupling_.with_lambda(lambda);
  return m;
}

// ---------------------------------------------------------------------------

WaveFunction apply_hamiltonian(const WaveFunction& u, const Model& model) {
  require_same_grid(*u.grid, *model.grid());
  const auto& g = *u.grid;
  Fft fft(g.size());
  std::vector<cplx> c = u.values;
  fft.forward(c);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= g.k(j) * g.k(j);
  fft.backward(c);
  const auto v0 = model.v0();
  for (std::size_t j = 0; j < c.size(); ++j) c[j] += v0[j] * u.values[j];
  return WaveFunction(u.grid, std::move(c), u.t);
}

WaveFunction apply_hamiltonian(const WaveFunction& u, const PotentialSpec& v0) {
  return apply_hamiltonian(u, Model(u.grid, v0, NonlocalCoupling::none()));
}

WaveFunction nonlinear_term(const WaveFunction& u, const Model& model) {
  require_same_grid(*u.grid, *model.grid());
  std::vector<cplx> out(u.size(), 0.0);
  const cplx scale = model.lambda() * model.v1_scalar(u.values);
  if (scale != cplx(0.0)) {
    const auto v2 = model.v2();
    for (std::size_t j : model.v2_support()) out[j] = scale * v2[j] * u.values[j];
  }
  return WaveFunction(u.grid, std::move(out), u.t);
}

WaveFunction nonlinear_term(const WaveFunction& u, const NonlocalCoupling& c) {
  return nonlinear_term(u, Model(u.grid, PotentialSpec(), c));
}

WaveFunction free_propagate(const WaveFunction& phi, double t) {
  const auto& g = *phi.grid;
  Fft fft(g.size());
  std::vector<cplx> c = phi.values;
  fft.forward(c);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::exp(-I * (g.k(j) * g.k(j) * t));
  fft.backward(c);
  return WaveFunction(phi.grid, std::move(c), phi.t + t);
}

// ---------------------------------------------------------------------------

SplitStepper::SplitStepper(const Model& model, double dt)
    : model_(&model), dt_(dt), fft_(model.grid()->size()) {
  require(std::isfinite(dt) && dt != 0.0, ErrorKind::InvalidArgument, "time step must be nonzero");
  const auto& g = *model.grid();
  kinetic_.resize(g.size());
  half_v0_.resize(g.size());
  const auto v0 = model.v0();
  for (std::size_t j = 0; j < g.size(); ++j) {
    kinetic_[j] = std::exp(-I * (g.k(j) * g.k(j) * dt));
    half_v0_[j] = std::exp(-I * (0.5 * dt * v0[j]));
  }
  scratch_.resize(g.size());
}

void SplitStepper::potential_half(std::vector<cplx>& u, bool nonlinear) const {
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= half_v0_[j];
  if (!nonlinear) return;
  const cplx lam = model_->lambda();
  if (lam == cplx(0.0)) return;
  const cplx s = model_->v1_scalar(u);
  const cplx rate = -I * (0.5 * dt_) * lam * s;
  const auto v2 = model_->v2();
  for (std::size_t j : model_->v2_support()) u[j] *= std::exp(rate * v2[j]);
}

void SplitStepper::step(std::vector<cplx>& u) const {
  potential_half(u, true);
  fft_.forward(u);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= kinetic_[j];
  fft_.backward(u);
  potential_half(u, true);
}

void SplitStepper::step_linear(std::vector<cplx>& u) const {
  potential_half(u, false);
  fft_.forward(u);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= kinetic_[j];
  fft_.backward(u);
  potential_half(u, false);
}

CrankNicolsonStepper::CrankNicolsonStepper(const Model& model, double dt)
    : model_(&model), dt_(dt) {
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
}

void CrankNicolsonStepper::solve(std::vector<cplx>& out, const std::vector<cplx>& u,
                                 cplx scalar) const {
  const auto& g = *model_->grid();
  const std::size_t n = g.size();
  const double inv_dx2 = 1.0 / (g.dx() * g.dx());
  const cplx half = I * (0.5 * dt_);
  const auto v0 = model_->v0();
  const auto v2 = model_->v2();
  const cplx lam_s = model_->lambda() * scalar;

  // H_eff = -D2 + V0 + lambda s V2, D2 the periodic three-point Laplacian.
  std::vector<cplx> diag_h(n);
  for (std::size_t j = 0; j < n; ++j) diag_h[j] = 2.0 * inv_dx2 + v0[j];
  if (lam_s != cplx(0.0)) {
    for (std::size_t j : model_->v2_support()) diag_h[j] += lam_s * v2[j];
  }
  const cplx off_h = -inv_dx2;

  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx hu = diag_h[j] * u[j] + off_h * (u[(j + n - 1) % n] + u[(j + 1) % n]);
    out[j] = u[j] - half * hu;
  }
  std::vector<cplx> diag(n);
  for (std::size_t j = 0; j < n; ++j) diag[j] = 1.0 + half * diag_h[j];
  solve_cyclic_tridiagonal(diag, half * off_h, out);
}

void CrankNicolsonStepper::step(std::vector<cplx>& u) const {
  const cplx s0 = model_->v1_scalar(u);
  std::vector<cplx> predicted;
  solve(predicted, u, s0);
  const cplx s_mid = 0.5 * (s0 + model_->v1_scalar(predicted));
  std::vector<cplx> corrected;
  solve(corrected, u, s_mid);
  u = std::move(corrected);
}

WaveFunction step_split(const WaveFunction& u, const PotentialSpec& v0, const NonlocalCoupling& c,
                        double dt) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  Model model(u.grid, v0, c);
  SplitStepper stepper(model, dt);
  std::vector<cplx> v = u.values;
  stepper.step(v);
  return WaveFunction(u.grid, std::move(v), u.t + dt);
}

WaveFunction step_crank_nicolson(const WaveFunction& u, const PotentialSpec& v0,
                                 const NonlocalCoupling& c, double dt) {
  Model model(u.grid, v0, c);
  CrankNicolsonStepper stepper(model, dt);
  std::vector<cplx> v = u.values;
  stepper.step(v);
  return WaveFunction(u.grid, std::move(v), u.t + dt);
}

// ---------------------------------------------------------------------------

void EvolutionConfig::validate(const SpatialGrid& grid) const {
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  require(std::isfinite(t_final) && t_final >= 0.0, ErrorKind::InvalidArgument,
          "t_final must be nonnegative");
  if (absorbing) {
    require(absorbing->width > 0.0 && absorbing->width < grid.length() / 4.0,
            ErrorKind::InvalidArgument, "absorbing width must lie in (0, L/4)");
    require(absorbing->strength >= 0.0, ErrorKind::InvalidArgument,
            "absorbing strength must be nonnegative");
  }
  require(blowup_factor > 1.0, ErrorKind::InvalidArgument, "blow-up factor must exceed 1");
}

namespace {

std::vector<double> absorber(const SpatialGrid& g, const AbsorbingMask& mask, double dt) {
  std::vector<double> m(g.size(), 1.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double d = std::min(g.x(j) - g.x_min(), g.x_max() - g.x(j));
    if (d < mask.width) {
      const double c = std::cos(0.5 * std::numbers::pi * d / mask.width);
      m[j] = std::exp(-mask.strength * dt * c * c);
    }
  }
  return m;
}

Interval charge_window(const Model& model, const EvolutionConfig& cfg) {
  if (cfg.charge_window) return *cfg.charge_window;
  const auto& g = *model.grid();
  if (auto s = model.coupling().v2_re().support()) {
    return {std::max(s->left, g.x_min()), std::min(s->right, g.x_max())};
  }
  return {g.x_min(), g.x_max()};
}

Diagnostics diagnose(const WaveFunction& u, const Model& model, const Interval& window) {
  return {l2_norm(u), energy(u, model), trapped_charge(u, window.left, window.right)};
}

}  // namespace

Trajectory evolve(const WaveFunction& phi, const Model& model, const EvolutionConfig& cfg) {
  require_same_grid(*phi.grid, *model.grid());
  cfg.validate(*phi.grid);
  const Interval window = charge_window(model, cfg);

  Trajectory traj;
  traj.times.push_back(phi.t);
  traj.diagnostics.push_back(diagnose(phi, model, window));
  traj.states.push_back(phi);
  const double norm0 = traj.diagnostics.front().norm;

  const auto nsteps = static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
  if (nsteps == 0) return traj;
  const double dt_last = cfg.t_final - static_cast<double>(nsteps - 1) * cfg.dt;

  auto make_step = [&](double dt) -> std::function<void(std::vector<cplx>&)> {
    if (cfg.method == Method::SplitStep) {
      const std::size_t sub = split_substeps(*phi.grid, dt, cfg.max_kinetic_phase);
      auto s = std::make_shared<SplitStepper>(model, dt / static_cast<double>(sub));
      return [s, sub](std::vector<cplx>& u) {
        for (std::size_t i = 0; i < sub; ++i) s->step(u);
      };
    }
    auto s = std::make_shared<CrankNicolsonStepper>(model, dt);
    return [s](std::vector<cplx>& u) { s->step(u); };
  };
  auto step_main = make_step(cfg.dt);
  auto step_tail = std::abs(dt_last - cfg.dt) > 1e-14 ? make_step(dt_last) : step_main;
  const std::vector<double> mask_main =
      cfg.absorbing ? absorber(*phi.grid, *cfg.absorbing, cfg.dt) : std::vector<double>{};
  const std::vector<double> mask_tail =
      cfg.absorbing ? absorber(*phi.grid, *cfg.absorbing, dt_last) : std::vector<double>{};

  std::vector<cplx> u = phi.values;
  double t = phi.t;
  for (std::size_t n = 1; n <= nsteps; ++n) {
    const bool last = n == nsteps;
    (last ? step_tail : step_main)(u);
    const auto& mask = last ? mask_tail : mask_main;
    for (std::size_t j = 0; j < mask.size(); ++j) u[j] *= mask[j];
    const double t_new = phi.t + (last ? cfg.t_final : static_cast<double>(n) * cfg.dt);
    if (!all_finite(u)) {
      std::ostringstream os;
      os << "state became non-finite after t = " << t;
      throw BlowUpError(t, os.str());
    }
    t = t_new;
    WaveFunction state(phi.grid, u, t);
    traj.times.push_back(t);
    traj.diagnostics.push_back(diagnose(state, model, window));
    const bool blew = traj.diagnostics.back().norm > cfg.blowup_factor * norm0;
    if (last || blew || (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0)) {
      traj.states.push_back(std::move(state));
    }
    if (blew) {
      traj.blew_up = true;
      break;
    }
  }
  return traj;
}

Trajectory evolve(const WaveFunction& phi, const PotentialSpec& v0, const NonlocalCoupling& c,
                  const EvolutionConfig& cfg) {
  Model model(phi.grid, v0, c);
  return evolve(phi, model, cfg);
}

// ---------------------------------------------------------------------------

std::size_t picard_nodes(const SpatialGrid& grid, double T, const PicardConfig& cfg) {
  if (cfg.n_time_nodes > 0) return cfg.n_time_nodes;
  const double kmax = std::numbers::pi / grid.dx();
  std::size_t n = std::max<std::size_t>(cfg.min_time_nodes, 2);
  if (cfg.max_kinetic_phase > 0.0)
    n = std::max(n, static_cast<std::size_t>(std::ceil(T * kmax * kmax / cfg.max_kinetic_phase)) + 1);
  return n;
}

PicardResult picard_solve(const WaveFunction& phi, const Model& model, double T,
                          const PicardConfig& cfg) {
  require_same_grid(*phi.grid, *model.grid());
  require(T > 0.0 && std::isfinite(T), ErrorKind::InvalidArgument, "Picard horizon must be > 0");
  require(cfg.n_time_nodes != 1 && cfg.substeps >= 1 && cfg.max_iters >= 1,
          ErrorKind::InvalidArgument, "Picard configuration needs >= 2 nodes and >= 1 iteration");

  const std::size_t nodes = picard_nodes(*phi.grid, T, cfg);
  const double h = T / static_cast<double>(nodes - 1);
  const Model linear = model.linear();
  const SplitStepper prop(linear, h / static_cast<double>(cfg.substeps));
  auto propagate = [&](std::vector<cplx>& v) {
    for (std::size_t s = 0; s < cfg.substeps; ++s) prop.step_linear(v);
  };
  const double dx = phi.grid->dx();

  // Linear flow exp(-i t_j H) phi; also the zeroth iterate.
  std::vector<std::vector<cplx>> lin(nodes);
  lin[0] = phi.values;
  for (std::size_t j = 1; j < nodes; ++j) {
    lin[j] = lin[j - 1];
    propagate(lin[j]);
  }

  auto forcing = [&](const std::vector<cplx>& u) {
    std::vector<cplx> f(u.size(), 0.0);
    const cplx scale = model.lambda() * model.v1_scalar(u);
    if (scale != cplx(0.0)) {
      const auto v2 = model.v2();
      for (std::size_t j : model.v2_support()) f[j] = scale * v2[j] * u[j];
    }
    return f;
  };

  PicardResult result;
  std::vector<std::vector<cplx>> current = lin;
  const double phi_norm = std::max(l2_norm(phi), 1e-300);
  std::size_t rising = 0;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    std::vector<std::vector<cplx>> next(nodes);
    std::vector<cplx> integral(phi.size(), 0.0);
    std::vector<cplx> f_prev = forcing(current[0]);
    next[0] = lin[0];
    double err = 0.0;
    for (std::size_t j = 1; j < nodes; ++j) {
      for (std::size_t i = 0; i < integral.size(); ++i) integral[i] += 0.5 * h * f_prev[i];
      propagate(integral);
      std::vector<cplx> f = forcing(current[j]);
      for (std::size_t i = 0; i < integral.size(); ++i) integral[i] += 0.5 * h * f[i];
      next[j].resize(phi.size());
      for (std::size_t i = 0; i < integral.size(); ++i) next[j][i] = lin[j][i] - I * integral[i];
      if (!all_finite(next[j])) {
        throw BlowUpError(h * static_cast<double>(j - 1), "Picard iterate became non-finite");
      }
      double d2 = 0.0;
      for (std::size_t i = 0; i < integral.size(); ++i) d2 += std::norm(next[j][i] - current[j][i]);
      err = std::max(err, std::sqrt(d2 * dx));
      f_prev = std::move(f);
    }
    result.iteration_errors.push_back(err);
    current = std::move(next);
    if (err <= cfg.tol * phi_norm) {
      result.converged = true;
      break;
    }
    const auto& e = result.iteration_errors;
    if (e.size() >= 2) {
      rising = e[e.size() - 1] >= e[e.size() - 2] ? rising + 1 : 0;
      if (rising >= 3) {
        std::ostringstream os;
        os << "Picard iteration errors stopped decreasing (T = " << T
           << " too large for contraction; last error " << err << ")";
        fail(ErrorKind::NoContraction, os.str());
      }
    }
  }

  Interval window{phi.grid->x_min(), phi.grid->x_max()};
  if (auto s = model.coupling().v2_re().support()) {
    window = {std::max(s->left, phi.grid->x_min()), std::min(s->right, phi.grid->x_max())};
  }
  for (std::size_t j = 0; j < nodes; ++j) {
    WaveFunction state(phi.grid, std::move(current[j]), phi.t + h * static_cast<double>(j));
    result.trajectory.times.push_back(state.t);
    result.trajectory.diagnostics.push_back(diagnose(state, model, window));
    result.trajectory.states.push_back(std::move(state));
  }
  return result;
}

PicardResult picard_solve(const WaveFunction& phi, const PotentialSpec& v0,
                          const NonlocalCoupling& c, double T, const PicardConfig& cfg) {
  Model model(phi.grid, v0, c);
  return picard_solve(phi, model, T, cfg);
}

std::size_t split_substeps(const SpatialGrid& grid, double dt, double max_kinetic_phase) {
  if (max_kinetic_phase <= 0.0) return 1;
  const double kmax = std::numbers::pi / grid.dx();
  return std::max<std::size_t>(1, static_cast<std::size_t>(
                                      std::ceil(kmax * kmax * std::abs(dt) / max_kinetic_phase - 1e-12)));
}

double contraction_ratio(const std::vector<double>& errors, double floor) {
  double ratio = 0.0;
  for (std::size_t m = 1; m < errors.size(); ++m) {
    if (errors[m - 1] <= floor || errors[m] <= floor) break;
    ratio = std::max(ratio, errors[m] / errors[m - 1]);
  }
  return ratio;
}

double lipschitz_quotient(const std::vector<double>& errors) {
  require(errors.size() >= 2 && errors[0] > 0.0, ErrorKind::InvalidArgument,
          "need two iteration errors");
  return errors[1] / errors[0];
}

std::vector<DependenceRow> continuous_dependence(const WaveFunction& phi, const WaveFunction& eta,
                                                 const Model& model, double t_final, double dt,
                                                 const std::vector<double>& deltas) {
  require_same_grid(*phi.grid, *eta.grid);
  require(dt > 0.0 && t_final > 0.0, ErrorKind::InvalidArgument, "need positive dt and t_final");
  const double eta_norm = l2_norm(eta);
  require(eta_norm > 0.0, ErrorKind::InvalidArgument, "zero perturbation");
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  const double h_outer = t_final / static_cast<double>(steps);
  const std::size_t sub = split_substeps(*phi.grid, h_outer, std::numbers::pi);
  const SplitStepper stepper(model, h_outer / static_cast<double>(sub));
  const double dx = phi.grid->dx();

  std::vector<DependenceRow> rows;
  for (double delta : deltas) {
    std::vector<cplx> u = phi.values, w = phi.values;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += delta / eta_norm * eta.values[j];
    std::vector<cplx> diff(u.size());
    auto distance = [&] {
      for (std::size_t j = 0; j < u.size(); ++j) diff[j] = w[j] - u[j];
      return l2_norm(diff, dx);
    };
    double sup = distance();
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t q = 0; q < sub; ++q) {
        stepper.step(u);
        stepper.step(w);
      }
      if (!all_finite(u) || !all_finite(w))
        throw BlowUpError(static_cast<double>(s) * h_outer, "state not finite");
      sup = std::max(sup, distance());
    }
    rows.push_back({delta, sup, sup / delta});
  }
  return rows;
}

WaveFunction random_perturbation(GridPtr grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& g = *grid;
  const double lo = g.x_min() + 0.25 * (g.x_max() - g.x_min());
  const double hi = g.x_max() - 0.25 * (g.x_max() - g.x_min());
  std::uniform_real_distribution<double> centre(lo, hi), width(0.5, 2.0), momentum(-3.0, 3.0);
  std::normal_distribution<double> weight;
  WaveFunction out = WaveFunction::zeros(grid);
  for (int i = 0; i < 4; ++i) {
    const double x0 = centre(rng), s = width(rng), k = momentum(rng);
    const cplx a(weight(rng), weight(rng));
    const WaveFunction bump = gaussian_packet(grid, x0, s, k);
    for (std::size_t j = 0; j < g.size(); ++j) out.values[j] += a * bump.values[j];
  }
  return out;
}

}  // namespace qcap
