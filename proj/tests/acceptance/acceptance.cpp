// Runs the eleven acceptance checks and prints one PASS/FAIL line for each.
// Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "qcap/conserve.hpp"
#include "qcap/invert.hpp"
#include "qcap/log.hpp"
#include "qcap/scatter.hpp"

using namespace qcap;
namespace fs = std::filesystem;

namespace {

const PotentialSpec kCapacitor = PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2);

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double rel(const WaveFunction& a, const WaveFunction& b) { return l2_norm(a - b) / l2_norm(b); }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------

Outcome conservation() {
  Stopwatch sw;
  auto g = make_grid(-40, 40, 2048);
  Model m(g, kCapacitor, NonlocalCoupling::capacitor(1.0, -1, 1));
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.snapshot_every = 100;
  auto traj = evolve(gaussian_packet(g, -6, 1.0, 2.0), m, cfg);
  auto rep = verify_conservation(traj, m);
  const double s = sw.seconds();
  return {rep.max_norm_drift < 1e-8 && rep.max_energy_drift < 1e-6 && s < 60,
          fmt("norm drift %.2e, energy drift %.2e, %.1f s", rep.max_norm_drift,
              rep.max_energy_drift, s)};
}

Outcome picard() {
  Stopwatch sw;
  auto g = make_grid(-40, 40, 2048);
  Model m(g, kCapacitor, NonlocalCoupling::capacitor(1.0, -1, 1));
  auto phi = gaussian_packet(g, 0, 1.0, 0.0, 0.5);
  auto a = picard_solve(phi, m, 0.2, {});
  auto b = picard_solve(phi, m, 0.1, {});
  // d bounds every successive ratio; the first-step quotients are reported alongside
  const double d = contraction_ratio(a.iteration_errors);
  const double dh = contraction_ratio(b.iteration_errors);
  const double s = sw.seconds();
  return {a.converged && b.converged && d < 0.5 && dh <= 0.5 * d && s < 60,
          fmt("d(T=0.2) %.4f, d(T=0.1) %.4f, ratio %.3f (first-step quotients %.4f, %.4f), %.1f s", d,
              dh, dh / d, lipschitz_quotient(a.iteration_errors),
              lipschitz_quotient(b.iteration_errors), s)};
}

Outcome dependence() {
  auto g = make_grid(-40, 40, 2048);
  Model m(g, kCapacitor, NonlocalCoupling::capacitor(1.0, -1, 1));
  auto rows = continuous_dependence(gaussian_packet(g, 0, 1.0, 0.0, 0.5), random_perturbation(g, 7),
                                    m, 1.0, 1e-3, {1e-2, 1e-3, 1e-4});
  double lo = INFINITY, hi = 0;
  for (const auto& r : rows) lo = std::min(lo, r.ratio), hi = std::max(hi, r.ratio);
  return {hi <= 1.2 * lo, fmt("ratios in [%.6f, %.6f]", lo, hi)};
}

Outcome jost_accuracy() {
  Stopwatch sw;
  auto sd = reflection_transmission(PotentialSpec::indicator(0, 1, 1.0), default_k_grid());
  double err = 0;
  for (std::size_t j = 0; j < sd.size(); ++j) {
    auto ref = oracle::square_barrier(0, 1, 1.0, sd.k[j]);
    err = std::max({err, std::abs(sd.t[j] - ref.t), std::abs(sd.r_left[j] - ref.r_left),
                    std::abs(sd.r_right[j] - ref.r_right)});
  }
  const double u = sd.unitarity_defect(), s = sw.seconds();
  return {sd.size() == 256 && err < 1e-8 && u < 1e-8 && s < 10,
          fmt("max error %.2e, unitarity %.2e over %zu k, %.2f s", err, u, sd.size(), s)};
}

Outcome classification() {
  auto z = classify(PotentialSpec::zero());
  auto b = classify(PotentialSpec::indicator(0, 1, 1.0));
  return {z.kind == Classification::Exceptional && b.kind == Classification::Generic,
          fmt("V0=0 %s, unit barrier %s (|W| %.4f)", to_string(z.kind), to_string(b.kind),
              std::abs(b.wronskian_at_zero))};
}

struct ScatterSetup {
  GridPtr grid = make_grid(-160, 160, 8192);
  TransformPtr transform = build_wave_operators(kCapacitor, grid);
  NonlocalCoupling coupling = NonlocalCoupling::capacitor(1.0, -1, 1);
  ScatterConfig cfg = [] {
    ScatterConfig c;
    c.dt = 2e-3;
    return c;
  }();
  WaveFunction phi = default_probe(grid, coupling);
};

Outcome small_amplitude(const ScatterSetup& s) {
  Model m(s.grid, kCapacitor, s.coupling);
  std::vector<double> eps{0.02, 0.05, 0.1, 0.2}, diff;
  for (double e : eps) {
    auto pr = nonlinear_scattering(e * s.phi, m, s.cfg);
    diff.push_back(l2_norm(pr.phi_plus - pr.phi_minus));
  }
  const double sl = slope(eps, diff);
  return {std::abs(sl - 3.0) <= 0.1, fmt("slope %.4f", sl)};
}

Outcome derivative(const ScatterSetup& s) {
  FullScattering S(Model(s.grid, kCapacitor, s.coupling), s.transform, s.cfg);
  auto d = small_amplitude_derivative(s.phi, S.as_map(), s.cfg);
  const double e = rel(d.value, LinearScatteringOperator(s.transform).apply(s.phi));
  return {e <= 1e-3, fmt("relative L2 error %.2e (Richardson estimate %.2e)", e, d.error_estimate)};
}

Outcome cubic(const ScatterSetup& s) {
  auto cr = cubic_response(s.phi, Model(s.grid, kCapacitor, s.coupling), 0.05, s.cfg);
  const double e = std::abs(cr.direct - cr.from_scattering) / std::abs(cr.direct);
  return {e <= 0.05, fmt("direct %.6f, from S %.6f%+.2ei, relative difference %.2e", cr.direct.real(),
                         cr.from_scattering.real(), cr.from_scattering.imag(), e)};
}

ReconstructionResult capacitor_round_trip() {
  auto sd = uniform_scattering_data(kCapacitor, 0.005, 40.0);
  return marchenko_solve(build_kernel(sd, make_grid(-4, 4, 512)), {.residual_stride = 4});
}

Outcome lambda_recovery(const ScatterSetup& s, const ReconstructionResult& rec) {
  auto transform_hat = build_wave_operators(rec.potential(), s.grid);
  bool ok = true;
  std::string detail;
  for (double lam : {-0.3, 0.5, 1.0}) {
    Stopwatch sw;
    FullScattering S(Model(s.grid, kCapacitor, s.coupling.with_lambda(lam)), s.transform, s.cfg);
    auto known = recover_lambda(S.as_map(), s.phi, s.transform, s.coupling, s.cfg);
    auto recon = recover_lambda(S.as_map(), s.phi, transform_hat, s.coupling, s.cfg);
    const double ek = std::abs(known.lambda_hat - lam) / std::abs(lam);
    const double er = std::abs(recon.lambda_hat - lam) / std::abs(lam);
    const double t = sw.seconds();
    ok = ok && ek <= 0.01 && er <= 0.03 && t < 600;
    detail += fmt("%s%.1f: %.5f (%.1e) / %.5f (%.1e) %.0f s", detail.empty() ? "" : "; ", lam,
                  known.lambda_hat.real(), ek, recon.lambda_hat.real(), er, t);
  }
  return {ok, "lambda: given V0 (rel) / reconstructed V0 (rel): " + detail};
}

bool params_ok(const CapacitorParams& p, const CapacitorParams& want, double dx) {
  return std::abs(p.beta1 - want.beta1) <= 0.05 * want.beta1 &&
         std::abs(p.beta2 - want.beta2) <= 0.05 * want.beta2 && std::abs(p.a - want.a) <= 2 * dx &&
         std::abs(p.b - want.b) <= 2 * dx && std::abs(p.c - want.c) <= 2 * dx &&
         std::abs(p.d - want.d) <= 2 * dx;
}

std::string params_str(const CapacitorParams& p) {
  return fmt("beta %.4f %.4f, edges %.4f %.4f %.4f %.4f", p.beta1, p.beta2, p.a, p.b, p.c, p.d);
}

Outcome reconstruction(const ReconstructionResult& rec) {
  auto fit = fit_capacitor_params(rec);
  const double dx = rec.x_grid->dx();
  return {params_ok(fit.value, {2, 2, -2, -1, 1, 2}, dx) && rec.residual >= 0 &&
              rec.residual <= 1e-3,
          params_str(fit.value) + fmt(", residual %.2e, dx %.4f", rec.residual, dx)};
}

Outcome pipeline() {
  const fs::path out = fs::path(QCAP_ACCEPTANCE_OUT) / "capacitor";
  fs::remove_all(out);
  fs::create_directories(out.parent_path());
  Stopwatch sw;
  const std::string cmd = std::string(QCAP_EXE) + " capacitor --config " + QCAP_CAPACITOR_CONFIG +
                          " --out " + out.string() + " > " + (out.string() + ".log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  const double t = sw.seconds();
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code != 0) return {false, fmt("qcap capacitor exited with %d", code)};
  std::ifstream in(out / "report.json");
  auto r = nlohmann::json::parse(in);
  const auto& v = r["capacitor"]["value"];
  CapacitorParams p{v["beta1"], v["beta2"], v["a"], v["b"], v["c"], v["d"]};
  const auto& ref = r["reference"];
  CapacitorParams want{ref["beta1"], ref["beta2"], ref["a"], ref["b"], ref["c"], ref["d"]};
  const double dx = r["reconstruction"]["dx"];
  const double residual = r["reconstruction"]["residual"];
  const double lam = r["lambda"]["lambda_hat_re"], lam_im = r["lambda"]["lambda_hat_im"];
  const double lam_true = ref["lambda_re"];
  const double el = std::hypot(lam - lam_true, lam_im) / std::abs(lam_true);
  return {params_ok(p, want, dx) && residual <= 1e-3 && el <= 0.03 && t < 1800,
          params_str(p) + fmt(", lambda %.5f (rel %.1e), residual %.2e, %.0f s", lam, el, residual, t)};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  log::set_level(log::Level::Warn);
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    failures += !o.pass;
  };

  report(1, "conservation", conservation);
  report(2, "picard contraction", picard);
  report(3, "continuous dependence", dependence);
  report(4, "jost accuracy", jost_accuracy);
  report(5, "classification", classification);

  std::unique_ptr<ScatterSetup> setup;
  std::unique_ptr<ReconstructionResult> rec;
  auto need_setup = [&]() -> const ScatterSetup& {
    if (!setup) setup = std::make_unique<ScatterSetup>();
    return *setup;
  };
  auto need_rec = [&]() -> const ReconstructionResult& {
    if (!rec) rec = std::make_unique<ReconstructionResult>(capacitor_round_trip());
    return *rec;
  };
  report(6, "small-amplitude law", [&] { return small_amplitude(need_setup()); });
  report(7, "derivative formula", [&] { return derivative(need_setup()); });
  report(8, "cubic response", [&] { return cubic(need_setup()); });
  report(9, "lambda recovery", [&] { return lambda_recovery(need_setup(), need_rec()); });
  report(10, "V0 reconstruction", [&] { return reconstruction(need_rec()); });
  report(11, "capacitor pipeline", pipeline);
  return failures;
}
