#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qcap/conserve.hpp"
#include "qcap/log.hpp"

namespace qcap::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class F>
void write_csv(io::Manifest& m, const std::string& name, F&& fn) {
  std::ostringstream os;
  fn(os);
  m.write_text(name, os.str());
}

void plot(io::Manifest& m, const std::string& csv, const std::string& title,
          const std::vector<std::pair<std::string, std::string>>& cols, bool log_y = false,
          bool log_x = false) {
  const std::string stem = csv.substr(0, csv.rfind('.'));
  m.write_text(stem + ".gp", io::gnuplot_script(csv, title, cols, log_y, log_x));
}

void write_json(io::Manifest& m, const std::string& name, const json& j) {
  m.write_text(name, j.dump(2) + "\n");
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Model model_of(const ExperimentConfig& cfg, GridPtr grid) {
  return Model(std::move(grid), cfg.potential, cfg.coupling);
}

const ScatterBlock& need_scattering(const ExperimentConfig& cfg) {
  if (!cfg.scattering) fail(ErrorKind::Config, "/scattering: missing required block");
  return *cfg.scattering;
}

WaveFunction probe_of(const ExperimentConfig& cfg, GridPtr grid, const NonlocalCoupling& shape) {
  const auto& sb = need_scattering(cfg);
  if (sb.probe) return sb.probe->make(grid);
  return default_probe(grid, shape);
}

double rel_l2(const WaveFunction& a, const WaveFunction& b) {
  std::vector<cplx> d(a.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = a.values[j] - b.values[j];
  return l2_norm(d, a.grid->dx()) / l2_norm(b);
}

// ---------------------------------------------------------------------------

void cmd_evolve(const ExperimentConfig& cfg, io::Manifest& m, json& summary) {
  if (!cfg.evolution) fail(ErrorKind::Config, "/evolution: missing required block");
  const auto grid = cfg.grid.make();
  const Model model = model_of(cfg, grid);
  const WaveFunction phi = cfg.initial.make(grid);
  const Trajectory traj = evolve(phi, model, *cfg.evolution);
  const ConservationReport rep = verify_conservation(traj, model);

  write_csv(m, "diagnostics.csv", [&](std::ostream& os) { io::write_diagnostics_csv(os, traj); });
  plot(m, "diagnostics.csv", "norm, energy and trapped charge",
       {{"2", "norm"}, {"3", "energy"}, {"4", "charge"}});
  write_csv(m, "conservation.csv", [&](std::ostream& os) { io::write_conservation_csv(os, rep); });
  plot(m, "conservation.csv", "relative drift", {{"2", "norm"}, {"3", "energy"}}, true);
  write_csv(m, "final_state.csv",
            [&](std::ostream& os) { io::write_wavefunction_csv(os, traj.final_state()); });
  plot(m, "final_state.csv", "|u(T)|^2", {{"4", "|u|^2"}});
  fs::create_directories(m.dir() / "snapshots");
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::ostringstream name;
    name << "snapshots/state_" << i << ".bin";
    io::write_snapshot(m.dir() / name.str(), traj.states[i]);
    m.add(m.dir() / name.str());
  }

  summary["steps"] = traj.times.size() - 1;
  summary["blew_up"] = traj.blew_up;
  summary["norm_conserved_hypothesis"] = rep.applicable.norm_conserved;
  summary["energy_conserved_hypothesis"] = rep.applicable.energy_conserved;
  summary["max_norm_drift"] = rep.max_norm_drift;
  summary["max_energy_drift"] = rep.max_energy_drift;
  summary["norm_pass"] = rep.norm_pass;
  summary["energy_pass"] = rep.energy_pass;
  summary["pass"] = rep.pass();
  log::info("evolve: norm drift " + io::format_double(rep.max_norm_drift) + ", energy drift " +
            io::format_double(rep.max_energy_drift));
}

void cmd_picard(const ExperimentConfig& cfg, io::Manifest& m, json& summary) {
  const auto grid = cfg.grid.make();
  const Model model = model_of(cfg, grid);
  PacketBlock pb = cfg.initial;
  pb.norm = cfg.picard.norm;
  const WaveFunction phi = pb.make(grid);

  std::vector<std::vector<double>> errs;
  json rows = json::array();
  for (double T : cfg.picard.T_values) {
    const PicardResult r = picard_solve(phi, model, T, cfg.picard.iteration);
    const double d = contraction_ratio(r.iteration_errors);
    const double q = lipschitz_quotient(r.iteration_errors);
    rows.push_back({{"T", T}, {"nodes", picard_nodes(*grid, T, cfg.picard.iteration)},
                    {"iterations", r.iteration_errors.size()},
                    {"converged", r.converged}, {"max_ratio", d}, {"lipschitz_quotient", q}});
    errs.push_back(r.iteration_errors);
  }
  write_csv(m, "picard_errors.csv", [&](std::ostream& os) {
    os << "iteration";
    for (double T : cfg.picard.T_values) os << ",T=" << io::format_double(T);
    os << '\n';
    std::size_t len = 0;
    for (const auto& e : errs) len = std::max(len, e.size());
    for (std::size_t i = 0; i < len; ++i) {
      os << i;
      for (const auto& e : errs) os << ',' << (i < e.size() ? io::format_double(e[i]) : "");
      os << '\n';
    }
  });
  std::vector<std::pair<std::string, std::string>> cols;
  for (std::size_t i = 0; i < cfg.picard.T_values.size(); ++i)
    cols.emplace_back(std::to_string(i + 2), "T = " + io::format_double(cfg.picard.T_values[i]));
  plot(m, "picard_errors.csv", "Picard iteration errors", cols, true);
  summary["contraction"] = rows;

  const WaveFunction eta = random_perturbation(grid, cfg.seed);
  const auto dep = continuous_dependence(phi, eta, model, cfg.picard.horizon, cfg.picard.dt,
                                         cfg.picard.deltas);
  write_csv(m, "continuous_dependence.csv", [&](std::ostream& os) {
    os << "delta,sup_distance,ratio\n";
    for (const auto& r : dep)
      os << io::format_double(r.delta) << ',' << io::format_double(r.sup_distance) << ','
         << io::format_double(r.ratio) << '\n';
  });
  plot(m, "continuous_dependence.csv", "sup_t ||u_delta - u||", {{"2", "distance"}}, true, true);
  double lo = INFINITY, hi = 0.0;
  json drows = json::array();
  for (const auto& r : dep) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    drows.push_back({{"delta", r.delta}, {"sup_distance", r.sup_distance}, {"ratio", r.ratio}});
  }
  summary["continuous_dependence"] = drows;
  summary["ratio_spread"] = hi / lo - 1.0;
}

void cmd_jost(const ExperimentConfig& cfg, io::Manifest& m, json& summary) {
  const ClassifyResult cl = classify(cfg.potential);
  const ScatteringData sd = reflection_transmission(cfg.potential, cfg.jost.k_grid());
  write_csv(m, "scattering.csv", [&](std::ostream& os) { io::write_scattering_csv(os, sd); });
  plot(m, "scattering.csv", "transmission and reflection",
       {{"($2**2+$3**2)", "|t|^2"}, {"($6**2+$7**2)", "|r_right|^2"}}, false, true);
  summary["classification"] = to_string(cl.kind);
  summary["wronskian_at_zero"] = complex_json(cl.wronskian_at_zero);
  summary["bound_states"] = 0;
  summary["unitarity_defect"] = sd.unitarity_defect();
  summary["n_k"] = sd.size();
}

void cmd_scatter(const ExperimentConfig& cfg, io::Manifest& m, json& summary) {
  const auto& sb = need_scattering(cfg);
  const ScatterConfig& sc = sb.config;
  const auto grid = cfg.grid.make();
  const Model model = model_of(cfg, grid);
  const WaveFunction phi = probe_of(cfg, grid, cfg.coupling);
  const auto transform = build_wave_operators(cfg.potential, grid);

  // Small-amplitude law.
  fs::create_directories(m.dir() / "phi_plus");
  json records = json::array();
  std::vector<double> le, ld;
  for (std::size_t i = 0; i < sb.slope_epsilons.size(); ++i) {
    const double eps = sb.slope_epsilons[i];
    WaveFunction in = phi;
    for (auto& v : in.values) v *= eps;
    const AsymptoticPair pair = nonlinear_scattering(in, model, sc);
    const std::string path = "phi_plus/eps_" + std::to_string(i) + ".bin";
    io::write_snapshot(m.dir() / path, pair.phi_plus);
    m.add(m.dir() / path);
    const double diff = rel_l2(pair.phi_plus, pair.phi_minus) * l2_norm(pair.phi_minus);
    records.push_back({{"epsilon", eps}, {"phi_id", "probe"}, {"phi_plus_path", path},
                       {"matching_error", pair.matching_error}, {"T", pair.T},
                       {"converged", pair.converged}, {"difference_norm", diff}});
    le.push_back(std::log(eps));
    ld.push_back(std::log(diff));
  }
  write_json(m, "probe_records.json", records);
  write_csv(m, "slope.csv", [&](std::ostream& os) {
    os << "epsilon,difference_norm\n";
    for (std::size_t i = 0; i < le.size(); ++i)
      os << io::format_double(std::exp(le[i])) << ',' << io::format_double(std::exp(ld[i])) << '\n';
  });
  plot(m, "slope.csv", "||phi+ - phi-|| against epsilon", {{"2", "difference"}}, true, true);
  double slope = NAN;
  if (le.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < le.size(); ++i) mx += le[i], my += ld[i];
    mx /= static_cast<double>(le.size());
    my /= static_cast<double>(le.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < le.size(); ++i) {
      sxy += (le[i] - mx) * (ld[i] - my);
      sxx += (le[i] - mx) * (le[i] - mx);
    }
    slope = sxy / sxx;
  }
  summary["slope"] = slope;

  // Derivative against the matrix form of S_L.
  const FullScattering S(model, transform, sc);
  const DerivativeEstimate der = small_amplitude_derivative(phi, S.as_map(), sc);
  const WaveFunction sl = LinearScatteringOperator(transform).apply(phi);
  summary["derivative_rel_error"] = rel_l2(der.value, sl);
  summary["derivative_error_estimate"] = der.error_estimate;

  // Cubic response.
  const CubicResponse cr = cubic_response(phi, model, 0.05, sc);
  summary["cubic_direct"] = complex_json(cr.direct);
  summary["cubic_from_scattering"] = complex_json(cr.from_scattering);
  summary["cubic_rel_difference"] = std::abs(cr.direct - cr.from_scattering) / std::abs(cr.direct);

  // lambda with V0 known.
  const LambdaEstimate le_ = recover_lambda(S.as_map(), phi, transform, cfg.coupling, sc);
  json lam{{"lambda_hat_re", le_.lambda_hat.real()},
           {"lambda_hat_im", le_.lambda_hat.imag()},
           {"error_estimate", le_.error_estimate},
           {"probe_id", "probe"},
           {"denominator", complex_json(le_.denominator)},
           {"truncation_reached", le_.truncation_reached}};
  write_json(m, "lambda.json", lam);
  summary["lambda_true"] = complex_json(cfg.coupling.lambda());
  summary["lambda_hat"] = complex_json(le_.lambda_hat);
}

json fit_json(const CapacitorFit& f) {
  auto one = [](const CapacitorParams& p) {
    return json{{"beta1", p.beta1}, {"beta2", p.beta2}, {"a", p.a},
                {"b", p.b},         {"c", p.c},         {"d", p.d}};
  };
  return {{"value", one(f.value)}, {"uncertainty", one(f.uncertainty)}};
}

void write_reconstruction(io::Manifest& m, const ReconstructionResult& r) {
  write_csv(m, "reconstruction.csv", [&](std::ostream& os) { io::write_reconstruction_csv(os, r); });
  plot(m, "reconstruction.csv", "reconstructed V0", {{"2", "v0_hat"}});
  write_csv(m, "reflection_input.csv",
            [&](std::ostream& os) { io::write_scattering_csv(os, r.source); });
  plot(m, "reflection_input.csv", "input reflection data",
       {{"($6**2+$7**2)", "|r_right|^2"}}, true);
}

void cmd_invert(const ExperimentConfig& cfg, io::Manifest& m, json& summary) {
  const auto& inv = cfg.inversion;
  const auto x_grid = inv.x_grid.make();
  ReconstructionResult res;
  if (inv.source == "jost") {
    const ScatteringData sd = uniform_scattering_data(cfg.potential, inv.dk, inv.recon.k_max);
    const MarchenkoKernel kernel = build_kernel(sd, x_grid, inv.recon.kernel);
    summary["kernel_max_imag"] = kernel.max_imag;
    write_csv(m, "kernel.csv", [&](std::ostream& os) {
      os << "s,F\n";
      for (std::size_t j = 0; j < kernel.s.size(); ++j)
        os << io::format_double(kernel.s[j]) << ',' << io::format_double(kernel.F[j]) << '\n';
    });
    plot(m, "kernel.csv", "Marchenko kernel F(s)", {{"2", "F"}});
    res = marchenko_solve(kernel, inv.recon.marchenko);
  } else {
    const auto grid = cfg.grid.make();
    ReconstructConfig rc = inv.recon;
    const FullScattering S(model_of(cfg, grid), build_wave_operators(cfg.potential, grid),
                           rc.scatter);
    res = reconstruct_from_S(S.as_map(), grid, x_grid, rc);
  }
  write_reconstruction(m, res);
  summary["source"] = inv.source;
  summary["residual"] = res.residual;
  summary["max_condition"] = res.max_condition;
  summary["input_unitarity_defect"] = res.source.unitarity_defect();
  try {
    summary["capacitor_fit"] = fit_json(fit_capacitor_params(res));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ShapeMismatch) throw;
    summary["capacitor_fit"] = nullptr;
    summary["capacitor_fit_error"] = e.what();
  }
}

void cmd_capacitor(const ExperimentConfig& cfg, io::Manifest& m, json& report) {
  const auto& sb = need_scattering(cfg);
  const auto& inv = cfg.inversion;
  const auto grid = cfg.grid.make();
  const Model model = model_of(cfg, grid);
  Timer clock;

  // The black box: S for the configured model. Everything below sees only the map.
  const FullScattering S(model, build_wave_operators(cfg.potential, grid), sb.config);
  const ScatteringMap box = S.as_map();

  ReconstructConfig rc = inv.recon;
  rc.scatter = sb.config;
  const ReconstructionResult res = reconstruct_from_S(box, grid, inv.x_grid.make(), rc);
  write_reconstruction(m, res);
  const double t_inv = clock.seconds();
  const CapacitorFit fit = fit_capacitor_params(res);

  // V1 = V2 = indicator of the recovered well [b, c].
  const NonlocalCoupling shape = NonlocalCoupling::capacitor(1.0, fit.value.b, fit.value.c);
  const auto transform_hat = build_wave_operators(res.potential(), grid);
  const WaveFunction phi =
      sb.probe ? sb.probe->make(grid) : default_probe(grid, shape);
  const LambdaEstimate lam = recover_lambda(box, phi, transform_hat, shape, sb.config);

  report["capacitor"] = fit_json(fit);
  report["lambda"] = {{"lambda_hat_re", lam.lambda_hat.real()},
                      {"lambda_hat_im", lam.lambda_hat.imag()},
                      {"error_estimate", lam.error_estimate},
                      {"probe_id", sb.probe ? "probe" : "default"},
                      {"truncation_reached", lam.truncation_reached}};
  report["reconstruction"] = {{"residual", res.residual},
                              {"max_condition", res.max_condition},
                              {"input_unitarity_defect", res.source.unitarity_defect()},
                              {"dx", res.x_grid->dx()},
                              {"seconds", t_inv}};
  if (const auto* db = std::get_if<DoubleBarrier>(&cfg.potential.variant())) {
    report["reference"] = {{"beta1", db->beta1}, {"beta2", db->beta2}, {"a", db->a},
                           {"b", db->b},         {"c", db->c},         {"d", db->d},
                           {"lambda_re", cfg.coupling.lambda().real()},
                           {"lambda_im", cfg.coupling.lambda().imag()}};
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"evolve", "picard", "jost",
                                              "scatter", "invert", "capacitor"};
  return names;
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridMismatch:
    case ErrorKind::PreconditionViolated:
    case ErrorKind::DegenerateProbe:
    case ErrorKind::BadData:
    case ErrorKind::ShapeMismatch:
      return 3;
    default:
      return 4;
  }
}

void run(const std::string& sub, const ExperimentConfig& cfg, const fs::path& out) {
  static const std::map<std::string,
                        std::function<void(const ExperimentConfig&, io::Manifest&, json&)>>
      table{{"evolve", cmd_evolve},   {"picard", cmd_picard}, {"jost", cmd_jost},
            {"scatter", cmd_scatter}, {"invert", cmd_invert}, {"capacitor", cmd_capacitor}};
  const auto it = table.find(sub);
  if (it == table.end()) fail(ErrorKind::Config, "unknown subcommand " + sub);
  io::Manifest m(out);
  json summary = json::object();
  Timer clock;
  it->second(cfg, m, summary);
  summary["seconds"] = clock.seconds();
  write_json(m, sub == "capacitor" ? "report.json" : "summary.json", summary);
  m.finish(sub, cfg.resolved);
}

}  // namespace qcap::cli
