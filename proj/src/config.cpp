#include "qcap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qcap {

using io::json;

namespace {

[[noreturn]] void config_error(const std::string& pointer, const std::string& what) {
  fail(ErrorKind::Config, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

// Reads one JSON object; every key looked at is echoed into `out`, and finish()
// rejects the keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) config_error(ptr_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return ptr_ + "/" + key; }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (j_.contains(key)) fallback = convert<T>(key);
    out[key] = fallback;
    return fallback;
  }

  template <class T>
  T need(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) config_error(at(key), "missing required key");
    T v = convert<T>(key);
    out[key] = v;
    return v;
  }

  /// Raw access to a nested value; the caller echoes it.
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) config_error(at(k), "unknown key");
  }

  json out = json::object();

 private:
  template <class T>
  T convert(const std::string& key) const {
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) config_error(at(key), "expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
        config_error(at(key), "expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_error(at(key), "expected a string");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) config_error(at(key), "expected an array of numbers");
      for (const auto& e : v)
        if (!e.is_number()) config_error(at(key), "expected an array of numbers");
    }
    return v.get<T>();
  }

  json j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

template <class F>
void block(Reader& parent, const std::string& key, json& echo_into, F&& fn) {
  Reader r(parent.raw(key), parent.at(key));
  fn(r);
  r.finish();
  echo_into[key] = r.out;
}

void positive(double v, const std::string& pointer) {
  if (!(v > 0.0)) config_error(pointer, "must be positive");
}

GridBlock parse_grid(Reader& r, GridBlock g) {
  g.x_min = r.get("x_min", g.x_min);
  g.x_max = r.get("x_max", g.x_max);
  g.n = r.get("n", g.n);
  if (!(g.x_max > g.x_min)) config_error(r.at("x_max"), "must exceed x_min");
  if (g.n < 16 || (g.n & (g.n - 1))) config_error(r.at("n"), "must be a power of two >= 16");
  return g;
}

PacketBlock parse_packet(Reader& r, PacketBlock p) {
  p.x0 = r.get("x0", p.x0);
  p.sigma = r.get("sigma", p.sigma);
  p.k0 = r.get("k0", p.k0);
  p.norm = r.get("norm", p.norm);
  positive(p.sigma, r.at("sigma"));
  return p;
}

PotentialSpec parse_potential_reader(Reader& r) {
  const auto type = r.need<std::string>("type");
  if (type == "zero") return PotentialSpec::zero();
  if (type == "indicator") {
    const double left = r.need<double>("left");
    const double right = r.need<double>("right");
    const double height = r.get("height", 1.0);
    if (!(right > left)) config_error(r.at("right"), "must exceed left");
    return PotentialSpec::indicator(left, right, height);
  }
  if (type == "double_barrier") {
    const double b1 = r.get("beta1", 2.0), b2 = r.get("beta2", 2.0);
    const double a = r.get("a", -2.0), b = r.get("b", -1.0), c = r.get("c", 1.0),
                 d = r.get("d", 2.0);
    if (!(a < b && b <= c && c < d)) config_error(r.at("a"), "need a < b <= c < d");
    return PotentialSpec::double_barrier(b1, b2, a, b, c, d);
  }
  if (type == "piecewise") {
    const json& iv = r.raw("intervals");
    if (!iv.is_array()) config_error(r.at("intervals"), "expected an array");
    PiecewiseConstant p;
    json echo = json::array();
    for (std::size_t i = 0; i < iv.size(); ++i) {
      Reader e(iv[i], r.at("intervals") + "/" + std::to_string(i));
      const double left = e.need<double>("left");
      const double right = e.need<double>("right");
      p.intervals.push_back({left, right});
      p.heights.push_back(e.need<double>("height"));
      e.finish();
      echo.push_back(e.out);
    }
    r.out["intervals"] = echo;
    try {
      return PotentialSpec(std::move(p));
    } catch (const Error& err) {
      config_error(r.at("intervals"), err.what());
    }
  }
  if (type == "sampled") {
    const double lo = r.need<double>("x_min");
    const double hi = r.need<double>("x_max");
    auto values = r.need<std::vector<double>>("values");
    try {
      return PotentialSpec(SampledPotential{make_grid(lo, hi, values.size()), std::move(values)});
    } catch (const Error& err) {
      config_error(r.at("values"), err.what());
    }
  }
  config_error(r.at("type"), "unknown potential type '" + type + "'");
}

NonlocalCoupling parse_coupling(Reader& r) {
  const auto type = r.need<std::string>("type");
  if (type == "none") return NonlocalCoupling::none();
  const double lambda_re = r.get("lambda", 1.0);
  const cplx lambda(lambda_re, r.get("lambda_im", 0.0));
  if (type == "capacitor") {
    const double b = r.get("b", -1.0), c = r.get("c", 1.0);
    if (!(c > b)) config_error(r.at("c"), "must exceed b");
    return NonlocalCoupling::capacitor(lambda, b, c);
  }
  if (type == "general") {
    auto sub = [&](const std::string& key) {
      Reader s(r.raw(key), r.at(key));
      PotentialSpec v = parse_potential_reader(s);
      s.finish();
      r.out[key] = s.out;
      return v;
    };
    const PotentialSpec v1 = sub("v1"), v2 = sub("v2");
    const PotentialSpec v1i = r.has("v1_im") ? sub("v1_im") : PotentialSpec::zero();
    const PotentialSpec v2i = r.has("v2_im") ? sub("v2_im") : PotentialSpec::zero();
    return NonlocalCoupling(lambda, v1, v1i, v2, v2i);
  }
  config_error(r.at("type"), "unknown coupling type '" + type + "'");
}

ScatterConfig parse_scatter(Reader& r, ScatterConfig s, bool dt_required) {
  s.dt = dt_required ? r.need<double>("dt") : r.get("dt", s.dt);
  positive(s.dt, r.at("dt"));
  s.max_kinetic_phase = r.get("max_kinetic_phase", s.max_kinetic_phase);
  s.T = r.get("T", s.T);
  s.T_factor = r.get("T_factor", s.T_factor);
  s.T_min = r.get("T_min", s.T_min);
  s.T_max = r.get("T_max", s.T_max);
  s.matching_tol = r.get("matching_tol", s.matching_tol);
  s.max_refinements = r.get("max_refinements", s.max_refinements);
  s.epsilons = r.get("epsilons", s.epsilons);
  if (s.epsilons.size() < 2) config_error(r.at("epsilons"), "need at least two amplitudes");
  s.quartic_cutoff = r.get("quartic_cutoff", s.quartic_cutoff);
  s.quartic_T_max = r.get("quartic_T_max", s.quartic_T_max);
  return s;
}

}  // namespace

WaveFunction PacketBlock::make(GridPtr grid) const {
  return gaussian_packet(std::move(grid), x0, sigma, k0, norm);
}

std::vector<double> JostBlock::k_grid() const {
  if (log_spacing) return default_k_grid(n_k, k_min, k_max);
  std::vector<double> k(n_k);
  for (std::size_t i = 0; i < n_k; ++i)
    k[i] = n_k == 1 ? k_min
                    : k_min + (k_max - k_min) * static_cast<double>(i) / static_cast<double>(n_k - 1);
  return k;
}

PotentialSpec parse_potential(const json& j, const std::string& pointer) {
  Reader r(j, pointer);
  PotentialSpec v = parse_potential_reader(r);
  r.finish();
  return v;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  Reader top(j, "");
  json& echo = cfg.resolved;
  echo = json::object();

  if (top.has("grid")) {
    block(top, "grid", echo, [&](Reader& r) { cfg.grid = parse_grid(r, cfg.grid); });
  } else {
    echo["grid"] = {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}, {"n", cfg.grid.n}};
  }
  if (top.has("potential")) {
    block(top, "potential", echo, [&](Reader& r) { cfg.potential = parse_potential_reader(r); });
  } else {
    echo["potential"] = io::to_json(cfg.potential);
  }
  if (top.has("coupling")) {
    block(top, "coupling", echo, [&](Reader& r) { cfg.coupling = parse_coupling(r); });
  } else {
    echo["coupling"] = {{"type", "capacitor"}, {"lambda", 1.0}, {"lambda_im", 0.0},
                        {"b", -1.0}, {"c", 1.0}};
  }
  {
    Reader r(top.has("initial") ? top.raw("initial") : json::object(), "/initial");
    cfg.initial = parse_packet(r, cfg.initial);
    r.finish();
    echo["initial"] = r.out;
  }
  if (top.has("evolution")) {
    block(top, "evolution", echo, [&](Reader& r) {
      EvolutionConfig e;
      e.dt = r.need<double>("dt");
      positive(e.dt, r.at("dt"));
      e.t_final = r.need<double>("t_final");
      positive(e.t_final, r.at("t_final"));
      const auto method = r.get<std::string>("method", "split");
      if (method == "split") {
        e.method = Method::SplitStep;
      } else if (method == "crank_nicolson") {
        e.method = Method::CrankNicolson;
      } else {
        config_error(r.at("method"), "expected 'split' or 'crank_nicolson'");
      }
      e.snapshot_every = r.get("snapshot_every", e.snapshot_every);
      e.max_kinetic_phase = r.get("max_kinetic_phase", e.max_kinetic_phase);
      e.blowup_factor = r.get("blowup_factor", e.blowup_factor);
      if (r.has("absorbing")) {
        Reader a(r.raw("absorbing"), r.at("absorbing"));
        const double width = a.need<double>("width");
        e.absorbing = AbsorbingMask{width, a.need<double>("strength")};
        a.finish();
        r.out["absorbing"] = a.out;
      }
      cfg.evolution = e;
    });
  }
  {
    Reader r(top.has("picard") ? top.raw("picard") : json::object(), "/picard");
    auto& p = cfg.picard;
    p.T = r.get("T", p.T);
    positive(p.T, r.at("T"));
    p.norm = r.get("norm", p.norm);
    p.T_values = r.get("T_values", p.T_values);
    p.deltas = r.get("deltas", p.deltas);
    p.dt = r.get("dt", p.dt);
    p.horizon = r.get("horizon", p.horizon);
    p.iteration.n_time_nodes = r.get("n_time_nodes", p.iteration.n_time_nodes);
    p.iteration.min_time_nodes = r.get("min_time_nodes", p.iteration.min_time_nodes);
    p.iteration.max_iters = r.get("max_iters", p.iteration.max_iters);
    p.iteration.tol = r.get("tol", p.iteration.tol);
    p.iteration.substeps = r.get("substeps", p.iteration.substeps);
    r.finish();
    echo["picard"] = r.out;
  }
  {
    Reader r(top.has("jost") ? top.raw("jost") : json::object(), "/jost");
    auto& jb = cfg.jost;
    jb.n_k = r.get("n_k", jb.n_k);
    jb.k_min = r.get("k_min", jb.k_min);
    jb.k_max = r.get("k_max", jb.k_max);
    const auto spacing = r.get<std::string>("spacing", "log");
    if (spacing != "log" && spacing != "uniform")
      config_error(r.at("spacing"), "expected 'log' or 'uniform'");
    jb.log_spacing = spacing == "log";
    positive(jb.k_min, r.at("k_min"));
    if (!(jb.k_max > jb.k_min) || jb.n_k < 2) config_error(r.at("k_max"), "empty k range");
    r.finish();
    echo["jost"] = r.out;
  }
  if (top.has("scattering")) {
    block(top, "scattering", echo, [&](Reader& r) {
      ScatterBlock s;
      s.config = parse_scatter(r, s.config, true);
      s.slope_epsilons = r.get("slope_epsilons", s.slope_epsilons);
      if (r.has("probe")) {
        Reader p(r.raw("probe"), r.at("probe"));
        s.probe = parse_packet(p, PacketBlock{0.0, 2.0, 2.0, 1.0});
        p.finish();
        r.out["probe"] = p.out;
      }
      cfg.scattering = s;
    });
  }
  {
    Reader r(top.has("inversion") ? top.raw("inversion") : json::object(), "/inversion");
    auto& inv = cfg.inversion;
    if (r.has("x_grid")) {
      Reader g(r.raw("x_grid"), r.at("x_grid"));
      inv.x_grid = parse_grid(g, inv.x_grid);
      g.finish();
      r.out["x_grid"] = g.out;
    } else {
      r.out["x_grid"] = {{"x_min", inv.x_grid.x_min}, {"x_max", inv.x_grid.x_max},
                         {"n", inv.x_grid.n}};
    }
    inv.source = r.get<std::string>("source", inv.source);
    if (inv.source != "jost" && inv.source != "S")
      config_error(r.at("source"), "expected 'jost' or 'S'");
    inv.dk = r.get("dk", inv.dk);
    positive(inv.dk, r.at("dk"));
    auto& rc = inv.recon;
    rc.k_max = r.get("k_max", rc.k_max);
    rc.probe_k0 = r.get("probe_k0", rc.probe_k0);
    rc.probe_sigma = r.get("probe_sigma", rc.probe_sigma);
    rc.probe_offset = r.get("probe_offset", rc.probe_offset);
    rc.min_singular = r.get("min_singular", rc.min_singular);
    rc.kernel.taper_fraction = r.get("taper_fraction", rc.kernel.taper_fraction);
    rc.kernel.unitarity_tol = r.get("unitarity_tol", rc.kernel.unitarity_tol);
    rc.marchenko.condition_limit = r.get("condition_limit", rc.marchenko.condition_limit);
    rc.marchenko.residual_stride = r.get("residual_stride", rc.marchenko.residual_stride);
    r.finish();
    echo["inversion"] = r.out;
  }
  cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
  top.finish();
  if (cfg.scattering) cfg.inversion.recon.scatter = cfg.scattering->config;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorKind::Config, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace qcap
