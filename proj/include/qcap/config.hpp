#pragma once

// Experiment configuration: strict JSON parsing (unknown keys rejected, errors
// carry the JSON pointer of the offending key) and the resolved echo written to
// manifests.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcap/evolve.hpp"
#include "qcap/invert.hpp"
#include "qcap/io.hpp"
#include "qcap/scatter.hpp"

namespace qcap {

struct GridBlock {
  double x_min = -40.0;
  double x_max = 40.0;
  std::size_t n = 2048;

  GridPtr make() const { return make_grid(x_min, x_max, n); }
};

/// Gaussian packet used as initial state or probe.
struct PacketBlock {
  double x0 = 0.0;
  double sigma = 1.0;
  double k0 = 2.0;
  double norm = 1.0;

  WaveFunction make(GridPtr grid) const;
};

struct PicardBlock {
  double T = 0.2;
  /// Initial datum rescaled to this norm.
  double norm = 0.5;
  PicardConfig iteration;
  /// T values for the contraction table; the first is the reference.
  std::vector<double> T_values{0.2, 0.1, 0.05};
  /// Perturbation sizes for the continuous-dependence table.
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  /// Evolution used for the continuous-dependence runs.
  double dt = 1e-3;
  double horizon = 1.0;
};

struct JostBlock {
  std::size_t n_k = 256;
  double k_min = 0.05;
  double k_max = 40.0;
  bool log_spacing = true;

  std::vector<double> k_grid() const;
};

struct ScatterBlock {
  ScatterConfig config;
  /// Probe for scattering and lambda recovery; defaults to default_probe.
  std::optional<PacketBlock> probe;
  /// Amplitudes for the small-amplitude slope fit.
  std::vector<double> slope_epsilons{0.02, 0.05, 0.1, 0.2};
};

struct InversionBlock {
  GridBlock x_grid{-4.0, 4.0, 512};
  /// Reflection data source for `invert`: "jost" (direct, uniform k) or "S" (probes).
  std::string source = "jost";
  double dk = 0.005;
  ReconstructConfig recon;
};

struct ExperimentConfig {
  GridBlock grid;
  PotentialSpec potential = PotentialSpec::double_barrier(2, 2, -2, -1, 1, 2);
  NonlocalCoupling coupling = NonlocalCoupling::capacitor(1.0, -1.0, 1.0);
  PacketBlock initial;
  std::optional<EvolutionConfig> evolution;
  PicardBlock picard;
  JostBlock jost;
  std::optional<ScatterBlock> scattering;
  InversionBlock inversion;
  std::uint64_t seed = 0;

  /// Every setting, defaults included.
  io::json resolved;
};

/// Config errors throw Error(ErrorKind::Config) naming the JSON pointer.
ExperimentConfig parse_config(const io::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

PotentialSpec parse_potential(const io::json& j, const std::string& pointer = "");

}  // namespace qcap
