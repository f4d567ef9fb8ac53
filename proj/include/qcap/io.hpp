#pragma once

// Serialization: JSON specs, CSV tables, binary state snapshots, SHA-256 and
// run manifests.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcap/conserve.hpp"
#include "qcap/evolve.hpp"
#include "qcap/invert.hpp"
#include "qcap/jost.hpp"

namespace qcap::io {

using json = nlohmann::ordered_json;

json to_json(const PotentialSpec& v);
json to_json(const NonlocalCoupling& c);

/// Hex SHA-256 of a byte string or of a file's contents.
std::string sha256(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest round-trip formatting, identical on every run.
std::string format_double(double v);

void write_wavefunction_csv(std::ostream& os, const WaveFunction& u);
void write_diagnostics_csv(std::ostream& os, const Trajectory& traj);
void write_conservation_csv(std::ostream& os, const ConservationReport& r);
void write_reconstruction_csv(std::ostream& os, const ReconstructionResult& r);
/// Same columns as jost::write_csv but with round-trip formatting.
void write_scattering_csv(std::ostream& os, const ScatteringData& sd);

/// Raw little-endian snapshot: 8-byte magic, u64 n, f64 x_min, dx, t, then n
/// interleaved (re, im) f64 pairs.
void write_snapshot(const std::filesystem::path& path, const WaveFunction& u);
WaveFunction read_snapshot(const std::filesystem::path& path);

/// Files written by one run, hashed into manifest.json.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  /// Writes `content` to dir/name and records it.
  std::filesystem::path write_text(const std::string& name, const std::string& content);
  /// Records a file already written below dir.
  void add(const std::filesystem::path& path);

  /// manifest.json with the subcommand, resolved config and artifact hashes.
  std::filesystem::path finish(const std::string& subcommand, const json& resolved_config) const;

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

/// gnuplot script plotting expressions ("2", "($2**2+$3**2)") of a CSV
/// against its first column.
std::string gnuplot_script(const std::string& csv_name, const std::string& title,
                           const std::vector<std::pair<std::string, std::string>>& columns,
                           bool log_y = false, bool log_x = false);

}  // namespace qcap::io
