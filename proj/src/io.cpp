#include "qcap/io.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

namespace qcap::io {

namespace fs = std::filesystem;

json to_json(const PotentialSpec& v) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          if (p.intervals.empty()) return json{{"type", "zero"}};
          json iv = json::array();
          for (std::size_t i = 0; i < p.intervals.size(); ++i)
            iv.push_back({{"left", p.intervals[i].left},
                          {"right", p.intervals[i].right},
                          {"height", p.heights[i]}});
          return json{{"type", "piecewise"}, {"intervals", iv}};
        } else if constexpr (std::is_same_v<T, SampledPotential>) {
          return json{{"type", "sampled"},
                      {"x_min", p.grid->x_min()},
                      {"x_max", p.grid->x_max()},
                      {"values", p.values}};
        } else {
          return json{{"type", "double_barrier"}, {"beta1", p.beta1}, {"beta2", p.beta2},
                      {"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}};
        }
      },
      v.variant());
}

json to_json(const NonlocalCoupling& c) {
  json j{{"lambda_re", c.lambda().real()}, {"lambda_im", c.lambda().imag()}};
  j["v1"] = to_json(c.v1_re());
  j["v2"] = to_json(c.v2_re());
  if (!c.v1_real()) j["v1_im"] = to_json(c.v1_im());
  if (!c.v2_real()) j["v2_im"] = to_json(c.v2_im());
  return j;
}

// ---------------------------------------------------------------------------

namespace {

std::string hex(const unsigned char* d, unsigned n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(2 * n, '0');
  for (unsigned i = 0; i < n; ++i) {
    s[2 * i] = digits[d[i] >> 4];
    s[2 * i + 1] = digits[d[i] & 0xf];
  }
  return s;
}

struct Digest {
  EVP_MD_CTX* ctx;
  Digest() : ctx(EVP_MD_CTX_new()) {
    require(ctx && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1, ErrorKind::InvalidArgument,
            "sha256 unavailable");
  }
  ~Digest() { EVP_MD_CTX_free(ctx); }
  void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx, p, n); }
  std::string done() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    return hex(md, len);
  }
};

}  // namespace

std::string sha256(std::string_view bytes) {
  Digest d;
  d.update(bytes.data(), bytes.size());
  return d.done();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::InvalidArgument, "cannot read " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.done();
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

// ---------------------------------------------------------------------------

namespace {

template <class... T>
void row(std::ostream& os, T... v) {
  bool first = true;
  ((os << (first ? "" : ",") << format_double(static_cast<double>(v)), first = false), ...);
  os << '\n';
}

}  // namespace

void write_wavefunction_csv(std::ostream& os, const WaveFunction& u) {
  os << "x,re,im,abs2\n";
  for (std::size_t j = 0; j < u.size(); ++j)
    row(os, u.grid->x(j), u.values[j].real(), u.values[j].imag(), std::norm(u.values[j]));
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,norm,energy,charge\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& d = traj.diagnostics[i];
    row(os, traj.times[i], d.norm, d.energy, d.charge);
  }
}

void write_conservation_csv(std::ostream& os, const ConservationReport& r) {
  os << "t,norm_drift,energy_drift\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    row(os, r.times[i], r.norm_drift[i], r.energy_drift[i]);
}

void write_reconstruction_csv(std::ostream& os, const ReconstructionResult& r) {
  os << "x,v0_hat,k_diag\n";
  for (std::size_t p = 0; p < r.v0_hat.size(); ++p) row(os, r.x_grid->x(p), r.v0_hat[p], r.k_diag[p]);
}

void write_scattering_csv(std::ostream& os, const ScatteringData& sd) {
  os << "k,re_t,im_t,re_rl,im_rl,re_rr,im_rr\n";
  for (std::size_t j = 0; j < sd.size(); ++j)
    row(os, sd.k[j], sd.t[j].real(), sd.t[j].imag(), sd.r_left[j].real(), sd.r_left[j].imag(),
        sd.r_right[j].real(), sd.r_right[j].imag());
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'Q', 'C', 'A', 'P', 'W', 'F', '2', '\0'};
}

void write_snapshot(const fs::path& path, const WaveFunction& u) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InvalidArgument, "cannot write " + path.string());
  const std::uint64_t n = u.size();
  const double head[3] = {u.grid->x_min(), u.grid->dx(), u.t};
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(head), sizeof head);
  out.write(reinterpret_cast<const char*>(u.values.data()),
            static_cast<std::streamsize>(n * sizeof(cplx)));
  require(out.good(), ErrorKind::InvalidArgument, "short write to " + path.string());
}

WaveFunction read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::InvalidArgument, "cannot read " + path.string());
  char magic[8];
  std::uint64_t n = 0;
  double head[3];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(head), sizeof head);
  require(in.good() && std::memcmp(magic, kMagic, sizeof magic) == 0, ErrorKind::InvalidArgument,
          path.string() + " is not a snapshot");
  std::vector<cplx> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(cplx)));
  require(in.good(), ErrorKind::InvalidArgument, "truncated snapshot " + path.string());
  return WaveFunction(make_grid(head[0], head[0] + static_cast<double>(n) * head[1], n),
                      std::move(v), head[2]);
}

// ---------------------------------------------------------------------------

Manifest::Manifest(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path Manifest::write_text(const std::string& name, const std::string& content) {
  const fs::path p = dir_ / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  require(out.good(), ErrorKind::InvalidArgument, "cannot write " + p.string());
  out.close();
  files_.push_back(p);
  return p;
}

void Manifest::add(const fs::path& path) { files_.push_back(path); }

fs::path Manifest::finish(const std::string& subcommand, const json& resolved_config) const {
  json art = json::array();
  for (const auto& f : files_) {
    art.push_back({{"path", fs::relative(f, dir_).generic_string()},
                   {"bytes", fs::file_size(f)},
                   {"sha256", sha256_file(f)}});
  }
  json m{{"tool", "qcap"}, {"subcommand", subcommand}, {"config", resolved_config},
         {"artifacts", art}};
  const fs::path p = dir_ / "manifest.json";
  std::ofstream out(p, std::ios::binary);
  out << m.dump(2) << '\n';
  require(out.good(), ErrorKind::InvalidArgument, "cannot write " + p.string());
  return p;
}

std::string gnuplot_script(const std::string& csv_name, const std::string& title,
                           const std::vector<std::pair<std::string, std::string>>& columns,
                           bool log_y, bool log_x) {
  std::ostringstream os;
  const std::string stem = csv_name.substr(0, csv_name.rfind('.'));
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << stem << ".png'\n"
     << "set title '" << title << "'\n";
  if (log_y) os << "set logscale y\n";
  if (log_x) os << "set logscale x\n";
  os << "plot ";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << (i ? ", \\\n     " : "") << "'" << csv_name << "' using 1:" << columns[i].first
       << " with lines title '" << columns[i].second << "'";
  }
  os << '\n';
  return os.str();
}

}  // namespace qcap::io
