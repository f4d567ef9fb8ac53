#include "qcap/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "qcap/errors.hpp"

namespace qcap {

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {

// The planner is not thread safe; creation goes through this lock and the
// resulting plans are cached per length for the lifetime of the process.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  require(n > 0, ErrorKind::InvalidArgument, "FFT length must be positive");
  static std::map<std::size_t, std::shared_ptr<const Plans>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) {
    plans_ = it->second;
    return;
  }
  std::vector<cplx> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  auto plans = std::make_shared<Plans>();
  const int len = static_cast<int>(n);
  plans->fwd = fftw_plan_dft_1d(len, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans->bwd = fftw_plan_dft_1d(len, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(plans->fwd && plans->bwd, ErrorKind::InvalidArgument, "FFTW planning failed");
  cache.emplace(n, plans);
  plans_ = std::move(plans);
}

void Fft::forward(std::span<cplx> data) const {
  require(data.size() == n_, ErrorKind::InvalidArgument, "FFT length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, p, p);
}

void Fft::backward(std::span<cplx> data) const {
  require(data.size() == n_, ErrorKind::InvalidArgument, "FFT length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, p, p);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

}  // namespace qcap
