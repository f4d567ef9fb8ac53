#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace qcap {

using cplx = std::complex<double>;

/// In-place complex DFT of a fixed length backed by FFTW.
///
/// forward() computes c_j = sum_i a_i exp(-2 pi i ij/n); backward() is the exact
/// inverse (it carries the 1/n). Plans are shared between instances of the same
/// length and executed with the new-array interface, so one Fft can be used from
/// several threads at once.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;

 private:
  struct Plans;
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace qcap
