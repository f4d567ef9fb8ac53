#pragma once

#include <cstddef>
#include <functional>

namespace qcap {

/// Worker count used by the parallel maps below; 0 means hardware concurrency.
void set_workers(std::size_t n) noexcept;
std::size_t workers() noexcept;

/// Calls fn(i) for i in [0, n) on up to workers() threads. Each index is
/// visited exactly once; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qcap
