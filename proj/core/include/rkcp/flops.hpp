#pragma once

#include <array>
#include <cstdint>

namespace rkcp {

/// Cost attribution buckets for one solve.
enum class Phase { Setup = 0, Mvp = 1, Precond = 2, Iteration = 3 };

/// Exact multiply-add accounting. Counts the fused multiply-add pairs of the
/// reference sequential algorithms (gemm, dot, axpy, elementwise kernels,
/// triangular solves); loads, stores and per-iteration scalar bookkeeping
/// (step-size quotients) are not counted. Counts are pure functions of the
/// instance sizes, never of runtime values, so repeated runs match exactly.
class FlopCounter {
public:
  void add(Phase phase, std::uint64_t madds) {
    madds_[static_cast<std::size_t>(phase)] += madds;
  }

  std::uint64_t phase(Phase p) const { return madds_[static_cast<std::size_t>(p)]; }
  std::uint64_t setup() const { return phase(Phase::Setup); }

  /// Everything charged inside the iteration loop: MVPs, preconditioner
  /// applies, and the PCG vector updates.
  std::uint64_t iteration_total() const {
    return phase(Phase::Mvp) + phase(Phase::Precond) + phase(Phase::Iteration);
  }

  std::uint64_t total() const { return setup() + iteration_total(); }

private:
  std::array<std::uint64_t, 4> madds_{};
};

}  // namespace rkcp
