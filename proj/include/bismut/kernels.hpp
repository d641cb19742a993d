#pragma once
// Batched half-line kernels: the d = 1 reflecting diffusion with optional
// OU drift Z = -kappa x, stepped four paths at a time.  One scalar reference
// backend and one AVX2 backend, selected at runtime; both run the identical
// IEEE operation sequence (see lanes.hpp) and give bit-identical outputs.
//
// The per-path outputs are exactly the left-point sums accumulated by the
// generic Transport pipeline, so estimator assembly is backend-agnostic.

#include <cstdint>
#include <vector>

namespace bismut {

struct HalflineParams {
  double x0 = 0.5;
  double dt = 1e-3;
  double sqrt_dt = 0;
  int nsteps = 0;
  double kappa = 0;
  double n_penalty = 1;
  std::uint64_t seed = 0;
  std::vector<double> h, zc, hp;  // per-step left values; zc = htilde*h
  std::vector<double> qK;         // deterministic damping prefix, size nsteps+1
  double fK = 1.0;                // exp(-kappa*dt/2), one step
  double Sh_det = 0;              // sum h^2 qK^2 dt (path-independent)
};

struct HalflineRows {
  std::vector<double> xT, lT, alive, I14, M, Zint, Ih;
  void resize(std::size_t n) {
    xT.resize(n); lT.resize(n); alive.resize(n); I14.resize(n);
    M.resize(n); Zint.resize(n); Ih.resize(n);
  }
};

void halfline_fill_schedule(HalflineParams& p, double T, double dt_req,
                            const struct HSchedule* sched);

enum class KernelBackend { Auto, Scalar, Avx2, Generic };

bool avx2_available();

// runs paths [first_path, first_path+count), writing rows [out_offset, ...)
void run_halfline_scalar(const HalflineParams& p, std::uint64_t first_path,
                         std::size_t count, HalflineRows& out, std::size_t out_offset);
void run_halfline_avx2(const HalflineParams& p, std::uint64_t first_path,
                       std::size_t count, HalflineRows& out, std::size_t out_offset);
void run_halfline(KernelBackend be, const HalflineParams& p, std::uint64_t first_path,
                  std::size_t count, HalflineRows& out, std::size_t out_offset);

}  // namespace bismut
