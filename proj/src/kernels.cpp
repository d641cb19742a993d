#include "bismut/kernels.hpp"

#include "bismut/transport.hpp"

#include <cmath>
#include <stdexcept>

namespace bismut {

bool avx2_available() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

void halfline_fill_schedule(HalflineParams& p, double T, double dt_req,
                            const HSchedule* sched) {
  int n = T > 0 ? static_cast<int>(std::ceil(T / dt_req - 1e-9)) : 0;
  if (n < 1 && T > 0) n = 1;
  p.nsteps = n;
  p.dt = n > 0 ? T / n : 0.0;
  p.sqrt_dt = std::sqrt(p.dt);
  p.fK = std::exp(-0.5 * p.dt * p.kappa);
  p.h.assign(n, 0.0);
  p.zc.assign(n, 0.0);
  p.hp.assign(n, 0.0);
  p.qK.assign(n + 1, 1.0);
  p.Sh_det = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = i * p.dt;
    if (sched) {
      p.h[i] = sched->h(t);
      p.zc[i] = sched->htilde(t) * sched->h(t);
      if (sched->gradient_kind()) p.hp[i] = sched->hprime(t);
    }
    p.qK[i + 1] = p.qK[i] * p.fK;
    p.Sh_det += p.h[i] * p.h[i] * p.qK[i] * p.qK[i] * p.dt;
  }
}

void run_halfline(KernelBackend be, const HalflineParams& p,
                  std::uint64_t first_path, std::size_t count,
                  HalflineRows& out, std::size_t out_offset) {
  if (be == KernelBackend::Auto)
    be = avx2_available() ? KernelBackend::Avx2 : KernelBackend::Scalar;
  switch (be) {
    case KernelBackend::Scalar:
      run_halfline_scalar(p, first_path, count, out, out_offset);
      return;
    case KernelBackend::Avx2:
      if (!avx2_available()) throw std::runtime_error("avx2 not available");
      run_halfline_avx2(p, first_path, count, out, out_offset);
      return;
    default:
      throw std::logic_error("run_halfline: bad backend");
  }
}

}  // namespace bismut
