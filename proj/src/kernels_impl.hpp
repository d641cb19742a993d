#pragma once
// Shared kernel body, instantiated once per lane backend.  Keep every
// floating-point expression in the same shape as Transport::step on the
// half-line so per-path outputs agree with the generic pipeline.

#include "bismut/detmath.hpp"
#include "bismut/kernels.hpp"

namespace bismut {

template <class L>
void run_halfline_batch(const HalflineParams& P, std::uint64_t first_path,
                        std::size_t count, HalflineRows& out,
                        std::size_t out_offset) {
  using F = typename L::F;
  const F zero = L::fbroadcast(0.0);
  const F one = L::fbroadcast(1.0);
  const F two = L::fbroadcast(2.0);
  const F thirty = L::fbroadcast(30.0);
  const F sqrtdt = L::fbroadcast(P.sqrt_dt);
  const F halfdt = L::fbroadcast(0.5 * P.dt);
  const F negk = L::fbroadcast(-P.kappa);
  const F npen = L::fbroadcast(P.n_penalty);
  const F mhalfn = L::fbroadcast(-0.5 * P.n_penalty);
  const F fK = L::fbroadcast(P.fK);
  const bool drift = P.kappa != 0.0;

  for (std::size_t base = 0; base < count; base += 4) {
    std::uint32_t plo[4], phi[4];
    for (int lane = 0; lane < 4; ++lane) {
      std::uint64_t id = first_path + base + lane;
      plo[lane] = static_cast<std::uint32_t>(id);
      phi[lane] = static_cast<std::uint32_t>(id >> 32);
    }
    typename L::U path_lo = L::uload(plo), path_hi = L::uload(phi);

    F x = L::fbroadcast(P.x0);
    F l = zero, alive = one, Y = zero;
    F I14 = zero, M = zero, Zint = zero, Ih = zero;

    for (int s = 0; s < P.nsteps; ++s) {
      F xi = normal_draw<L>(P.seed, path_lo, path_hi,
                            static_cast<std::uint32_t>(s), 0u);
      F dB = sqrtdt * xi;
      const F qKs = L::fbroadcast(P.qK[s]);
      const F hs = L::fbroadcast(P.h[s]);

      // left-point accumulations, same association as Transport::step
      F qlim = qKs * alive;
      I14 = I14 + L::fbroadcast(P.hp[s]) * (qlim * dB);
      Ih = Ih + hs * (qKs * dB);
      M = M + hs * (Y * dB);
      if (drift) {
        F zf = negk * x;
        Zint = Zint + L::fbroadcast(P.zc[s]) * (zf * dB);
      }
      Y = Y + hs * dB;

      // position update x' = x + dB + (dt/2) Z(x)
      F t1 = negk * x;
      F t2 = halfdt * t1;
      F stp = dB + t2;
      F xp = x + stp;
      auto hit = vlt(xp, zero);
      F dl = vselect(hit, zero - (two * xp), zero);
      x = vselect(hit, xp - two * xp, xp);
      l = l + dl;

      // Ric damping then boundary penalization, as the transport applies them
      Y = fK * Y;
      F fhit = exp_det<L>(mhalfn * dl);
      fhit = vselect(vgt(npen * dl, thirty), zero, fhit);
      Y = fhit * Y;
      alive = vselect(hit, zero, alive);
    }

    alignas(32) double buf[7][4];
    L::fstore(buf[0], x);
    L::fstore(buf[1], l);
    L::fstore(buf[2], alive);
    L::fstore(buf[3], I14);
    L::fstore(buf[4], M);
    L::fstore(buf[5], Zint);
    L::fstore(buf[6], Ih);
    std::size_t lanes = count - base < 4 ? count - base : 4;
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      std::size_t o = out_offset + base + lane;
      out.xT[o] = buf[0][lane];
      out.lT[o] = buf[1][lane];
      out.alive[o] = buf[2][lane];
      out.I14[o] = buf[3][lane];
      out.M[o] = buf[4][lane];
      out.Zint[o] = buf[5][lane];
      out.Ih[o] = buf[6][lane];
    }
  }
}

}  // namespace bismut
