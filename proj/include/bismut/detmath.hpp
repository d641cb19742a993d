#pragma once
// Deterministic math: counter-based RNG (Philox4x32-10) and elementary
// functions written against the lane abstraction so every backend evaluates
// the exact same IEEE operation sequence.
//
// normal_icdf is the Acklam rational approximation (|rel err| < 1.2e-9),
// evaluated branch-free so all lanes follow one code path.

#include "bismut/lanes.hpp"

namespace bismut {

struct LanesOne {
  static constexpr int width = 1;
  using F = double;
  using U = U32x1;
  static F fbroadcast(double c) { return c; }
  static U ubroadcast(std::uint32_t c) { return {c}; }
  static void fstore(double* p, F x) { *p = x; }
};

// ------------------------------------------------------------- Philox ------

template <class L>
struct PhiloxCtr { typename L::U c0, c1, c2, c3; };

template <class L>
inline void philox4x32(typename L::U k0, typename L::U k1, PhiloxCtr<L>& c) {
  const auto M0 = L::ubroadcast(0xD2511F53u);
  const auto M1 = L::ubroadcast(0xCD9E8D57u);
  const auto W0 = L::ubroadcast(0x9E3779B9u);
  const auto W1 = L::ubroadcast(0xBB67AE85u);
  for (int r = 0; r < 10; ++r) {
    typename L::U h0, l0, h1, l1;
    mulhilo(M0, c.c0, h0, l0);
    mulhilo(M1, c.c2, h1, l1);
    typename L::U n0 = h1 ^ c.c1 ^ k0;
    typename L::U n1 = l1;
    typename L::U n2 = h0 ^ c.c3 ^ k1;
    typename L::U n3 = l0;
    c.c0 = n0; c.c1 = n1; c.c2 = n2; c.c3 = n3;
    k0 = k0 + W0;
    k1 = k1 + W1;
  }
}

// ------------------------------------------------------ exp, log, icdf -----

template <class L>
inline typename L::F exp_det(typename L::F x) {
  using F = typename L::F;
  const F log2e = L::fbroadcast(1.4426950408889634074);
  const F ln2_hi = L::fbroadcast(0.6931471805598903);     // split of ln 2
  const F ln2_lo = L::fbroadcast(5.497923018708371e-14);
  F k = vround(x * log2e);
  k = vmax(k, L::fbroadcast(-1000.0));
  k = vmin(k, L::fbroadcast(1000.0));
  F r = (x - k * ln2_hi) - k * ln2_lo;
  // degree-11 Taylor of e^r on |r| <= ln2/2
  F p = L::fbroadcast(1.0 / 39916800.0);
  p = p * r + L::fbroadcast(1.0 / 3628800.0);
  p = p * r + L::fbroadcast(1.0 / 362880.0);
  p = p * r + L::fbroadcast(1.0 / 40320.0);
  p = p * r + L::fbroadcast(1.0 / 5040.0);
  p = p * r + L::fbroadcast(1.0 / 720.0);
  p = p * r + L::fbroadcast(1.0 / 120.0);
  p = p * r + L::fbroadcast(1.0 / 24.0);
  p = p * r + L::fbroadcast(1.0 / 6.0);
  p = p * r + L::fbroadcast(0.5);
  p = p * r + L::fbroadcast(1.0);
  p = p * r + L::fbroadcast(1.0);
  F res = p * vpow2i(k);
  res = vselect(vlt(x, L::fbroadcast(-690.0)), L::fbroadcast(0.0), res);
  return res;
}

template <class L>
inline typename L::F log_det(typename L::F x) {
  using F = typename L::F;
  F e;
  F m = vmantexp(x, e);  // x = m * 2^e, m in [0.75, 1.5)
  F t = (m - L::fbroadcast(1.0)) / (m + L::fbroadcast(1.0));
  F t2 = t * t;
  F p = L::fbroadcast(2.0 / 15.0);
  p = p * t2 + L::fbroadcast(2.0 / 13.0);
  p = p * t2 + L::fbroadcast(2.0 / 11.0);
  p = p * t2 + L::fbroadcast(2.0 / 9.0);
  p = p * t2 + L::fbroadcast(2.0 / 7.0);
  p = p * t2 + L::fbroadcast(2.0 / 5.0);
  p = p * t2 + L::fbroadcast(2.0 / 3.0);
  p = p * t2 + L::fbroadcast(2.0);
  return p * t + e * L::fbroadcast(0.69314718055994530942);
}

template <class L>
inline typename L::F normal_icdf(typename L::F p) {
  using F = typename L::F;
  const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                       -2.759285104469687e+02, 1.383577518672690e+02,
                       -3.066479806614716e+01, 2.506628277459239e+00};
  const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                       -1.556989798598866e+02, 6.680131188771972e+01,
                       -1.328068155288572e+01};
  const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                       -2.400758277161838e+00, -2.549732539343734e+00,
                       4.374664141464968e+00,  2.938163982698783e+00};
  const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                       2.445134137142996e+00, 3.754408661907416e+00};
  const F one = L::fbroadcast(1.0);

  // central region
  F q = p - L::fbroadcast(0.5);
  F r = q * q;
  F num = L::fbroadcast(A[0]);
  for (int i = 1; i < 6; ++i) num = num * r + L::fbroadcast(A[i]);
  F den = L::fbroadcast(B[0]);
  for (int i = 1; i < 5; ++i) den = den * r + L::fbroadcast(B[i]);
  den = den * r + one;
  F xc = q * num / den;

  auto tail = [&](F pp) {
    F s = vsqrt(L::fbroadcast(-2.0) * log_det<L>(pp));
    F n2 = L::fbroadcast(C[0]);
    for (int i = 1; i < 6; ++i) n2 = n2 * s + L::fbroadcast(C[i]);
    F d2 = L::fbroadcast(D[0]);
    for (int i = 1; i < 4; ++i) d2 = d2 * s + L::fbroadcast(D[i]);
    d2 = d2 * s + one;
    return n2 / d2;
  };
  const F plow = L::fbroadcast(0.02425);
  // clamp tail arguments so the unused branch stays finite
  F xl = tail(vmax(p, L::fbroadcast(1e-300)));
  F xh = -tail(vmax(one - p, L::fbroadcast(1e-300)));

  F res = vselect(vlt(p, plow), xl, xc);
  res = vselect(vgt(p, one - plow), xh, res);
  return res;
}

// standard normal draw for (seed, path, step, idx); one philox call per draw
template <class L>
inline typename L::F normal_draw(std::uint64_t seed, typename L::U path_lo,
                                 typename L::U path_hi, std::uint32_t step,
                                 std::uint32_t idx) {
  PhiloxCtr<L> c{path_lo, path_hi, L::ubroadcast(step), L::ubroadcast(idx)};
  philox4x32<L>(L::ubroadcast(static_cast<std::uint32_t>(seed)),
                L::ubroadcast(static_cast<std::uint32_t>(seed >> 32)), c);
  auto u = to_u64(c.c0, c.c1);
  return normal_icdf<L>(vuniform(u));
}

inline double normal_scalar(std::uint64_t seed, std::uint64_t path,
                            std::uint32_t step, std::uint32_t idx) {
  return normal_draw<LanesOne>(seed, {static_cast<std::uint32_t>(path)},
                               {static_cast<std::uint32_t>(path >> 32)}, step, idx);
}

}  // namespace bismut
