#pragma once
// Lane abstractions: the same numeric kernels are instantiated for plain
// double, a 4-wide scalar pack, and a 4-wide AVX2 pack.  All operations are
// plain IEEE add/sub/mul/div/sqrt applied in identical order, so the three
// instantiations produce bit-identical results lane for lane.

#include <cstdint>
#include <cstring>
#include <cmath>

#ifdef __AVX2__
#include <immintrin.h>
#endif

namespace bismut {

// ---------------------------------------------------------------- scalar ---

inline double vbroadcast_d(double c) { return c; }
inline double vsqrt(double x) { return std::sqrt(x); }
inline double vround(double x) { return std::nearbyint(x); }  // default: to-nearest-even
inline double vmax(double a, double b) { return a > b ? a : b; }
inline double vmin(double a, double b) { return a < b ? a : b; }
inline bool vlt(double a, double b) { return a < b; }
inline bool vgt(double a, double b) { return a > b; }
inline double vselect(bool m, double a, double b) { return m ? a : b; }
inline bool mask_or(bool a, bool b) { return a || b; }
inline bool mask_none(bool m) { return !m; }

inline std::uint64_t dbits(double x) { std::uint64_t u; std::memcpy(&u, &x, 8); return u; }
inline double bitsd(std::uint64_t u) { double x; std::memcpy(&x, &u, 8); return x; }

// 2^k for k integral-valued in [-1000, 1023]
inline double vpow2i(double k) { return bitsd(static_cast<std::uint64_t>(static_cast<std::int64_t>(k) + 1023) << 52); }

// split x into m in [0.75, 1.5) and integer exponent e with x = m * 2^e
inline double vmantexp(double x, double& e) {
  std::uint64_t u = dbits(x);
  std::int64_t er = static_cast<std::int64_t>(u >> 52) - 1023;
  double m = bitsd((u & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
  if (m > 1.5) { m *= 0.5; er += 1; }
  e = static_cast<double>(er);
  return m;
}

// uniform in (0,1) from 64 random bits, exact arithmetic
inline double vuniform(std::uint64_t u) {
  std::uint64_t v = u >> 12;
  double d = bitsd(v | 0x4330000000000000ULL) - 4503599627370496.0;  // exact double(v)
  return (d + 0.5) * 0x1p-52;
}

struct U32x1 { std::uint32_t v; };
inline U32x1 ubroadcast1(std::uint32_t c) { return {c}; }
inline U32x1 operator^(U32x1 a, U32x1 b) { return {a.v ^ b.v}; }
inline U32x1 operator+(U32x1 a, U32x1 b) { return {a.v + b.v}; }
inline void mulhilo(U32x1 a, U32x1 b, U32x1& hi, U32x1& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a.v) * b.v;
  hi.v = static_cast<std::uint32_t>(p >> 32);
  lo.v = static_cast<std::uint32_t>(p);
}
inline std::uint64_t to_u64(U32x1 hi, U32x1 lo) {
  return (static_cast<std::uint64_t>(hi.v) << 32) | lo.v;
}

// ------------------------------------------------------- 4-wide scalar -----

struct DP4 { double v[4]; };
struct MP4 { bool m[4]; };
struct UP4 { std::uint32_t v[4]; };
struct ULP4 { std::uint64_t v[4]; };

inline DP4 operator+(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] + b.v[i]; return r; }
inline DP4 operator-(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] - b.v[i]; return r; }
inline DP4 operator*(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] * b.v[i]; return r; }
inline DP4 operator/(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] / b.v[i]; return r; }
inline DP4 operator-(DP4 a) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = -a.v[i]; return r; }
inline DP4 vsqrt(DP4 a) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = std::sqrt(a.v[i]); return r; }
inline DP4 vround(DP4 a) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = std::nearbyint(a.v[i]); return r; }
inline DP4 vmax(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = vmax(a.v[i], b.v[i]); return r; }
inline DP4 vmin(DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = vmin(a.v[i], b.v[i]); return r; }
inline MP4 vlt(DP4 a, DP4 b) { MP4 r; for (int i = 0; i < 4; ++i) r.m[i] = a.v[i] < b.v[i]; return r; }
inline MP4 vgt(DP4 a, DP4 b) { MP4 r; for (int i = 0; i < 4; ++i) r.m[i] = a.v[i] > b.v[i]; return r; }
inline DP4 vselect(MP4 m, DP4 a, DP4 b) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = m.m[i] ? a.v[i] : b.v[i]; return r; }
inline MP4 mask_or(MP4 a, MP4 b) { MP4 r; for (int i = 0; i < 4; ++i) r.m[i] = a.m[i] || b.m[i]; return r; }
inline bool mask_none(MP4 m) { return !(m.m[0] || m.m[1] || m.m[2] || m.m[3]); }

inline DP4 vpow2i(DP4 k) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = vpow2i(k.v[i]); return r; }
inline DP4 vmantexp(DP4 x, DP4& e) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = vmantexp(x.v[i], e.v[i]); return r; }
inline DP4 vuniform(ULP4 u) { DP4 r; for (int i = 0; i < 4; ++i) r.v[i] = vuniform(u.v[i]); return r; }

inline UP4 operator^(UP4 a, UP4 b) { UP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] ^ b.v[i]; return r; }
inline UP4 operator+(UP4 a, UP4 b) { UP4 r; for (int i = 0; i < 4; ++i) r.v[i] = a.v[i] + b.v[i]; return r; }
inline void mulhilo(UP4 a, UP4 b, UP4& hi, UP4& lo) {
  for (int i = 0; i < 4; ++i) {
    std::uint64_t p = static_cast<std::uint64_t>(a.v[i]) * b.v[i];
    hi.v[i] = static_cast<std::uint32_t>(p >> 32);
    lo.v[i] = static_cast<std::uint32_t>(p);
  }
}
inline ULP4 to_u64(UP4 hi, UP4 lo) {
  ULP4 r; for (int i = 0; i < 4; ++i) r.v[i] = (static_cast<std::uint64_t>(hi.v[i]) << 32) | lo.v[i]; return r;
}

struct LanesScalar {
  static constexpr int width = 4;
  using F = DP4;
  using U = UP4;
  static F fbroadcast(double c) { F r; for (int i = 0; i < 4; ++i) r.v[i] = c; return r; }
  static U ubroadcast(std::uint32_t c) { U r; for (int i = 0; i < 4; ++i) r.v[i] = c; return r; }
  static U uload(const std::uint32_t* p) { U r; for (int i = 0; i < 4; ++i) r.v[i] = p[i]; return r; }
  static void fstore(double* p, F x) { for (int i = 0; i < 4; ++i) p[i] = x.v[i]; }
  static F fload(const double* p) { F r; for (int i = 0; i < 4; ++i) r.v[i] = p[i]; return r; }
};

// ---------------------------------------------------------------- AVX2 -----

#ifdef __AVX2__

struct DA4 { __m256d v; };
struct MA4 { __m256d m; };
struct UA4 { __m128i v; };
struct ULA4 { __m256i v; };

inline DA4 operator+(DA4 a, DA4 b) { return {_mm256_add_pd(a.v, b.v)}; }
inline DA4 operator-(DA4 a, DA4 b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline DA4 operator*(DA4 a, DA4 b) { return {_mm256_mul_pd(a.v, b.v)}; }
inline DA4 operator/(DA4 a, DA4 b) { return {_mm256_div_pd(a.v, b.v)}; }
inline DA4 operator-(DA4 a) { return {_mm256_sub_pd(_mm256_setzero_pd(), a.v)}; }
inline DA4 vsqrt(DA4 a) { return {_mm256_sqrt_pd(a.v)}; }
inline DA4 vround(DA4 a) { return {_mm256_round_pd(a.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)}; }
inline DA4 vmax(DA4 a, DA4 b) { return {_mm256_max_pd(b.v, a.v)}; }
inline DA4 vmin(DA4 a, DA4 b) { return {_mm256_min_pd(b.v, a.v)}; }
inline MA4 vlt(DA4 a, DA4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
inline MA4 vgt(DA4 a, DA4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
inline DA4 vselect(MA4 m, DA4 a, DA4 b) { return {_mm256_blendv_pd(b.v, a.v, m.m)}; }
inline MA4 mask_or(MA4 a, MA4 b) { return {_mm256_or_pd(a.m, b.m)}; }
inline bool mask_none(MA4 m) { return _mm256_movemask_pd(m.m) == 0; }

inline DA4 vpow2i(DA4 k) {
  // k integral-valued, in [-1000, 1023]
  __m256d biased = _mm256_add_pd(k.v, _mm256_set1_pd(1023.0));
  // biased in [23, 2046]; convert exactly via the 2^52 trick then shift
  __m256d shifted = _mm256_add_pd(biased, _mm256_set1_pd(4503599627370496.0));
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(shifted), _mm256_set1_epi64x(0x4330000000000000LL));
  return {_mm256_castsi256_pd(_mm256_slli_epi64(bits, 52))};
}
inline DA4 vmantexp(DA4 x, DA4& e) {
  __m256i u = _mm256_castpd_si256(x.v);
  __m256i er = _mm256_sub_epi64(_mm256_srli_epi64(u, 52), _mm256_set1_epi64x(1023));
  // er in small range: convert i64->double via 2^52 trick (values >= -1023)
  __m256i ebits = _mm256_add_epi64(er, _mm256_set1_epi64x(0x4330000000000000LL + 4096));
  __m256d ed = _mm256_sub_pd(_mm256_castsi256_pd(ebits), _mm256_set1_pd(4503599627370496.0 + 4096.0));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_and_si256(u, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3ff0000000000000LL)));
  __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.5), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  ed = _mm256_blendv_pd(ed, _mm256_add_pd(ed, _mm256_set1_pd(1.0)), big);
  e.v = ed;
  return {m};
}
inline DA4 vuniform(ULA4 u) {
  __m256i v = _mm256_srli_epi64(u.v, 12);
  __m256d d = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(v, _mm256_set1_epi64x(0x4330000000000000LL))),
      _mm256_set1_pd(4503599627370496.0));
  return {_mm256_mul_pd(_mm256_add_pd(d, _mm256_set1_pd(0.5)), _mm256_set1_pd(0x1p-52))};
}

inline UA4 operator^(UA4 a, UA4 b) { return {_mm_xor_si128(a.v, b.v)}; }
inline UA4 operator+(UA4 a, UA4 b) { return {_mm_add_epi32(a.v, b.v)}; }
inline void mulhilo(UA4 a, UA4 b, UA4& hi, UA4& lo) {
  __m128i pe = _mm_mul_epu32(a.v, b.v);  // lanes 0,2 -> qwords 0,1
  __m128i po = _mm_mul_epu32(_mm_srli_epi64(a.v, 32), _mm_srli_epi64(b.v, 32));  // lanes 1,3
  __m128i l = _mm_castps_si128(_mm_shuffle_ps(_mm_castsi128_ps(pe), _mm_castsi128_ps(po), _MM_SHUFFLE(2, 0, 2, 0)));
  __m128i h = _mm_castps_si128(_mm_shuffle_ps(_mm_castsi128_ps(pe), _mm_castsi128_ps(po), _MM_SHUFFLE(3, 1, 3, 1)));
  lo.v = _mm_shuffle_epi32(l, _MM_SHUFFLE(3, 1, 2, 0));
  hi.v = _mm_shuffle_epi32(h, _MM_SHUFFLE(3, 1, 2, 0));
}
inline ULA4 to_u64(UA4 hi, UA4 lo) {
  __m256i h = _mm256_cvtepu32_epi64(hi.v);
  __m256i l = _mm256_cvtepu32_epi64(lo.v);
  return {_mm256_or_si256(_mm256_slli_epi64(h, 32), l)};
}

struct LanesAvx2 {
  static constexpr int width = 4;
  using F = DA4;
  using U = UA4;
  static F fbroadcast(double c) { return {_mm256_set1_pd(c)}; }
  static U ubroadcast(std::uint32_t c) { return {_mm_set1_epi32(static_cast<int>(c))}; }
  static U uload(const std::uint32_t* p) { return {_mm_loadu_si128(reinterpret_cast<const __m128i*>(p))}; }
  static void fstore(double* p, F x) { _mm256_storeu_pd(p, x.v); }
  static F fload(const double* p) { return {_mm256_loadu_pd(p)}; }
};

#endif  // __AVX2__

}  // namespace bismut
