#pragma once
// Monte Carlo estimators for the Bismut-type representations:
//   grad13: dP_Tf(Q_T v) via grad f at the endpoint
//   grad14: f(X_T) * int h'(s) <Q_s v, dB>        (ramp schedule)
//   lpf:    2 E[f(X_T) (M_T + int htilde h <Z, dB>)]
//   hess:   E[f(X_T) (-int h<W,dB> + (int h<Qt v,dB>)^2 - int |h Qt v|^2 ds)]
//   hessgrad: E[-df(Qt_T v) int h<Qt v,dB> + df(W_T)]
//
// Reductions run over fixed 4096-path blocks merged in block order, so the
// result is independent of the thread count.  Half-line runs use the batched
// kernels unless the generic pipeline is forced.

#include "bismut/geometry.hpp"
#include "bismut/kernels.hpp"
#include "bismut/transport.hpp"

#include <functional>
#include <string>

namespace bismut {

struct TestFn {
  std::string id;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;  // empty for f-only formulas
};

// ids: sq, coord:i (1-based), costheta (hemisphere), gauss:a, const
TestFn make_test_fn(const std::string& id, const Model& m);

enum class Formula { Grad13, Grad14, LPf, Hess, HessGrad, Semigroup };
const char* formula_name(Formula f);

struct EstimateRequest {
  const Model* model = nullptr;
  TestFn fn;
  Vec x0;
  Vec v;
  double T = 1.0;
  std::int64_t N = 10000;
  double dt = 1e-3;
  HSchedule sched = HSchedule::constant(1.0);
  std::uint64_t seed = 1;
  double n_penalty = 64.0;
  int threads = 1;
  KernelBackend backend = KernelBackend::Auto;
};

struct BismutEstimate {
  double value = 0;
  double std_error = 0;
  double value2 = 0;      // semigroup: P_T f^2; otherwise 0
  double std_error2 = 0;
  std::int64_t n_samples = 0;
  std::int64_t n_rejected = 0;
  std::string schedule_id;
  double wall_s = 0;
};

BismutEstimate estimate(const EstimateRequest& req, Formula formula);

struct MeanSE {
  double mean = 0, se = 0;
};

// aux moments for the bound checkers, one ensemble (generic pipeline)
struct MomentBundle {
  MeanSE Pf, Pf2, Pgradf2;      // E f, E f^2, E |grad f|^2_g at X_T
  MeanSE exp_sigII_l;           // E exp(sigma_II^- l_T)
  MeanSE exp_sigdN_l;           // E exp(sigma_dN l_T)
  MeanSE int_exp_dl_sq;         // E (int_0^T exp(sigma_dN l_s / 2) dl_s)^2
  MeanSE supM, M2;              // E sup|M|, E M^2
  MeanSE Ch;                    // E int h^2 exp(K^- s + sigma^- l_s) ds
  double int_h2 = 0;            // int_0^T h^2 ds (deterministic)
  std::int64_t n_samples = 0, n_rejected = 0;
};

MomentBundle estimate_moments(const EstimateRequest& req);

}  // namespace bismut
