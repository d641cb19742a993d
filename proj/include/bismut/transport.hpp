#pragma once
// Covariant functionals along a path, all stored in base-point coordinates
// (frame pullback): Qn with normal penalization, its projection limit Q_lim,
// Qtilde with the full grad-N boundary term, a running inverse of Qtilde, the
// Hessian companion process W, and the nested stochastic integral M.
//
// The nested integral is carried in the stable recursion
//   Y_{s+1} = G_s (Y_s + h_s dB_s),   M += h_s <Y_s, dB_s>,
// where G_s is the one-step Qn factor; this equals Qn_s * int h {Qn}^-1 dB
// without ever forming the (exponentially large) inverse.

#include "bismut/geometry.hpp"
#include "bismut/pathsim.hpp"

#include <vector>

namespace bismut {

struct HSchedule {
  enum Kind { Constant, Exponential, LinearRamp, Tabulated };
  Kind kind = Constant;
  double T = 1.0;
  double K = 0.0;                       // exponential kind
  std::vector<double> tab_t, tab_h, tab_H;  // tabulated: H = cumulative int h

  static HSchedule constant(double T);
  static HSchedule exponential(double T, double K);
  static HSchedule linear_ramp(double T);
  static HSchedule tabulated(double T, std::vector<double> t, std::vector<double> h);

  double h(double t) const;
  double htilde(double t) const;  // 1 + int_0^t h
  double hprime(double t) const;  // gradient (ramp) kind
  bool gradient_kind() const { return kind == LinearRamp; }
};

struct Transport {
  const Model* m = nullptr;
  double n_penalty = 1.0;
  Vec v;  // estimator direction, base coordinates

  Mat Qn, Qlim, Qt, Qt_inv;
  Vec Wv;   // W^{htilde}(v, v)
  Vec Y;    // nested-integral state

  // accumulated estimator integrals (left-point Ito sums)
  double Mval = 0;       // nested double integral int h' <Y, dB> with Qn damping
  double sup_absM = 0;
  double I14 = 0;        // int h'(s) <Q_lim v, dB>
  double Ih = 0;         // int h <Qt v, dB>
  double Sh = 0;         // int |h Qt v|^2 ds
  double Zint = 0;       // int htilde h <Z, dB>
  double IWh = 0;        // int h <W_s, dB>
  double env = 1.0;      // pathwise envelope exp(-1/2 int K ds - 1/2 int sigma dl)
  double mass_lhs = 0;   // int |P_N Qn|^2 dl
  double mass_rhs = 0;   // int |Qn|^2 (K^- ds + sigma^- dl)
  bool rejected = false;

  void init(const Model& model, const Vec& v_dir, double n_pen);
  // advance one step; h/htilde/hprime evaluated at the left time point
  void step(const StepData& s, double h, double htilde, double hprime);

 private:
  int resync_ctr_ = 0;
};

// stored-path wrappers
std::vector<Mat> evolve_Qn(const DiffusionPath& p, const Model& m, double n);
std::vector<Mat> evolve_Q_limit(const DiffusionPath& p, const Model& m);
std::vector<Mat> evolve_Qtilde(const DiffusionPath& p, const Model& m);
std::vector<Vec> evolve_W(const DiffusionPath& p, const Model& m,
                          const HSchedule& sched, const Vec& v);
double double_integral_M(const DiffusionPath& p, const Model& m,
                         const HSchedule& sched, double n, bool* rejected = nullptr);

}  // namespace bismut
