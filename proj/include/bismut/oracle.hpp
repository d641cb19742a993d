#pragma once
// Independent ground truth for P_tf and its derivatives (semigroup e^{tL/2},
// L = Laplacian + Z).  Flat models use the method of images: the reflected
// process equals |Y| for the free (possibly Ornstein-Uhlenbeck) process Y in
// the normal coordinate, evaluated by tensor quadrature.  Curved / radial
// models use a Crank-Nicolson solver for the weighted flux-form operator
// (1/w)(w u')' with zero-flux ends, which conserves sum(u * cell-measure)
// exactly and is second order in space and time.

#include "bismut/estimators.hpp"
#include "bismut/geometry.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace bismut {

// Golub-Welsch rules.  gauss_hermite: weight e^{-x^2} on R (physicists');
// gauss_legendre: weight 1 on [-1, 1].
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w);
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

class NeumannOracle {
 public:
  enum Kind { ImageHalfline, ImageHalfspace, Grid1d, GridDiskRadial };

  // image method (flat models, optional OU drift)
  static NeumannOracle image(const Model& m);
  // radial/1-d grid solver; xmax = domain truncation (half-line) or the
  // intrinsic radius (pi/2 for the hemisphere, R for the disk)
  static NeumannOracle grid(const Model& m, double xmax, int nx, double dt);

  Kind kind() const { return kind_; }
  double dx() const { return dx_; }

  double value(const TestFn& f, const Vec& x, double t) const;
  // directional derivative / second derivative along dir (chart coordinates),
  // central differences with one Richardson step; step = 0 picks a default.
  // grid kinds differentiate along the radial coordinate and ignore dir.
  double grad(const TestFn& f, const Vec& x, double t, const Vec& dir,
              double step = 0) const;
  double hess(const TestFn& f, const Vec& x, double t, const Vec& dir,
              double step = 0) const;
  // LP_tf: spatial route applies Laplacian + Z by finite differences;
  // temporal route is 2 d/dt of the value
  double Lf(const TestFn& f, const Vec& x, double t, bool temporal = false) const;
  // second radial derivative at the pole / center by an even polynomial fit;
  // equals Hess P_tf(v,v) there for g-unit v (axisymmetric f)
  double hess_radial_origin(const TestFn& f, double t) const;
  // |sum u*m - sum f*m| after evolving to time t (grid kinds)
  double conservation_drift(const TestFn& f, double t) const;
  // grid solution at time t (grid kinds); cached per (f.id, t)
  const std::vector<double>& slice(const TestFn& f, double t) const;
  // value of the slice as a function of the radial coordinate
  double slice_at(const std::vector<double>& u, double s) const;
  double radial_of(const Vec& x) const;
  Vec chart_of_radial(double s) const;

 private:
  NeumannOracle() = default;
  double image_value(const TestFn& f, const Vec& x, double t) const;
  std::vector<double> solve_grid(const TestFn& f, double t) const;

  Kind kind_ = ImageHalfline;
  const Model* m_ = nullptr;
  // grid data
  double xmax_ = 0, dx_ = 0, dt_ = 0;
  int nx_ = 0;
  std::vector<double> xg_, mcell_, wface_;
  mutable std::map<std::pair<std::string, long long>, std::vector<double>> cache_;
  mutable std::unique_ptr<std::mutex> cache_mu_ = std::make_unique<std::mutex>();
};

}  // namespace bismut
