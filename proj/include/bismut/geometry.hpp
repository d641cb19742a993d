#pragma once
// Model catalog: reflecting-diffusion state spaces given as a single chart
// with a boundary-defining function b (b > 0 inside, |grad b| = 1 in the
// metric near the boundary).  Curvature data is supplied analytically per
// model; validate_model() re-derives everything from the metric by finite
// differences and checks the declared constants on random samples.

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace bismut {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

struct Model {
  int dim = 1;
  std::string name;
  bool flat = true;        // zero Christoffels and curvature
  double kappa = 0.0;      // OU stiffness: Z = -kappa * x (flat models only)

  // declared constants (see validate_model)
  double K = 0.0;          // Ric_Z >= K
  double sigma_II = 0.0;   // second fundamental form II >= sigma_II
  double sigma_dN = 0.0;   // -grad N >= sigma_dN on the boundary (<= 0)
  double alpha = 0.0;      // |R| <= alpha
  double beta = 0.0;       // |d*R - R(Z) + grad Ric_Z| <= beta
  double gamma = 0.0;      // |hess N - R(N)| <= gamma on the boundary

  virtual ~Model() = default;

  virtual double b(const Vec& x) const = 0;
  virtual Vec grad_b(const Vec& x) const = 0;
  virtual Mat metric(const Vec& /*x*/) const { return Mat::Identity(dim, dim); }
  // (Gamma(dx))^k_j = Gamma^k_{ij} dx^i
  virtual Mat christoffel_dir(const Vec& /*x*/, const Vec& /*dx*/) const {
    return Mat::Zero(dim, dim);
  }
  virtual Vec Z(const Vec& x) const { return -kappa * x; }
  // Ric_Z^# = Ric^# - (grad Z)^#, chart (1,1) matrix
  virtual Mat ric_z_sharp(const Vec& /*x*/) const {
    return kappa * Mat::Identity(dim, dim);
  }
  virtual Vec riemann(const Vec& /*a*/, const Vec& /*bv*/, const Vec& c,
                      const Vec& /*x*/) const {
    return Vec::Zero(c.size());
  }
  // inward unit normal, defined near the boundary
  virtual Vec normal(const Vec& x) const;
  // (grad N)^# chart (1,1) matrix (extension of N off the boundary)
  virtual Mat grad_N(const Vec& /*xb*/) const { return Mat::Zero(dim, dim); }
  // second covariant derivative (grad^2 N)(u,v), chart vector
  virtual Vec hess_N(const Vec& /*u*/, const Vec& v, const Vec& /*xb*/) const {
    return Vec::Zero(v.size());
  }
  // (d*R - R(Z) + grad Ric_Z)^#(u,v); vanishes for every catalog entry
  virtual Vec dstar_term(const Vec& /*u*/, const Vec& v, const Vec& /*x*/) const {
    return Vec::Zero(v.size());
  }
  Vec project_to_boundary(const Vec& x) const;
  // g-orthonormal frame at x (columns), E^T g E = I
  Mat frame_at(const Vec& x) const;
  // sample interior point for validation sweeps
  virtual Vec sample_point(double u1, double u2, double u3) const = 0;
};

struct ModelSpec {
  std::string name = "half_line";
  double radius = 1.0;  // disk
  double kappa = 0.0;   // OU stiffness for flat models
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

struct ValidationReport {
  double metric_compat = 0;    // FD metric compatibility of Christoffels
  double riemann_resid = 0;    // FD curvature vs declared riemann()
  double ricci_resid = 0;      // contraction vs ric_z_sharp (incl. grad Z by FD)
  double normal_unit = 0;      // | |grad b|_g - 1 | at boundary
  double const_margin = 0;     // worst violation of K/sigma/alpha/beta/gamma
  bool ok = false;
};

ValidationReport validate_model(const Model& m, int samples = 200,
                                std::uint64_t seed = 42);

}  // namespace bismut
