#pragma once
// Reflecting-diffusion simulation.  Euler-Maruyama in the chart with metric
// square-root injection, specular reflection at the boundary (penetration
// depth delta contributes local time 2*delta), and Stratonovich-midpoint
// frame transport.  The diffusion runs at speed 1 per frame component with
// drift Z/2, i.e. generator L/2 with L = Laplacian + Z.

#include "bismut/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace bismut {

struct StepData {
  Vec x;       // left point
  Mat E;       // frame at x (columns g-orthonormal)
  Vec x_new;
  Mat E_new;
  Vec dB;      // frame-component Brownian increment, includes sqrt(dt)
  Vec xb;      // boundary projection (valid when dl > 0)
  double dt = 0;
  double dl = 0;
  bool hit = false;
  bool bad = false;  // path left chart validity / NaN
};

struct PathState {
  Vec x;
  Mat E;
};

class PathSimulator {
 public:
  PathSimulator(const Model& m, double T, double dt_req, std::uint64_t seed);

  int nsteps() const { return nsteps_; }
  double dt() const { return dt_; }
  double sqrt_dt() const { return sqrt_dt_; }
  const Model& model() const { return *m_; }
  std::uint64_t seed() const { return seed_; }

  void init(PathState& st, const Vec& x0) const;
  void step(PathState& st, std::uint64_t path_index, int step_idx,
            StepData& out) const;

 private:
  const Model* m_;
  double T_, dt_, sqrt_dt_;
  int nsteps_;
  std::uint64_t seed_;
};

struct DiffusionPath {
  double dt = 0;
  double T = 0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<Vec> x;         // nsteps + 1
  std::vector<Mat> U;         // frames, nsteps + 1
  std::vector<Vec> dB;        // nsteps
  std::vector<double> dl;     // nsteps
  std::vector<std::uint8_t> hit;
  bool bad = false;
  int nsteps() const { return static_cast<int>(dB.size()); }
};

DiffusionPath simulate_path(const Model& m, const Vec& x0, double T, double dt,
                            std::uint64_t seed, std::uint64_t path_index);

// exact Skorokhod map on the half-line: X = x0 + W + l/2,
// l_t = 2 max(0, -min_{s<=t}(x0 + W_s))
void skorokhod_exact_1d(double x0, double T, double dt, std::uint64_t seed,
                        std::uint64_t path_index, double& X_T, double& l_T);

// little-endian binary trace: "BMCPATH1", u32 d, u32 nsteps, f64 dt, then per
// step (x[d], dB[d], dl, hit-as-f64)
void dump_path_binary(std::ostream& os, const DiffusionPath& p, int dim);

}  // namespace bismut
