#include "bismut/pathsim.hpp"

#include "bismut/detmath.hpp"

#include <cmath>
#include <ostream>

namespace bismut {

PathSimulator::PathSimulator(const Model& m, double T, double dt_req,
                             std::uint64_t seed)
    : m_(&m), T_(T), seed_(seed) {
  nsteps_ = T > 0 ? static_cast<int>(std::ceil(T / dt_req - 1e-9)) : 0;
  if (nsteps_ < 1 && T > 0) nsteps_ = 1;
  dt_ = nsteps_ > 0 ? T / nsteps_ : 0.0;
  sqrt_dt_ = std::sqrt(dt_);
}

void PathSimulator::init(PathState& st, const Vec& x0) const {
  st.x = x0;
  st.E = m_->frame_at(x0);
}

void PathSimulator::step(PathState& st, std::uint64_t path_index, int step_idx,
                         StepData& out) const {
  const int d = m_->dim;
  out.x = st.x;
  out.E = st.E;
  out.dt = dt_;
  out.dl = 0.0;
  out.hit = false;
  out.bad = false;

  Vec dB(d);
  for (int i = 0; i < d; ++i)
    dB[i] = sqrt_dt_ * normal_scalar(seed_, path_index, static_cast<std::uint32_t>(step_idx),
                                     static_cast<std::uint32_t>(i));
  out.dB = dB;

  Vec dx = st.E * dB;
  dx += (0.5 * dt_) * m_->Z(st.x);
  Vec xp = st.x + dx;

  // specular reflection; a curved boundary may need a second pass
  double dl = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    double bv = m_->b(xp);
    if (bv >= 0.0) break;
    Vec gb = m_->grad_b(xp);
    xp = xp - (2.0 * bv / gb.squaredNorm()) * gb;
    dl += -2.0 * bv;
    out.hit = true;
    if (pass == 3 && m_->b(xp) < 0.0) {
      out.bad = true;
      return;
    }
  }
  out.dl = dl;
  if (out.hit) out.xb = m_->project_to_boundary(xp);
  if (!xp.allFinite()) {
    out.bad = true;
    return;
  }

  Mat E_new = st.E;
  if (!m_->flat) {
    Vec dx_tot = xp - st.x;
    Vec xmid = 0.5 * (st.x + xp);
    E_new = st.E - m_->christoffel_dir(xmid, dx_tot) * st.E;
    // modified Gram-Schmidt in g(xp)
    Mat g = m_->metric(xp);
    for (int k = 0; k < d; ++k) {
      Vec col = E_new.col(k);
      for (int j = 0; j < k; ++j) {
        Vec ej = E_new.col(j);
        col -= col.dot(g * ej) * ej;
      }
      double nn = std::sqrt(col.dot(g * col));
      E_new.col(k) = col / nn;
    }
  }

  st.x = xp;
  st.E = E_new;
  out.x_new = xp;
  out.E_new = E_new;
}

DiffusionPath simulate_path(const Model& m, const Vec& x0, double T, double dt,
                            std::uint64_t seed, std::uint64_t path_index) {
  PathSimulator sim(m, T, dt, seed);
  DiffusionPath p;
  p.dt = sim.dt();
  p.T = T;
  p.seed = seed;
  p.path_index = path_index;
  const int n = sim.nsteps();
  p.x.reserve(n + 1);
  p.U.reserve(n + 1);
  p.dB.reserve(n);
  p.dl.reserve(n);
  p.hit.reserve(n);

  PathState st;
  sim.init(st, x0);
  p.x.push_back(st.x);
  p.U.push_back(st.E);
  StepData s;
  for (int i = 0; i < n; ++i) {
    sim.step(st, path_index, i, s);
    if (s.bad) {
      p.bad = true;
      break;
    }
    p.x.push_back(st.x);
    p.U.push_back(st.E);
    p.dB.push_back(s.dB);
    p.dl.push_back(s.dl);
    p.hit.push_back(s.hit ? 1 : 0);
  }
  return p;
}

void skorokhod_exact_1d(double x0, double T, double dt, std::uint64_t seed,
                        std::uint64_t path_index, double& X_T, double& l_T) {
  int n = T > 0 ? static_cast<int>(std::ceil(T / dt - 1e-9)) : 0;
  if (n < 1 && T > 0) n = 1;
  double dte = n > 0 ? T / n : 0.0;
  double sq = std::sqrt(dte);
  double w = 0.0, running_min = x0;
  for (int i = 0; i < n; ++i) {
    w += sq * normal_scalar(seed, path_index, static_cast<std::uint32_t>(i), 0);
    running_min = std::min(running_min, x0 + w);
  }
  double eta = std::max(0.0, -running_min);
  l_T = 2.0 * eta;
  X_T = x0 + w + eta;
}

void dump_path_binary(std::ostream& os, const DiffusionPath& p, int dim) {
  os.write("BMCPATH1", 8);
  std::uint32_t d = static_cast<std::uint32_t>(dim);
  std::uint32_t n = static_cast<std::uint32_t>(p.nsteps());
  os.write(reinterpret_cast<const char*>(&d), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&p.dt), 8);
  for (int i = 0; i < p.nsteps(); ++i) {
    for (int k = 0; k < dim; ++k)
      os.write(reinterpret_cast<const char*>(&p.x[i + 1][k]), 8);
    for (int k = 0; k < dim; ++k)
      os.write(reinterpret_cast<const char*>(&p.dB[i][k]), 8);
    os.write(reinterpret_cast<const char*>(&p.dl[i]), 8);
    double h = p.hit[i];
    os.write(reinterpret_cast<const char*>(&h), 8);
  }
}

}  // namespace bismut
