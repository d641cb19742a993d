#include "bismut/transport.hpp"

#include <cmath>
#include <stdexcept>

namespace bismut {

// ----------------------------------------------------------- HSchedule -----

HSchedule HSchedule::constant(double T) {
  HSchedule s;
  s.kind = Constant;
  s.T = T;
  return s;
}
HSchedule HSchedule::exponential(double T, double K) {
  if (std::abs(K) < 1e-12) return constant(T);
  HSchedule s;
  s.kind = Exponential;
  s.T = T;
  s.K = K;
  return s;
}
HSchedule HSchedule::linear_ramp(double T) {
  HSchedule s;
  s.kind = LinearRamp;
  s.T = T;
  return s;
}
HSchedule HSchedule::tabulated(double T, std::vector<double> t, std::vector<double> h) {
  HSchedule s;
  s.kind = Tabulated;
  s.T = T;
  s.tab_t = std::move(t);
  s.tab_h = std::move(h);
  s.tab_H.assign(s.tab_t.size(), 0.0);
  for (std::size_t i = 1; i < s.tab_t.size(); ++i)
    s.tab_H[i] = s.tab_H[i - 1] + 0.5 * (s.tab_h[i] + s.tab_h[i - 1]) *
                                      (s.tab_t[i] - s.tab_t[i - 1]);
  return s;
}

double HSchedule::h(double t) const {
  switch (kind) {
    case Constant:
      return -1.0 / T;
    case Exponential:
      return -K * std::exp(K * t) / (std::exp(K * T) - 1.0);
    case LinearRamp:
      return t / T;
    case Tabulated: {
      if (tab_t.size() < 2) return 0.0;
      if (t <= tab_t.front()) return tab_h.front();
      if (t >= tab_t.back()) return tab_h.back();
      std::size_t i = 1;
      while (tab_t[i] < t) ++i;
      double w = (t - tab_t[i - 1]) / (tab_t[i] - tab_t[i - 1]);
      return (1.0 - w) * tab_h[i - 1] + w * tab_h[i];
    }
  }
  return 0.0;
}

double HSchedule::htilde(double t) const {
  switch (kind) {
    case Constant:
      return 1.0 - t / T;
    case Exponential:
      return 1.0 - (std::exp(K * t) - 1.0) / (std::exp(K * T) - 1.0);
    case LinearRamp:
      return 1.0 + 0.5 * t * t / T;
    case Tabulated: {
      if (tab_t.size() < 2) return 1.0;
      if (t <= tab_t.front()) return 1.0;
      std::size_t i = 1;
      while (i < tab_t.size() && tab_t[i] < t) ++i;
      if (i == tab_t.size()) return 1.0 + tab_H.back();
      double w = (t - tab_t[i - 1]) / (tab_t[i] - tab_t[i - 1]);
      double Hc = tab_H[i - 1] + 0.5 * (tab_h[i - 1] + h(t)) * (t - tab_t[i - 1]);
      (void)w;
      return 1.0 + Hc;
    }
  }
  return 1.0;
}

double HSchedule::hprime(double t) const {
  (void)t;
  if (kind == LinearRamp) return 1.0 / T;
  throw std::logic_error("hprime only defined for the gradient ramp schedule");
}

// ----------------------------------------------------------- Transport -----

namespace {

bool isotropic(const Mat& B, double& diag) {
  const int d = static_cast<int>(B.rows());
  diag = B(0, 0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) {
        if (std::abs(B(i, i) - diag) > 1e-12) return false;
      } else if (std::abs(B(i, j)) > 1e-12) {
        return false;
      }
    }
  return true;
}

// exp(B) acting from the left; exact for isotropic B, 2nd order otherwise
void apply_exp(Mat& A, const Mat& B) {
  double diag;
  if (isotropic(B, diag)) {
    A *= std::exp(diag);
    return;
  }
  const int d = static_cast<int>(B.rows());
  A = (Mat::Identity(d, d) + B + 0.5 * B * B) * A;
}
void apply_exp(Vec& w, const Mat& B) {
  double diag;
  if (isotropic(B, diag)) {
    w *= std::exp(diag);
    return;
  }
  const int d = static_cast<int>(B.rows());
  w = (Mat::Identity(d, d) + B + 0.5 * B * B) * w;
}

// exp(S) for symmetric S; with clamp, e^{lam} -> 0 for lam < -15
Mat sym_exp(const Mat& S, bool clamp) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  const int d = static_cast<int>(S.rows());
  Vec f(d);
  for (int i = 0; i < d; ++i) {
    double lam = es.eigenvalues()[i];
    f[i] = (clamp && lam < -15.0) ? 0.0 : std::exp(lam);
  }
  return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void Transport::init(const Model& model, const Vec& v_dir, double n_pen) {
  m = &model;
  v = v_dir;
  n_penalty = n_pen;
  const int d = m->dim;
  Qn = Mat::Identity(d, d);
  Qlim = Mat::Identity(d, d);
  Qt = Mat::Identity(d, d);
  Qt_inv = Mat::Identity(d, d);
  Wv = Vec::Zero(d);
  Y = Vec::Zero(d);
  Mval = sup_absM = I14 = Ih = Sh = Zint = IWh = 0.0;
  env = 1.0;
  mass_lhs = mass_rhs = 0.0;
  rejected = false;
  resync_ctr_ = 0;
}

void Transport::step(const StepData& s, double h, double ht, double hp) {
  const int d = m->dim;
  const Mat& E = s.E;

  // left-point accumulations
  Vec qlv = Qlim * v;
  Vec qtv = Qt * v;
  I14 += hp * qlv.dot(s.dB);
  Ih += h * qtv.dot(s.dB);
  Sh += h * h * qtv.squaredNorm() * s.dt;
  Mval += h * Y.dot(s.dB);
  sup_absM = std::max(sup_absM, std::abs(Mval));
  IWh += h * Wv.dot(s.dB);
  if (m->kappa != 0.0) {
    Mat g = m->metric(s.x);
    Vec Zf = E.transpose() * (g * m->Z(s.x));
    Zint += ht * h * Zf.dot(s.dB);
  }

  // W sources at the left point
  Vec src = Vec::Zero(d);
  if (!m->flat) {
    Mat g = m->metric(s.x);
    Vec q1c = E * (ht * qtv);
    Vec q2c = E * qtv;
    Vec dBc = E * s.dB;
    src = E.transpose() * (g * m->riemann(dBc, q1c, q2c, s.x));
    Vec dst = m->dstar_term(q1c, q2c, s.x);
    if (dst.squaredNorm() > 0.0) src -= 0.5 * s.dt * (E.transpose() * (g * dst));
  }
  if (s.dl > 0.0) {
    Mat gb = m->metric(s.xb);
    Vec q1c = E * (ht * qtv);
    Vec q2c = E * qtv;
    Vec add = m->hess_N(q1c, q2c, s.xb) -
              m->riemann(m->normal(s.xb), q1c, q2c, s.xb);
    if (add.squaredNorm() > 0.0)
      src -= 0.5 * s.dl * (E.transpose() * (gb * add));
  }

  // nested-integral state picks up this step's increment before the factors
  Y += h * s.dB;

  // exponential Euler on the Ric_Z damping
  {
    Mat Fric = E.transpose() * (m->metric(s.x) * (m->ric_z_sharp(s.x) * E));
    Mat B = (-0.5 * s.dt) * Fric;
    apply_exp(Qn, B);
    apply_exp(Qlim, B);
    apply_exp(Qt, B);
    apply_exp(Y, B);
    apply_exp(Wv, B);
    // d(Q^-1) = -Q^-1 (dQ) Q^-1: right-multiply by the inverse factor
    double diag;
    if (isotropic(B, diag)) {
      Qt_inv *= std::exp(-diag);
    } else {
      Qt_inv = Qt_inv * (Mat::Identity(d, d) - B + 0.5 * B * B);
    }
  }
  env *= std::exp(-0.5 * m->K * s.dt);
  mass_rhs += Qn.squaredNorm() * std::max(0.0, -m->K) * s.dt;

  // boundary local-time factors
  if (s.dl > 0.0) {
    Mat gb = m->metric(s.xb);
    Vec N = m->normal(s.xb);
    Vec nf = E.transpose() * (gb * N);
    nf /= nf.norm();
    Mat Pn = nf * nf.transpose();
    Mat Pt = Mat::Identity(d, d) - Pn;
    Mat FgN = E.transpose() * (gb * (m->grad_N(s.xb) * E));
    FgN = 0.5 * (FgN + FgN.transpose()).eval();

    bool gn_zero = FgN.squaredNorm() < 1e-28;
    if (!gn_zero) {
      Mat Fq = sym_exp(0.5 * s.dl * FgN, false);
      Qt = Fq * Qt;
      Wv = Fq * Wv;
      Qt_inv = Qt_inv * sym_exp(-0.5 * s.dl * FgN, false);
    }

    Mat FII = Pt * (-FgN) * Pt;
    Mat Fqn = sym_exp((-0.5 * s.dl) * FII - (0.5 * n_penalty * s.dl) * Pn, true);
    Qn = Fqn * Qn;
    Y = Fqn * Y;
    if (!gn_zero) Qlim = sym_exp((-0.5 * s.dl) * FII, false) * Qlim;
    Qlim = Pt * Qlim;

    env *= std::exp(-0.5 * m->sigma_II * s.dl);
    mass_lhs += (nf.transpose() * Qn).squaredNorm() * s.dl;
    mass_rhs += Qn.squaredNorm() * std::max(0.0, -m->sigma_II) * s.dl;
  }

  Wv += src;

  if (++resync_ctr_ >= 100) {
    Qt_inv = Qt.inverse();
    resync_ctr_ = 0;
  }
  if (!Qn.allFinite() || !Wv.allFinite() || Qn.norm() > 1e12 || Y.norm() > 1e12)
    rejected = true;
}

// ------------------------------------------------------ path wrappers ------

namespace {

StepData step_from_path(const DiffusionPath& p, const Model& m, int i) {
  StepData s;
  s.x = p.x[i];
  s.E = p.U[i];
  s.x_new = p.x[i + 1];
  s.E_new = p.U[i + 1];
  s.dB = p.dB[i];
  s.dt = p.dt;
  s.dl = p.dl[i];
  s.hit = p.hit[i] != 0;
  if (s.hit) s.xb = m.project_to_boundary(p.x[i + 1]);
  return s;
}

}  // namespace

std::vector<Mat> evolve_Qn(const DiffusionPath& p, const Model& m, double n) {
  Transport t;
  t.init(m, Vec::Zero(m.dim), n);
  std::vector<Mat> out;
  out.reserve(p.nsteps() + 1);
  out.push_back(t.Qn);
  for (int i = 0; i < p.nsteps(); ++i) {
    t.step(step_from_path(p, m, i), 0.0, 0.0, 0.0);
    out.push_back(t.Qn);
  }
  return out;
}

std::vector<Mat> evolve_Q_limit(const DiffusionPath& p, const Model& m) {
  Transport t;
  t.init(m, Vec::Zero(m.dim), 1.0);
  std::vector<Mat> out;
  out.reserve(p.nsteps() + 1);
  out.push_back(t.Qlim);
  for (int i = 0; i < p.nsteps(); ++i) {
    t.step(step_from_path(p, m, i), 0.0, 0.0, 0.0);
    out.push_back(t.Qlim);
  }
  return out;
}

std::vector<Mat> evolve_Qtilde(const DiffusionPath& p, const Model& m) {
  Transport t;
  t.init(m, Vec::Zero(m.dim), 1.0);
  std::vector<Mat> out;
  out.reserve(p.nsteps() + 1);
  out.push_back(t.Qt);
  for (int i = 0; i < p.nsteps(); ++i) {
    t.step(step_from_path(p, m, i), 0.0, 0.0, 0.0);
    out.push_back(t.Qt);
  }
  return out;
}

std::vector<Vec> evolve_W(const DiffusionPath& p, const Model& m,
                          const HSchedule& sched, const Vec& v) {
  Transport t;
  t.init(m, v, 1.0);
  std::vector<Vec> out;
  out.reserve(p.nsteps() + 1);
  out.push_back(t.Wv);
  for (int i = 0; i < p.nsteps(); ++i) {
    double ti = i * p.dt;
    t.step(step_from_path(p, m, i), sched.h(ti), sched.htilde(ti), 0.0);
    out.push_back(t.Wv);
  }
  return out;
}

double double_integral_M(const DiffusionPath& p, const Model& m,
                         const HSchedule& sched, double n, bool* rejected) {
  Transport t;
  t.init(m, Vec::Zero(m.dim), n);
  for (int i = 0; i < p.nsteps(); ++i) {
    double ti = i * p.dt;
    t.step(step_from_path(p, m, i), sched.h(ti), sched.htilde(ti), 0.0);
  }
  if (rejected) *rejected = t.rejected;
  return t.Mval;
}

}  // namespace bismut
