#include "bismut/geometry.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bismut {

Vec Model::normal(const Vec& x) const {
  Mat g = metric(x);
  Vec n = g.ldlt().solve(grad_b(x));
  double len = std::sqrt(n.dot(g * n));
  return n / len;
}

Vec Model::project_to_boundary(const Vec& x) const {
  Vec y = x;
  for (int it = 0; it < 3; ++it) {
    double bv = b(y);
    if (std::abs(bv) < 1e-14) break;
    Vec gb = grad_b(y);
    y -= bv * gb / gb.squaredNorm();
  }
  return y;
}

Mat Model::frame_at(const Vec& x) const {
  Mat g = metric(x);
  Eigen::LLT<Mat> llt(g);
  Mat L = llt.matrixL();
  return L.transpose().inverse();
}

namespace {

struct HalfSpace final : Model {
  explicit HalfSpace(int d, double kap) {
    dim = d;
    name = d == 1 ? "half_line" : ("half_space_" + std::to_string(d) + "d");
    flat = true;
    kappa = kap;
    K = kap;
  }
  double b(const Vec& x) const override { return x[0]; }
  Vec grad_b(const Vec& x) const override {
    Vec g = Vec::Zero(x.size());
    g[0] = 1.0;
    return g;
  }
  Vec sample_point(double u1, double u2, double u3) const override {
    Vec x(dim);
    double c[3] = {0.05 + 2.0 * u1, -1.5 + 3.0 * u2, -1.5 + 3.0 * u3};
    for (int i = 0; i < dim; ++i) x[i] = c[i];
    return x;
  }
};

struct Disk final : Model {
  double r_;
  explicit Disk(double r) : r_(r) {
    dim = 2;
    name = "disk";
    flat = true;
    K = 0.0;
    sigma_II = 1.0 / r;
    sigma_dN = 0.0;
    // gamma = sup |hess_N(u,v)| over unit u,v on the boundary (numeric sweep)
    double best = 0.0;
    Vec xb(2);
    xb << r, 0.0;
    for (int i = 0; i < 360; ++i)
      for (int j = 0; j < 360; ++j) {
        double a = i * M_PI / 180.0, c = j * M_PI / 180.0;
        Vec u(2), v(2);
        u << std::cos(a), std::sin(a);
        v << std::cos(c), std::sin(c);
        best = std::max(best, hess_N(u, v, xb).norm());
      }
    gamma = best * 1.0001;
  }
  double b(const Vec& x) const override { return r_ - x.norm(); }
  Vec grad_b(const Vec& x) const override { return -x / x.norm(); }
  Mat grad_N(const Vec& x) const override {
    double rho = x.norm();
    return -Mat::Identity(2, 2) / rho + x * x.transpose() / (rho * rho * rho);
  }
  Vec hess_N(const Vec& u, const Vec& v, const Vec& x) const override {
    double rho = x.norm(), r3 = rho * rho * rho, r5 = r3 * rho * rho;
    return (u.dot(v) * x + v.dot(x) * u + u.dot(x) * v) / r3 -
           3.0 * u.dot(x) * v.dot(x) * x / r5;
  }
  Vec sample_point(double u1, double u2, double) const override {
    double rho = r_ * (0.05 + 0.93 * u1), th = 2.0 * M_PI * u2;
    Vec x(2);
    x << rho * std::cos(th), rho * std::sin(th);
    return x;
  }
};

// Upper unit hemisphere in the stereographic chart from the opposite pole:
// the chart domain is the closed unit disk, metric 4/(1+|u|^2)^2 * I, the
// equator is |u| = 1 and b is the geodesic distance to it.
struct Hemisphere final : Model {
  Hemisphere() {
    dim = 2;
    name = "hemisphere";
    flat = false;
    K = 1.0;
    sigma_II = 0.0;
    sigma_dN = 0.0;
    alpha = 1.0;  // sup |R(.,v1)v2|_HS = 1 in dimension 2, curvature +1
    beta = 0.0;
    // gamma = sup |hess_N(u,v) - R(N,u)v| over g-unit u,v at the boundary
    double best = 0.0;
    Vec xb(2);
    xb << 1.0, 0.0;
    Mat E = frame_at(xb);
    Vec N = normal(xb);
    for (int i = 0; i < 360; ++i)
      for (int j = 0; j < 360; ++j) {
        double a = i * M_PI / 180.0, c = j * M_PI / 180.0;
        Vec u = E * Vec{{std::cos(a), std::sin(a)}};
        Vec v = E * Vec{{std::cos(c), std::sin(c)}};
        Vec w = hess_N(u, v, xb) - riemann(N, u, v, xb);
        best = std::max(best, std::sqrt(w.dot(metric(xb) * w)));
      }
    gamma = best * 1.0001;
  }
  double lam(const Vec& x) const {
    double r2 = x.squaredNorm();
    return 4.0 / ((1.0 + r2) * (1.0 + r2));
  }
  double b(const Vec& x) const override {
    return M_PI / 2.0 - 2.0 * std::atan(x.norm());
  }
  Vec grad_b(const Vec& x) const override {
    double rho = x.norm();
    return (-2.0 / (1.0 + rho * rho)) * x / rho;
  }
  Mat metric(const Vec& x) const override { return lam(x) * Mat::Identity(2, 2); }
  Mat christoffel_dir(const Vec& x, const Vec& dx) const override {
    Vec s = -2.0 * x / (1.0 + x.squaredNorm());
    return dx * s.transpose() + s.dot(dx) * Mat::Identity(2, 2) -
           s * dx.transpose();
  }
  Vec Z(const Vec& x) const override { return Vec::Zero(x.size()); }
  Mat ric_z_sharp(const Vec&) const override { return Mat::Identity(2, 2); }
  Vec riemann(const Vec& a, const Vec& bv, const Vec& c, const Vec& x) const override {
    double l = lam(x);
    return l * bv.dot(c) * a - l * a.dot(c) * bv;
  }
  Mat grad_N(const Vec& x) const override {
    double bb = b(x);
    Vec n = normal(x);
    Mat g = metric(x);
    return -std::tan(bb) * (Mat::Identity(2, 2) - n * (g * n).transpose());
  }
  Vec hess_N(const Vec& u, const Vec& v, const Vec& x) const override {
    // valid on the boundary (b = 0)
    Vec n = normal(x);
    Mat g = metric(x);
    double un = u.dot(g * n), vn = v.dot(g * n);
    return -un * (v - vn * n);
  }
  Vec sample_point(double u1, double u2, double) const override {
    double rho = 0.1 + 0.88 * u1, th = 2.0 * M_PI * u2;
    Vec x(2);
    x << rho * std::cos(th), rho * std::sin(th);
    return x;
  }
};

}  // namespace

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
  if (spec.name == "half_line") return std::make_unique<HalfSpace>(1, spec.kappa);
  if (spec.name == "half_space_2d") return std::make_unique<HalfSpace>(2, spec.kappa);
  if (spec.name == "half_space_3d") return std::make_unique<HalfSpace>(3, spec.kappa);
  if (spec.name == "disk") {
    if (spec.kappa != 0.0) throw std::invalid_argument("disk: drift not supported");
    return std::make_unique<Disk>(spec.radius);
  }
  if (spec.name == "hemisphere") {
    if (spec.kappa != 0.0) throw std::invalid_argument("hemisphere: drift not supported");
    return std::make_unique<Hemisphere>();
  }
  throw std::invalid_argument("unknown model: " + spec.name);
}

namespace {

// Gamma^k_{ij} at x
double christ(const Model& m, const Vec& x, int k, int i, int j) {
  Vec ei = Vec::Zero(m.dim);
  ei[i] = 1.0;
  return m.christoffel_dir(x, ei)(k, j);
}

}  // namespace

ValidationReport validate_model(const Model& m, int samples, std::uint64_t seed) {
  ValidationReport rep;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int d = m.dim;
  const double h = 1e-5;

  auto unit_pair = [&](const Mat& E) {
    double a = 2.0 * M_PI * uni(gen);
    Vec c(d >= 2 ? 2 : 1);
    Vec u = Vec::Zero(d);
    if (d == 1) {
      u = E.col(0) * (uni(gen) < 0.5 ? 1.0 : -1.0);
    } else {
      Vec w = Vec::Zero(d);
      for (int i = 0; i < d; ++i) w[i] = std::cos(a + 2.0 * i) + 0.3 * uni(gen);
      u = E * (w / w.norm());
    }
    return u;
  };

  for (int s = 0; s < samples; ++s) {
    Vec x = m.sample_point(uni(gen), uni(gen), uni(gen));
    Mat g = m.metric(x);
    Mat E = m.frame_at(x);

    // metric compatibility: d_i g_jk = Gamma^l_{ij} g_lk + Gamma^l_{ik} g_jl
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      Mat dg = (m.metric(xp) - m.metric(xm)) / (2.0 * h);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double s1 = 0.0;
          for (int l = 0; l < d; ++l)
            s1 += christ(m, x, l, i, j) * g(l, k) + christ(m, x, l, i, k) * g(j, l);
          rep.metric_compat = std::max(rep.metric_compat, std::abs(dg(j, k) - s1));
        }
    }

    // Riemann from Christoffels vs declared
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          Vec rl(d);
          for (int l = 0; l < d; ++l) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double dGi = (christ(m, xp, l, j, k) - christ(m, xm, l, j, k)) / (2.0 * h);
            xp = x; xm = x;
            xp[j] += h;
            xm[j] -= h;
            double dGj = (christ(m, xp, l, i, k) - christ(m, xm, l, i, k)) / (2.0 * h);
            double quad = 0.0;
            for (int mm = 0; mm < d; ++mm)
              quad += christ(m, x, l, i, mm) * christ(m, x, mm, j, k) -
                      christ(m, x, l, j, mm) * christ(m, x, mm, i, k);
            rl[l] = dGi - dGj + quad;
          }
          Vec ei = Vec::Zero(d), ej = Vec::Zero(d), ek = Vec::Zero(d);
          ei[i] = 1;
          ej[j] = 1;
          ek[k] = 1;
          Vec decl = m.riemann(ei, ej, ek, x);
          rep.riemann_resid = std::max(rep.riemann_resid, (rl - decl).norm());
        }

    // Ricci contraction + FD grad Z vs declared ric_z_sharp (as bilinear forms)
    {
      Mat ric_fd = Mat::Zero(d, d);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          Vec ej = Vec::Zero(d), ek = Vec::Zero(d);
          ej[j] = 1;
          ek[k] = 1;
          double tr = 0.0;
          for (int a = 0; a < d; ++a) {
            Vec ea = E.col(a);
            tr += ea.dot(g * m.riemann(ea, ej, ek, x));
          }
          ric_fd(j, k) = tr;
        }
      Mat gradZ(d, d);  // (grad Z)^k_j = d_j Z^k + Gamma^k_{ji} Z^i
      Vec Zx = m.Z(x);
      for (int j = 0; j < d; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        Vec dZ = (m.Z(xp) - m.Z(xm)) / (2.0 * h);
        Vec ej = Vec::Zero(d);
        ej[j] = 1;
        Vec corr = m.christoffel_dir(x, ej) * Zx;
        for (int k = 0; k < d; ++k) gradZ(k, j) = dZ[k] + corr[k];
      }
      Mat ric_z_fd = ric_fd - g * gradZ;
      Mat decl = g * m.ric_z_sharp(x);
      rep.ricci_resid = std::max(rep.ricci_resid, (ric_z_fd - decl).norm());

      // Ric_Z >= K on frame components
      Mat F = E.transpose() * ric_z_fd * E;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (F + F.transpose()));
      rep.const_margin = std::min(rep.const_margin, es.eigenvalues().minCoeff() - m.K);
    }

    // alpha: |R(., v1)v2|_HS <= alpha
    for (int rep_i = 0; rep_i < 4; ++rep_i) {
      Vec v1 = unit_pair(E), v2 = unit_pair(E);
      double hs = 0.0;
      for (int a = 0; a < d; ++a) {
        Vec w = m.riemann(E.col(a), v1, v2, x);
        hs += w.dot(g * w);
      }
      rep.const_margin = std::min(rep.const_margin, m.alpha - std::sqrt(hs));
      Vec w = m.dstar_term(v1, v2, x);
      rep.const_margin = std::min(rep.const_margin, m.beta - std::sqrt(w.dot(g * w)));
    }

    // boundary checks at the projection of a boundary-adjacent sample
    Vec xb = m.project_to_boundary(m.sample_point(0.999, uni(gen), uni(gen)));
    if (m.b(xb) < 1e-8) {
      Mat gb = m.metric(xb);
      Vec db = m.grad_b(xb);
      Vec nsh = gb.ldlt().solve(db);
      rep.normal_unit = std::max(rep.normal_unit, std::abs(std::sqrt(db.dot(nsh)) - 1.0));

      Mat Eb = m.frame_at(xb);
      Vec N = m.normal(xb);
      Mat mdN = -Eb.transpose() * gb * m.grad_N(xb) * Eb;  // frame comps of -grad N
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (mdN + mdN.transpose()));
      rep.const_margin = std::min(rep.const_margin, es.eigenvalues().minCoeff() - m.sigma_dN);

      // II on the tangent space: II(u,u) = <-grad_u N, u>
      Vec nf = Eb.transpose() * gb * N;
      Mat Pt = Mat::Identity(d, d) - nf * nf.transpose();
      Mat IIf = Pt * mdN * Pt + m.sigma_II * nf * nf.transpose();
      Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (IIf + IIf.transpose()));
      rep.const_margin = std::min(rep.const_margin, es2.eigenvalues().minCoeff() - m.sigma_II);

      for (int rep_i = 0; rep_i < 4; ++rep_i) {
        Vec u = unit_pair(Eb), v = unit_pair(Eb);
        Vec w = m.hess_N(u, v, xb) - m.riemann(N, u, v, xb);
        rep.const_margin = std::min(rep.const_margin, m.gamma - std::sqrt(w.dot(gb * w)));
      }
    }
  }

  rep.ok = rep.metric_compat < 1e-4 && rep.riemann_resid < 1e-4 &&
           rep.ricci_resid < 1e-4 && rep.normal_unit < 1e-8 &&
           rep.const_margin > -1e-6;
  return rep;
}

}  // namespace bismut
