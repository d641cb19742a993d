#include "bismut/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace bismut {

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  const double mu0 = std::sqrt(M_PI);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[k];
    double v0 = es.eigenvectors()(0, k);
    w[k] = mu0 * v0 * v0;
  }
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[k];
    double v0 = es.eigenvectors()(0, k);
    w[k] = 2.0 * v0 * v0;
  }
}

namespace {

double weight_fn(const Model& m, double s) {
  if (m.name == "hemisphere") return std::sin(s);
  if (m.name == "disk") return s;
  if (m.kappa != 0.0) return std::exp(-0.5 * m.kappa * s * s);
  return 1.0;
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

NeumannOracle NeumannOracle::image(const Model& m) {
  if (!m.flat || m.name == "disk")
    throw std::invalid_argument("image oracle: half-line/half-space only");
  NeumannOracle o;
  o.kind_ = m.dim == 1 ? ImageHalfline : ImageHalfspace;
  o.m_ = &m;
  return o;
}

NeumannOracle NeumannOracle::grid(const Model& m, double xmax, int nx, double dt) {
  NeumannOracle o;
  o.kind_ = m.name == "disk" ? GridDiskRadial : Grid1d;
  o.m_ = &m;
  o.xmax_ = xmax;
  o.nx_ = nx;
  o.dt_ = dt;
  o.dx_ = xmax / (nx - 1);
  o.xg_.resize(nx);
  o.mcell_.resize(nx);
  o.wface_.resize(nx - 1);
  std::vector<double> gx, gw;
  gauss_legendre(5, gx, gw);
  for (int i = 0; i < nx; ++i) {
    o.xg_[i] = i * o.dx_;
    double a = std::max(0.0, o.xg_[i] - 0.5 * o.dx_);
    double b = std::min(xmax, o.xg_[i] + 0.5 * o.dx_);
    double mi = 0;
    for (int q = 0; q < 5; ++q)
      mi += 0.5 * (b - a) * gw[q] * weight_fn(m, 0.5 * (a + b) + 0.5 * (b - a) * gx[q]);
    o.mcell_[i] = mi;
    if (i < nx - 1) o.wface_[i] = weight_fn(m, o.xg_[i] + 0.5 * o.dx_);
  }
  return o;
}

double NeumannOracle::radial_of(const Vec& x) const {
  if (m_->name == "hemisphere") return 2.0 * std::atan(x.norm());
  if (m_->name == "disk") return x.norm();
  return x[0];
}

Vec NeumannOracle::chart_of_radial(double s) const {
  Vec x = Vec::Zero(m_->dim);
  if (m_->name == "hemisphere")
    x[0] = std::tan(0.5 * s);
  else
    x[0] = s;
  return x;
}

double NeumannOracle::image_value(const TestFn& f, const Vec& x, double t) const {
  const int d = m_->dim;
  const double kap = m_->kappa;
  const double decay = std::exp(-0.5 * kap * t);
  const double var = kap != 0.0 ? (1.0 - std::exp(-kap * t)) / kap : t;
  const double sig = std::sqrt(var);

  // reflected coordinate: composite Gauss-Legendre against the folded kernel
  const double mu0 = x[0] * decay;
  const double ymax = mu0 + 12.0 * sig;
  int npan = std::min(600, std::max(24, static_cast<int>(std::ceil(2.0 * ymax / sig))));
  std::vector<double> glx, glw;
  gauss_legendre(12, glx, glw);
  std::vector<double> y0, w0;
  const double pw = ymax / npan;
  for (int p = 0; p < npan; ++p) {
    double a = p * pw;
    for (int q = 0; q < 12; ++q) {
      double y = a + 0.5 * pw * (1.0 + glx[q]);
      double rho = (phi((y - mu0) / sig) + phi((y + mu0) / sig)) / sig;
      y0.push_back(y);
      w0.push_back(0.5 * pw * glw[q] * rho);
    }
  }

  // free coordinates: Gauss-Hermite
  std::vector<double> ghx, ghw;
  std::vector<std::vector<double>> fy(d), fw(d);
  fy[0] = y0;
  fw[0] = w0;
  if (d > 1) {
    gauss_hermite(60, ghx, ghw);
    const double s2 = sig * std::sqrt(2.0), invsp = 1.0 / std::sqrt(M_PI);
    for (int j = 1; j < d; ++j) {
      double mu = x[j] * decay;
      for (int q = 0; q < 60; ++q) {
        fy[j].push_back(mu + s2 * ghx[q]);
        fw[j].push_back(ghw[q] * invsp);
      }
    }
  }

  const std::size_t n0 = fy[0].size();
  const std::size_t n1 = d > 1 ? fy[1].size() : 1;
  const std::size_t n2 = d > 2 ? fy[2].size() : 1;
  Vec y(d);
  double acc = 0;
  for (std::size_t i2 = 0; i2 < n2; ++i2)
    for (std::size_t i1 = 0; i1 < n1; ++i1)
      for (std::size_t i0 = 0; i0 < n0; ++i0) {
        y[0] = fy[0][i0];
        if (d > 1) y[1] = fy[1][i1];
        if (d > 2) y[2] = fy[2][i2];
        double w = fw[0][i0];
        if (d > 1) w *= fw[1][i1];
        if (d > 2) w *= fw[2][i2];
        acc += w * f.f(y);
      }
  return acc;
}

std::vector<double> NeumannOracle::solve_grid(const TestFn& f, double t) const {
  const int nx = nx_;
  std::vector<double> u(nx);
  for (int i = 0; i < nx; ++i) u[i] = f.f(chart_of_radial(xg_[i]));
  if (t <= 0) return u;
  const long long nsteps = std::max<long long>(1, llround(std::ceil(t / dt_ - 1e-9)));
  const double dte = t / nsteps;
  const double c = 0.25 * dte;  // Crank-Nicolson for du/dt = (1/2) A u

  std::vector<double> up(nx, 0.0), lo(nx, 0.0);
  for (int i = 0; i < nx; ++i) {
    if (i < nx - 1) up[i] = wface_[i] / (mcell_[i] * dx_ * dx_);
    if (i > 0) lo[i] = wface_[i - 1] / (mcell_[i] * dx_ * dx_);
  }
  std::vector<double> dl(nx), du(nx), dd(nx), rhs(nx), cp(nx);
  for (int i = 0; i < nx; ++i) {
    dd[i] = 1.0 + c * (up[i] + lo[i]);
    du[i] = -c * up[i];
    dl[i] = -c * lo[i];
  }
  for (long long s = 0; s < nsteps; ++s) {
    for (int i = 0; i < nx; ++i) {
      double Au = 0;
      if (i < nx - 1) Au += up[i] * (u[i + 1] - u[i]);
      if (i > 0) Au -= lo[i] * (u[i] - u[i - 1]);
      rhs[i] = u[i] + c * Au;
    }
    // Thomas solve
    cp[0] = du[0] / dd[0];
    rhs[0] /= dd[0];
    for (int i = 1; i < nx; ++i) {
      double mden = dd[i] - dl[i] * cp[i - 1];
      cp[i] = du[i] / mden;
      rhs[i] = (rhs[i] - dl[i] * rhs[i - 1]) / mden;
    }
    u[nx - 1] = rhs[nx - 1];
    for (int i = nx - 2; i >= 0; --i) u[i] = rhs[i] - cp[i] * u[i + 1];
  }
  return u;
}

const std::vector<double>& NeumannOracle::slice(const TestFn& f, double t) const {
  std::lock_guard<std::mutex> lk(*cache_mu_);
  auto key = std::make_pair(f.id, llround(t * 1e9));
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto u = solve_grid(f, t);
  return cache_.emplace(key, std::move(u)).first->second;
}

double NeumannOracle::slice_at(const std::vector<double>& u, double s) const {
  s = std::abs(s);  // Neumann even extension below the origin
  if (s > xmax_ + 1e-12) throw std::out_of_range("oracle: point outside truncation");
  s = std::min(s, xmax_);
  int i0 = static_cast<int>(std::floor(s / dx_)) - 1;
  i0 = std::max(0, std::min(nx_ - 4, i0));
  // 4-point Lagrange
  double r = 0;
  for (int a = 0; a < 4; ++a) {
    double la = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) la *= (s - xg_[i0 + b]) / (xg_[i0 + a] - xg_[i0 + b]);
    r += la * u[i0 + a];
  }
  return r;
}

double NeumannOracle::value(const TestFn& f, const Vec& x, double t) const {
  if (t < 0) throw std::invalid_argument("oracle: t < 0");
  if (t == 0) return f.f(x);
  if (kind_ == ImageHalfline || kind_ == ImageHalfspace) return image_value(f, x, t);
  return slice_at(slice(f, t), radial_of(x));
}

double NeumannOracle::grad(const TestFn& f, const Vec& x, double t, const Vec& dir,
                           double step) const {
  bool gridk = kind_ == Grid1d || kind_ == GridDiskRadial;
  if (step == 0) step = gridk ? 8.0 * dx_ : 0.02;
  if (gridk && step < 2.0 * dx_)
    throw std::invalid_argument("oracle: differentiation step below grid resolution");
  auto V = [&](double h) {
    if (gridk) {
      const auto& u = slice(f, t);
      double s = radial_of(x);
      return (slice_at(u, s + h) - slice_at(u, s - h)) / (2.0 * h);
    }
    Vec e = dir.size() ? dir : Vec(Vec::Unit(m_->dim, 0));
    return (value(f, Vec(x + h * e), t) - value(f, Vec(x - h * e), t)) / (2.0 * h);
  };
  double d1 = V(step), d2 = V(0.5 * step);
  return (4.0 * d2 - d1) / 3.0;
}

double NeumannOracle::hess(const TestFn& f, const Vec& x, double t, const Vec& dir,
                           double step) const {
  bool gridk = kind_ == Grid1d || kind_ == GridDiskRadial;
  if (step == 0) step = gridk ? 8.0 * dx_ : 0.02;
  if (gridk && step < 2.0 * dx_)
    throw std::invalid_argument("oracle: differentiation step below grid resolution");
  auto H = [&](double h) {
    if (gridk) {
      const auto& u = slice(f, t);
      double s = radial_of(x);
      return (slice_at(u, s + h) - 2.0 * slice_at(u, s) + slice_at(u, s - h)) / (h * h);
    }
    Vec e = dir.size() ? dir : Vec(Vec::Unit(m_->dim, 0));
    return (value(f, Vec(x + h * e), t) - 2.0 * value(f, x, t) +
            value(f, Vec(x - h * e), t)) /
           (h * h);
  };
  double d1 = H(step), d2 = H(0.5 * step);
  return (4.0 * d2 - d1) / 3.0;
}

double NeumannOracle::Lf(const TestFn& f, const Vec& x, double t, bool temporal) const {
  if (temporal) {
    double dtt = kind_ == Grid1d || kind_ == GridDiskRadial
                     ? std::max(4.0 * dt_, 1e-4 * std::max(t, 1.0))
                     : 1e-3;
    auto D = [&](double h) {
      return (value(f, x, t + h) - value(f, x, t - h)) / (2.0 * h);
    };
    return 2.0 * (4.0 * D(0.5 * dtt) - D(dtt)) / 3.0;
  }
  if (kind_ == Grid1d || kind_ == GridDiskRadial) {
    // radial flux form (1/w)(w u')' by finite differences on the slice
    const auto& u = slice(f, t);
    double s = radial_of(x);
    double h = 8.0 * dx_;
    if (s - h < 0) throw std::invalid_argument("oracle: Lf too close to the origin");
    auto Lh = [&](double hh) {
      double wp = weight_fn(*m_, s + 0.5 * hh), wm = weight_fn(*m_, s - 0.5 * hh);
      return (wp * (slice_at(u, s + hh) - slice_at(u, s)) -
              wm * (slice_at(u, s) - slice_at(u, s - hh))) /
             (weight_fn(*m_, s) * hh * hh);
    };
    return (4.0 * Lh(0.5 * h) - Lh(h)) / 3.0;
  }
  // flat chart: Laplacian + Z . grad by central differences per coordinate
  double acc = 0;
  Vec g(m_->dim);
  Vec Zx = m_->Z(x);
  for (int j = 0; j < m_->dim; ++j) {
    Vec e = Vec::Unit(m_->dim, j);
    acc += hess(f, x, t, e);
    g[j] = grad(f, x, t, e);
  }
  return acc + Zx.dot(g);
}

double NeumannOracle::hess_radial_origin(const TestFn& f, double t) const {
  if (kind_ != Grid1d && kind_ != GridDiskRadial)
    throw std::invalid_argument("oracle: origin fit needs a grid oracle");
  const auto& u = slice(f, t);
  // least-squares even fit u(s) = a + b s^2 + c s^4 + d s^6 on the first nodes
  const int npts = 12;
  Eigen::MatrixXd A(npts, 4);
  Eigen::VectorXd rhs(npts);
  for (int i = 0; i < npts; ++i) {
    double s2 = xg_[i] * xg_[i];
    A(i, 0) = 1.0;
    A(i, 1) = s2;
    A(i, 2) = s2 * s2;
    A(i, 3) = s2 * s2 * s2;
    rhs[i] = u[i];
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
  return 2.0 * coef[1];
}

double NeumannOracle::conservation_drift(const TestFn& f, double t) const {
  if (kind_ != Grid1d && kind_ != GridDiskRadial)
    throw std::invalid_argument("oracle: conservation needs a grid oracle");
  const auto& u = slice(f, t);
  double m0 = 0, m1 = 0;
  for (int i = 0; i < nx_; ++i) {
    m0 += mcell_[i] * f.f(chart_of_radial(xg_[i]));
    m1 += mcell_[i] * u[i];
  }
  return std::abs(m1 - m0);
}

}  // namespace bismut
