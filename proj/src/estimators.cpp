#include "bismut/estimators.hpp"

#include "bismut/detmath.hpp"
#include "bismut/pathsim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace bismut {

TestFn make_test_fn(const std::string& id, const Model& m) {
  TestFn t;
  t.id = id;
  const int d = m.dim;
  if (id == "sq") {
    if (!m.flat) throw std::invalid_argument("sq: flat models only");
    t.f = [](const Vec& x) { return x.squaredNorm(); };
    t.grad = [](const Vec& x) { return Vec(2.0 * x); };
  } else if (id.rfind("coord:", 0) == 0) {
    int i = std::stoi(id.substr(6)) - 1;
    if (i < 0 || i >= d) throw std::invalid_argument("coord index out of range");
    t.f = [i](const Vec& x) { return x[i]; };
    t.grad = [i, d](const Vec& x) {
      (void)x;
      Vec g = Vec::Zero(d);
      g[i] = 1.0;
      return g;
    };
  } else if (id == "costheta") {
    if (m.name != "hemisphere") throw std::invalid_argument("costheta: hemisphere only");
    t.f = [](const Vec& x) {
      double r2 = x.squaredNorm();
      return (1.0 - r2) / (1.0 + r2);
    };
    t.grad = [](const Vec& x) {
      double s = 1.0 + x.squaredNorm();
      return Vec(-4.0 * x / (s * s));
    };
  } else if (id.rfind("gauss:", 0) == 0) {
    double a = std::stod(id.substr(6));
    t.f = [a](const Vec& x) { return std::exp(-a * x.squaredNorm()); };
    t.grad = [a](const Vec& x) {
      return Vec(-2.0 * a * std::exp(-a * x.squaredNorm()) * x);
    };
  } else if (id == "const") {
    t.f = [](const Vec&) { return 1.0; };
    t.grad = [d](const Vec&) { return Vec(Vec::Zero(d)); };
  } else {
    throw std::invalid_argument("unknown test function: " + id);
  }
  return t;
}

const char* formula_name(Formula f) {
  switch (f) {
    case Formula::Grad13: return "grad13";
    case Formula::Grad14: return "grad14";
    case Formula::LPf: return "lpf";
    case Formula::Hess: return "hess";
    case Formula::HessGrad: return "hessgrad";
    case Formula::Semigroup: return "semigroup";
  }
  return "?";
}

namespace {

constexpr std::int64_t kBlock = 4096;

const char* sched_name(const HSchedule& s) {
  switch (s.kind) {
    case HSchedule::Constant: return "constant";
    case HSchedule::Exponential: return "exponential";
    case HSchedule::LinearRamp: return "linear";
    case HSchedule::Tabulated: return "tabulated";
  }
  return "?";
}

template <class Fn>
void run_blocks(std::int64_t N, int threads, Fn fn) {
  const std::int64_t nblocks = (N + kBlock - 1) / kBlock;
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t b = next.fetch_add(1);
      if (b >= nblocks) break;
      fn(b, b * kBlock, std::min(N, (b + 1) * kBlock));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

struct PathFields {
  double xw = 0;      // weight sample
  double u = 0;       // secondary sample (f^2)
  bool rejected = false;
};

bool use_kernel(const EstimateRequest& req) {
  if (req.backend == KernelBackend::Generic) return false;
  return req.model->name == "half_line";
}

double assemble_weight(Formula formula, const EstimateRequest& req,
                       const Vec& xT, const Mat& ET, const Transport& tr,
                       double& u) {
  const TestFn& fn = req.fn;
  switch (formula) {
    case Formula::Grad13:
      return fn.grad(xT).dot(ET * (tr.Qlim * req.v));
    case Formula::Grad14:
      return fn.f(xT) * tr.I14;
    case Formula::LPf:
      return 2.0 * fn.f(xT) * (tr.Mval + tr.Zint);
    case Formula::Hess:
      return fn.f(xT) * (-tr.IWh + tr.Ih * tr.Ih - tr.Sh);
    case Formula::HessGrad:
      return -fn.grad(xT).dot(ET * (tr.Qt * req.v)) * tr.Ih +
             fn.grad(xT).dot(ET * tr.Wv);
    case Formula::Semigroup: {
      double fv = fn.f(xT);
      u = fv * fv;
      return fv;
    }
  }
  return 0.0;
}

}  // namespace

BismutEstimate estimate(const EstimateRequest& req, Formula formula) {
  auto t0 = std::chrono::steady_clock::now();
  const Model& m = *req.model;
  const std::int64_t N = req.N;
  const std::int64_t nblocks = (N + kBlock - 1) / kBlock;

  struct BlockSum {
    double sw = 0, sw2 = 0, su = 0, su2 = 0;
    std::int64_t n = 0, rej = 0;
  };
  std::vector<BlockSum> blocks(nblocks);
  std::atomic<bool> nan_abort{false};

  if (use_kernel(req)) {
    HalflineParams P;
    P.x0 = req.x0[0];
    P.kappa = m.kappa;
    P.n_penalty = req.n_penalty;
    P.seed = req.seed;
    halfline_fill_schedule(P, req.T, req.dt, &req.sched);
    const double qKT = P.qK[P.nsteps];
    const double v0 = req.v.size() > 0 ? req.v[0] : 1.0;

    run_blocks(N, req.threads, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
      HalflineRows rows;
      rows.resize(static_cast<std::size_t>(hi - lo));
      run_halfline(req.backend, P, static_cast<std::uint64_t>(lo),
                   static_cast<std::size_t>(hi - lo), rows, 0);
      BlockSum& bs = blocks[b];
      Vec x(1);
      for (std::int64_t i = 0; i < hi - lo; ++i) {
        x[0] = rows.xT[i];
        double w = 0, u = 0;
        switch (formula) {
          case Formula::Grad13:
            w = req.fn.grad(x)[0] * (rows.alive[i] * qKT * v0);
            break;
          case Formula::Grad14:
            w = req.fn.f(x) * rows.I14[i] * v0;
            break;
          case Formula::LPf:
            w = 2.0 * req.fn.f(x) * (rows.M[i] + rows.Zint[i]);
            break;
          case Formula::Hess: {
            double ih = rows.Ih[i] * v0;
            w = req.fn.f(x) * (ih * ih - P.Sh_det * v0 * v0);
            break;
          }
          case Formula::HessGrad:
            w = -req.fn.grad(x)[0] * qKT * v0 * (rows.Ih[i] * v0);
            break;
          case Formula::Semigroup: {
            double fv = req.fn.f(x);
            u = fv * fv;
            w = fv;
            break;
          }
        }
        if (std::isnan(w)) nan_abort = true;
        bs.sw += w;
        bs.sw2 += w * w;
        bs.su += u;
        bs.su2 += u * u;
        bs.n += 1;
      }
    });
  } else {
    run_blocks(N, req.threads, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
      PathSimulator sim(m, req.T, req.dt, req.seed);
      BlockSum& bs = blocks[b];
      PathState st;
      StepData s;
      Transport tr;
      for (std::int64_t p = lo; p < hi; ++p) {
        sim.init(st, req.x0);
        tr.init(m, req.v, req.n_penalty);
        bool bad = false;
        for (int i = 0; i < sim.nsteps(); ++i) {
          sim.step(st, static_cast<std::uint64_t>(p), i, s);
          if (s.bad) {
            bad = true;
            break;
          }
          double t = i * sim.dt();
          double hp = req.sched.gradient_kind() ? req.sched.hprime(t) : 0.0;
          double h = req.sched.gradient_kind() ? 0.0 : req.sched.h(t);
          double ht = req.sched.gradient_kind() ? 1.0 : req.sched.htilde(t);
          tr.step(s, h, ht, hp);
        }
        if (bad || tr.rejected) {
          bs.rej += 1;
          continue;
        }
        double u = 0;
        double w = assemble_weight(formula, req, st.x, st.E, tr, u);
        if (std::isnan(w)) nan_abort = true;
        bs.sw += w;
        bs.sw2 += w * w;
        bs.su += u;
        bs.su2 += u * u;
        bs.n += 1;
      }
    });
  }

  if (nan_abort) throw std::runtime_error("NaN encountered in test function / weight");

  BismutEstimate out;
  double sw = 0, sw2 = 0, su = 0, su2 = 0;
  for (const BlockSum& b : blocks) {
    sw += b.sw;
    sw2 += b.sw2;
    su += b.su;
    su2 += b.su2;
    out.n_samples += b.n;
    out.n_rejected += b.rej;
  }
  const double n = static_cast<double>(out.n_samples);
  out.value = sw / n;
  out.std_error = std::sqrt(std::max(0.0, sw2 / n - out.value * out.value) / n);
  out.value2 = su / n;
  out.std_error2 = std::sqrt(std::max(0.0, su2 / n - out.value2 * out.value2) / n);
  out.schedule_id = sched_name(req.sched);
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

MomentBundle estimate_moments(const EstimateRequest& req) {
  const Model& m = *req.model;
  const std::int64_t N = req.N;
  const std::int64_t nblocks = (N + kBlock - 1) / kBlock;
  constexpr int Q = 9;  // quantities tracked
  struct BlockSum {
    double s[Q] = {0}, s2[Q] = {0};
    std::int64_t n = 0, rej = 0;
  };
  std::vector<BlockSum> blocks(nblocks);
  const double Kneg = std::max(0.0, -m.K);
  const double sigII_neg = std::max(0.0, -m.sigma_II);
  const double sigdN = m.sigma_dN;

  run_blocks(N, req.threads, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
    PathSimulator sim(m, req.T, req.dt, req.seed);
    BlockSum& bs = blocks[b];
    PathState st;
    StepData s;
    Transport tr;
    for (std::int64_t p = lo; p < hi; ++p) {
      sim.init(st, req.x0);
      tr.init(m, req.v, req.n_penalty);
      double l = 0, ch = 0, iexp = 0;
      bool bad = false;
      for (int i = 0; i < sim.nsteps(); ++i) {
        sim.step(st, static_cast<std::uint64_t>(p), i, s);
        if (s.bad) {
          bad = true;
          break;
        }
        double t = i * sim.dt();
        double h = req.sched.h(t);
        ch += h * h * std::exp(Kneg * t + sigII_neg * l) * sim.dt();
        if (s.dl > 0) iexp += std::exp(0.5 * sigdN * l) * s.dl;
        l += s.dl;
        tr.step(s, h, req.sched.htilde(t), 0.0);
      }
      if (bad || tr.rejected) {
        bs.rej += 1;
        continue;
      }
      double fv = req.fn.f(st.x);
      Vec df = req.fn.grad ? req.fn.grad(st.x) : Vec(Vec::Zero(m.dim));
      Mat g = m.metric(st.x);
      double gf2 = df.dot(g.ldlt().solve(df));
      double vals[Q] = {fv,
                        fv * fv,
                        gf2,
                        std::exp(sigII_neg * l),
                        std::exp(sigdN * l),
                        iexp * iexp,
                        tr.sup_absM,
                        tr.Mval * tr.Mval,
                        ch};
      for (int q = 0; q < Q; ++q) {
        bs.s[q] += vals[q];
        bs.s2[q] += vals[q] * vals[q];
      }
      bs.n += 1;
    }
  });

  MomentBundle out;
  double S[Q] = {0}, S2[Q] = {0};
  for (const BlockSum& b : blocks) {
    for (int q = 0; q < Q; ++q) {
      S[q] += b.s[q];
      S2[q] += b.s2[q];
    }
    out.n_samples += b.n;
    out.n_rejected += b.rej;
  }
  const double n = static_cast<double>(out.n_samples);
  MeanSE* fields[Q] = {&out.Pf,         &out.Pf2,   &out.Pgradf2,
                       &out.exp_sigII_l, &out.exp_sigdN_l, &out.int_exp_dl_sq,
                       &out.supM,       &out.M2,    &out.Ch};
  for (int q = 0; q < Q; ++q) {
    fields[q]->mean = S[q] / n;
    fields[q]->se = std::sqrt(std::max(0.0, S2[q] / n - fields[q]->mean * fields[q]->mean) / n);
  }
  // deterministic int h^2 ds on the same grid
  PathSimulator sim(m, req.T, req.dt, req.seed);
  for (int i = 0; i < sim.nsteps(); ++i) {
    double h = req.sched.h(i * sim.dt());
    out.int_h2 += h * h * sim.dt();
  }
  return out;
}

}  // namespace bismut
