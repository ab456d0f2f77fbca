#include "legendre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "statdiv.hpp"

namespace expfam {

namespace {

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec residual(const Generator& gen, const Vec& theta, const Vec& eta) {
  Vec r = gen.gradient(theta);
  for (size_t i = 0; i < r.size(); ++i) r[i] -= eta[i];
  return r;
}

// Solve A x = b by Gaussian elimination with partial pivoting; A row-major.
Vec solve_linear(Vec a, Vec b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-300)
      throw ConvergenceError("linear solve: singular matrix");
    if (pivot != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

// Central-difference Jacobian of the gradient map, row-major.
Vec fd_jacobian(const Generator& gen, const Vec& theta) {
  const int n = gen.param_len();
  Vec jac(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    double h = std::max(1e-6, 1e-7 * std::abs(theta[j]));
    Vec tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    int shrink = 0;
    while ((!gen.in_domain(tp) || !gen.in_domain(tm)) && shrink < 40) {
      h *= 0.5;
      tp[j] = theta[j] + h;
      tm[j] = theta[j] - h;
      ++shrink;
    }
    if (!gen.in_domain(tp) || !gen.in_domain(tm))
      throw ConvergenceError("newton: cannot difference the gradient at the boundary");
    Vec gp = gen.gradient(tp);
    Vec gm = gen.gradient(tm);
    for (int i = 0; i < n; ++i) jac[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
  }
  return jac;
}

std::string format_point(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

SolveResult try_solve_gradient_equation(const Generator& gen, const Vec& eta,
                                        const NewtonOptions& opts) {
  if (static_cast<int>(eta.size()) != gen.param_len())
    throw ArgumentError("solver: eta has wrong length");
  if (gen.probe_grid().empty())
    throw ArgumentError("solver: generator '" + gen.name() + "' has no probe grid");

  SolveResult out;
  for (const Vec& candidate : gen.probe_grid()) {
    if (!gen.in_domain(candidate)) continue;
    double rn = norm2(residual(gen, candidate, eta));
    if (rn < out.residual) {
      out.residual = rn;
      out.theta = candidate;
    }
  }
  if (out.theta.empty()) return out;

  Vec theta = out.theta;
  double rn = out.residual;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (rn <= opts.residual_tol) {
      out.theta = theta;
      out.residual = rn;
      out.iters = iter;
      out.converged = true;
      return out;
    }
    Vec r = residual(gen, theta, eta);
    Vec jac;
    try {
      jac = fd_jacobian(gen, theta);
    } catch (const ConvergenceError&) {
      break;
    }
    Vec step;
    try {
      Vec rhs = r;
      for (double& v : rhs) v = -v;
      step = solve_linear(jac, rhs);
    } catch (const ConvergenceError&) {
      break;
    }
    double s = 1.0;
    bool accepted = false;
    for (int k = 0; k < opts.max_halvings; ++k) {
      Vec trial(theta.size());
      for (size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] + s * step[i];
      if (gen.in_domain(trial)) {
        double trial_rn = norm2(residual(gen, trial, eta));
        if (trial_rn < rn * (1.0 - 0.25 * s) || trial_rn <= opts.residual_tol) {
          theta = trial;
          rn = trial_rn;
          accepted = true;
          break;
        }
      }
      s *= 0.5;
    }
    out.iters = iter + 1;
    if (!accepted) break;
  }
  out.theta = theta;
  out.residual = rn;
  out.converged = rn <= opts.residual_tol;
  return out;
}

Vec solve_gradient_equation(const Generator& gen, const Vec& eta,
                            const NewtonOptions& opts) {
  SolveResult r = try_solve_gradient_equation(gen, eta, opts);
  if (!r.converged) {
    std::ostringstream os;
    os << "solver: no convergence inverting grad " << gen.name() << " at eta "
       << format_point(eta) << "; last iterate " << format_point(r.theta)
       << " with residual " << r.residual;
    throw ConvergenceError(os.str());
  }
  return r.theta;
}

ConjugatePair::ConjugatePair(Generator primal, NewtonOptions opts)
    : primal_(std::move(primal)), opts_(opts) {
  Generator p = primal_;
  NewtonOptions o = opts_;
  std::vector<Vec> dual_grid;
  for (const Vec& t : primal_.probe_grid())
    if (primal_.in_domain(t)) dual_grid.push_back(primal_.gradient(t));
  dual_ = Generator(
      primal_.name() + "*", primal_.param_len(),
      [p, o](const Vec& eta) {
        Vec theta = solve_gradient_equation(p, eta, o);
        return p.inner(theta, eta) - p.value(theta);
      },
      [p, o](const Vec& eta) {
        return try_solve_gradient_equation(p, eta, o).converged;
      },
      [p, o](const Vec& eta) { return solve_gradient_equation(p, eta, o); },
      primal_.layout(), primal_.matrix_dim());
  dual_.set_probe_grid(std::move(dual_grid));
}

Vec ConjugatePair::to_primal(const Vec& eta) const {
  return solve_gradient_equation(primal_, eta, opts_);
}

SolveResult ConjugatePair::try_to_primal(const Vec& eta) const {
  return try_solve_gradient_equation(primal_, eta, opts_);
}

double ConjugatePair::conjugate(const Vec& eta) const {
  Vec theta = to_primal(eta);
  return primal_.inner(theta, eta) - primal_.value(theta);
}

double conjugate(const Generator& gen, const Vec& eta) {
  return ConjugatePair(gen).conjugate(eta);
}

double double_conjugate_gap(const Generator& gen, const Vec& theta) {
  ConjugatePair pair(gen);
  ConjugatePair double_pair(pair.dual());
  return std::abs(double_pair.conjugate(theta) - gen.value(theta));
}

double CanonicalRoutes::max_spread() const {
  double lo = std::min(std::min(bregman_primal, fenchel_young),
                       std::min(bregman_dual, fenchel_young_dual));
  double hi = std::max(std::max(bregman_primal, fenchel_young),
                       std::max(bregman_dual, fenchel_young_dual));
  return hi - lo;
}

CanonicalRoutes canonical_divergence(const ConjugatePair& pair, const Vec& tp,
                                     const Vec& tq) {
  const Generator& g = pair.primal();
  Vec eta_p = pair.to_dual(tp);
  Vec eta_q = pair.to_dual(tq);
  CanonicalRoutes r;
  r.bregman_primal = bregman(g, tp, tq);
  r.fenchel_young = g.value(tp) + pair.conjugate(eta_q) - g.inner(tp, eta_q);
  r.bregman_dual = bregman(pair.dual(), eta_q, eta_p);
  ConjugatePair double_pair(pair.dual());
  r.fenchel_young_dual =
      pair.conjugate(eta_q) + double_pair.conjugate(tp) - g.inner(eta_q, tp);
  return r;
}

double negentropy_gap(const Family& family, const Vec& theta, const Scheme& scheme) {
  ConjugatePair pair(family.cumulant_generator());
  double fstar = pair.conjugate(pair.to_dual(theta));
  double entropy = entropy_extended(family_density(family, theta, true), scheme);
  return std::abs(fstar + entropy);
}

double affine_reparam_gap(const Generator& gen, const Vec& a_rowmajor, const Vec& b,
                          const Vec& c, double d, const Vec& t1, const Vec& t2) {
  if (gen.layout() != ParamLayout::Vector)
    throw ArgumentError("affine_reparam_gap: vector-layout generators only");
  const int n = gen.param_len();
  if (static_cast<int>(a_rowmajor.size()) != n * n ||
      static_cast<int>(b.size()) != n || static_cast<int>(c.size()) != n)
    throw ArgumentError("affine_reparam_gap: dimension mismatch");

  Generator g = gen;
  Vec a = a_rowmajor, bb = b, cc = c;
  auto push_forward = [a, bb, n](const Vec& u) {
    Vec t(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = bb[i];
      for (int j = 0; j < n; ++j) s += a[i * n + j] * u[j];
      t[i] = s;
    }
    return t;
  };
  Generator bar(
      gen.name() + "-affine", n,
      [g, push_forward, cc, d](const Vec& u) {
        double lin = d;
        for (int i = 0; i < static_cast<int>(u.size()); ++i) lin += cc[i] * u[i];
        return g.value(push_forward(u)) + lin;
      },
      [g, push_forward](const Vec& u) { return g.in_domain(push_forward(u)); },
      [g, push_forward, a, cc, n](const Vec& u) {
        Vec grad = g.gradient(push_forward(u));
        Vec out(n, 0.0);
        for (int i = 0; i < n; ++i) {
          double s = cc[i];
          for (int j = 0; j < n; ++j) s += a[j * n + i] * grad[j];
          out[i] = s;
        }
        return out;
      });

  auto pull_back = [&](const Vec& t) {
    Vec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = t[i] - b[i];
    return solve_linear(a_rowmajor, rhs);
  };
  Vec u1 = pull_back(t1);
  Vec u2 = pull_back(t2);
  return std::abs(bregman(gen, t1, t2) - bregman(bar, u1, u2));
}

BoundaryDiagnostic boundary_derivative_diagnostic(const Generator& gen,
                                                  const Vec& interior,
                                                  const Vec& boundary) {
  BoundaryDiagnostic diag;
  const std::array<double, 3> lambdas = {1e-2, 1e-4, 1e-6};
  Vec direction(interior.size());
  for (size_t i = 0; i < interior.size(); ++i) direction[i] = interior[i] - boundary[i];
  for (int k = 0; k < 3; ++k) {
    double lam = lambdas[k];
    Vec point(interior.size());
    for (size_t i = 0; i < interior.size(); ++i)
      point[i] = lam * interior[i] + (1.0 - lam) * boundary[i];
    diag.derivative[k] = gen.inner(gen.gradient(point), direction);
  }
  diag.monotone_divergence =
      diag.derivative[0] > diag.derivative[1] && diag.derivative[1] > diag.derivative[2];
  return diag;
}

}  // namespace expfam
