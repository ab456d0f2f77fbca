#include "integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

namespace expfam {

namespace {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK qk15 nodes and weights).
constexpr std::array<double, 8> kXgk = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr std::array<double, 4> kWg = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

using Fn1D = std::function<double(double)>;

struct Segment {
  double a, b, value, err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

Segment gk15(const Fn1D& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> fv{};
  // fv index: 0..6 are c - h*xgk[0..6], 7 is center, 8..14 are c + h*xgk[6..0]
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  evals += 15;
  double resk = kWgk[7] * fv[7];
  double resabs = std::abs(resk);
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  }
  double resg = kWg[3] * fv[7];
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fv[7] - reskh);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::abs(fv[i] - reskh) + std::abs(fv[14 - i] - reskh));
  resasc *= h;
  resabs *= h;
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (!std::isfinite(resk))
    throw ConvergenceError("quadrature: integrand produced a non-finite value");
  return {a, b, resk * h, err};
}

double adaptive_on_interval(const Fn1D& f, double a, double b, const Scheme& scheme,
                            long& evals, double* err_out) {
  std::priority_queue<Segment> heap;
  double total = 0.0, total_err = 0.0;
  const int initial = 8;
  for (int i = 0; i < initial; ++i) {
    double lo = a + (b - a) * i / initial;
    double hi = a + (b - a) * (i + 1) / initial;
    Segment s = gk15(f, lo, hi, evals);
    total += s.value;
    total_err += s.err;
    heap.push(s);
  }
  const double min_width = (b - a) * 1e-14;
  while (total_err > std::max(scheme.abs_tol, scheme.rel_tol * std::abs(total))) {
    if (evals + 30 > scheme.max_evals)
      throw ConvergenceError("quadrature: eval budget exhausted before reaching tolerance");
    Segment worst = heap.top();
    heap.pop();
    if (worst.b - worst.a < min_width)
      throw ConvergenceError("quadrature: interval too small to refine further");
    double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid, evals);
    Segment right = gk15(f, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
  }
  if (err_out) *err_out = total_err;
  return total;
}

IntegralResult integrate_half_line(const Integrand& f, const Scheme& scheme) {
  // x = t/(1-t) maps (0,1) onto (0,inf) with Jacobian 1/(1-t)^2.
  Fn1D g = [&f](double t) {
    double om = 1.0 - t;
    double x = t / om;
    double fx = f(std::span<const double>(&x, 1));
    return fx / (om * om);
  };
  IntegralResult r;
  r.value = adaptive_on_interval(g, 0.0, 1.0, scheme, r.evals, &r.err_estimate);
  return r;
}

IntegralResult integrate_real_line(const Integrand& f, const Scheme& scheme) {
  // x = t/(1-t^2) maps (-1,1) onto R with Jacobian (1+t^2)/(1-t^2)^2.
  Fn1D g = [&f](double t) {
    double om = 1.0 - t * t;
    double x = t / om;
    double fx = f(std::span<const double>(&x, 1));
    return fx * (1.0 + t * t) / (om * om);
  };
  IntegralResult r;
  r.value = adaptive_on_interval(g, -1.0, 1.0, scheme, r.evals, &r.err_estimate);
  return r;
}

IntegralResult integrate_series(const Integrand& f, const Support& support,
                                const Scheme& scheme) {
  IntegralResult r;
  if (support.kind == Support::Kind::Binary) {
    double x0 = 0.0, x1 = 1.0;
    r.value = f(std::span<const double>(&x0, 1)) + f(std::span<const double>(&x1, 1));
    r.evals = 2;
    return r;
  }
  // Sum over the naturals; stop once a geometric bound on the discarded tail
  // drops below tail_cut relative to the partial sum.
  double sum = 0.0;
  double prev_abs = -1.0;
  int decaying = 0;
  for (long k = 0;; ++k) {
    if (k >= scheme.max_evals)
      throw ConvergenceError("series-sum: term budget exhausted before tail bound met");
    double xk = static_cast<double>(k);
    double term = f(std::span<const double>(&xk, 1));
    if (support.log_weight) term *= std::exp(support.log_weight(k));
    if (!std::isfinite(term))
      throw ConvergenceError("series-sum: term is not finite");
    sum += term;
    ++r.evals;
    double a = std::abs(term);
    if (prev_abs > 0.0 && a > 0.0) {
      double ratio = a / prev_abs;
      decaying = ratio < 0.9 ? decaying + 1 : 0;
      if (decaying >= 3) {
        double bound = a * ratio / (1.0 - ratio);
        if (bound <= scheme.tail_cut * std::max(std::abs(sum), 1e-300)) {
          r.err_estimate = bound;
          break;
        }
      }
    } else if (a == 0.0 && prev_abs == 0.0 && k > 2) {
      r.err_estimate = 0.0;
      break;
    }
    prev_abs = a;
  }
  r.value = sum;
  return r;
}

// Iterated adaptive quadrature over R^d: the outer integral sees the inner
// one as a function evaluation. Inner levels run at a tighter tolerance.
IntegralResult integrate_tensor(const Integrand& f, int dim, const Scheme& scheme) {
  if (dim == 1) return integrate_real_line(f, scheme);
  long evals = 0;
  std::function<double(Vec&, int, const Scheme&)> level =
      [&](Vec& point, int axis, const Scheme& level_scheme) -> double {
    Fn1D g = [&](double t) {
      double om = 1.0 - t * t;
      point[axis] = t / om;
      double v;
      if (axis + 1 == dim) {
        v = f(point);
        ++evals;
        if (evals > scheme.max_evals)
          throw ConvergenceError("tensor quadrature: eval budget exhausted");
      } else {
        Scheme inner = level_scheme;
        inner.abs_tol = level_scheme.abs_tol * 0.1;
        inner.rel_tol = level_scheme.rel_tol * 0.1;
        v = level(point, axis + 1, inner);
      }
      return v * (1.0 + t * t) / (om * om);
    };
    long local = 0;
    return adaptive_on_interval(g, -1.0, 1.0, level_scheme, local, nullptr);
  };
  Vec point(dim, 0.0);
  IntegralResult r;
  double outer_err = 0.0;
  Fn1D g0 = [&](double t) {
    double om = 1.0 - t * t;
    point[0] = t / om;
    Scheme inner = scheme;
    inner.abs_tol = scheme.abs_tol * 0.1;
    inner.rel_tol = scheme.rel_tol * 0.1;
    double v = level(point, 1, inner);
    return v * (1.0 + t * t) / (om * om);
  };
  long outer_evals = 0;
  r.value = adaptive_on_interval(g0, -1.0, 1.0, scheme, outer_evals, &outer_err);
  r.err_estimate = outer_err + 10.0 * scheme.abs_tol;
  r.evals = evals;
  return r;
}

std::mt19937_64 rng_for(std::uint64_t seed, std::string_view tag) {
  return std::mt19937_64(splitmix64(seed ^ fnv1a64(tag)));
}

// Uniform in [0,1) from the top 53 bits; keeps draws identical across
// standard-library implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

IntegralResult integrate_mc(const Integrand& f, int dim, const McProposal& proposal,
                            const Scheme& scheme, std::string_view tag) {
  std::mt19937_64 rng = rng_for(scheme.seed, tag);
  const long n = std::max<long>(scheme.max_evals, 1000);
  Vec x(dim);
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    proposal.sample(rng, x);
    double lw = proposal.log_pdf(x);
    double v = f(x) * std::exp(-lw);
    if (!std::isfinite(v))
      throw ConvergenceError("monte-carlo: non-finite importance ratio");
    double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  IntegralResult r;
  r.value = mean;
  double var = m2 / (static_cast<double>(n) - 1.0);
  r.err_estimate = 3.0 * std::sqrt(var / static_cast<double>(n));
  r.evals = n;
  return r;
}

Scheme::Kind Scheme::resolve(const Support& support) const {
  Kind k = kind;
  if (k == Kind::Auto) {
    switch (support.kind) {
      case Support::Kind::HalfLine:
      case Support::Kind::RealLine:
        return Kind::AdaptiveQuadrature;
      case Support::Kind::Naturals:
      case Support::Kind::Binary:
        return Kind::SeriesSum;
      case Support::Kind::RealVector:
        return support.dim <= 3 ? Kind::TensorQuadrature : Kind::MonteCarlo;
    }
  }
  switch (support.kind) {
    case Support::Kind::HalfLine:
    case Support::Kind::RealLine:
      if (k != Kind::AdaptiveQuadrature)
        throw ArgumentError("scheme: 1-d continuous supports use adaptive-quadrature");
      break;
    case Support::Kind::Naturals:
    case Support::Kind::Binary:
      if (k != Kind::SeriesSum)
        throw ArgumentError("scheme: discrete supports use series-sum");
      break;
    case Support::Kind::RealVector:
      if (k != Kind::TensorQuadrature && k != Kind::MonteCarlo)
        throw ArgumentError("scheme: vector supports use tensor-quadrature or monte-carlo");
      break;
  }
  return k;
}

IntegralResult integrate(const Integrand& f, const Support& support, const Scheme& scheme,
                         std::string_view tag, const McProposal* proposal) {
  switch (scheme.resolve(support)) {
    case Scheme::Kind::AdaptiveQuadrature:
      return support.kind == Support::Kind::HalfLine ? integrate_half_line(f, scheme)
                                                     : integrate_real_line(f, scheme);
    case Scheme::Kind::SeriesSum:
      return integrate_series(f, support, scheme);
    case Scheme::Kind::TensorQuadrature:
      return integrate_tensor(f, support.dim, scheme);
    case Scheme::Kind::MonteCarlo:
      if (!proposal)
        throw ArgumentError("monte-carlo integration requires a proposal density");
      return integrate_mc(f, support.dim, *proposal, scheme, tag);
    case Scheme::Kind::Auto:
      break;
  }
  throw ArgumentError("integrate: unresolved scheme kind");
}

namespace {

const char* kind_name(Scheme::Kind k) {
  switch (k) {
    case Scheme::Kind::Auto: return "auto";
    case Scheme::Kind::AdaptiveQuadrature: return "adaptive-quadrature";
    case Scheme::Kind::TensorQuadrature: return "tensor-quadrature";
    case Scheme::Kind::MonteCarlo: return "monte-carlo";
    case Scheme::Kind::SeriesSum: return "series-sum";
  }
  return "auto";
}

}  // namespace

Scheme Scheme::from_json(const std::string& text) {
  Scheme s;
  if (text.empty()) return s;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scheme: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scheme: expected a JSON object");
  if (j.contains("kind")) {
    std::string k = j["kind"].get<std::string>();
    if (k == "auto") s.kind = Kind::Auto;
    else if (k == "adaptive-quadrature") s.kind = Kind::AdaptiveQuadrature;
    else if (k == "tensor-quadrature") s.kind = Kind::TensorQuadrature;
    else if (k == "monte-carlo") s.kind = Kind::MonteCarlo;
    else if (k == "series-sum") s.kind = Kind::SeriesSum;
    else throw ParseError("scheme: unknown kind '" + k + "'");
  }
  if (j.contains("abs_tol")) s.abs_tol = j["abs_tol"].get<double>();
  if (j.contains("rel_tol")) s.rel_tol = j["rel_tol"].get<double>();
  if (j.contains("max_evals")) s.max_evals = j["max_evals"].get<long>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tail_cut")) s.tail_cut = j["tail_cut"].get<double>();
  if (s.abs_tol <= 0.0 || s.rel_tol <= 0.0 || s.tail_cut <= 0.0)
    throw ParseError("scheme: tolerances must be positive");
  if (s.max_evals <= 0) throw ParseError("scheme: max_evals must be positive");
  return s;
}

std::string Scheme::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  j["abs_tol"] = abs_tol;
  j["rel_tol"] = rel_tol;
  j["max_evals"] = max_evals;
  j["seed"] = seed;
  j["tail_cut"] = tail_cut;
  return j.dump();
}

}  // namespace expfam
