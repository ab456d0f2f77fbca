#include "deform.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace expfam {

namespace {

constexpr double kPowerLogSwitch = 1e-8;

double require_positive(double u, const char* what) {
  if (!(u > 0.0)) throw DomainError(std::string(what) + ": argument must be positive");
  return u;
}

}  // namespace

MeanGenerator MeanGenerator::identity() {
  MeanGenerator m;
  m.tag_ = Tag::Identity;
  m.name_ = "identity";
  m.h_ = [](double u) { return u; };
  m.h_inv_ = [](double u) { return u; };
  return m;
}

MeanGenerator MeanGenerator::log() {
  MeanGenerator m;
  m.tag_ = Tag::Log;
  m.name_ = "log";
  m.h_ = [](double u) { return std::log(require_positive(u, "log generator")); };
  m.h_inv_ = [](double u) { return std::exp(u); };
  return m;
}

MeanGenerator MeanGenerator::power(double p) {
  if (!std::isfinite(p)) throw ArgumentError("power mean generator: p must be finite");
  if (std::abs(p) < kPowerLogSwitch) return log();  // cancellation in (u^p - 1)/p
  MeanGenerator m;
  m.tag_ = Tag::Power;
  m.p_ = p;
  m.name_ = "power(" + std::to_string(p) + ")";
  m.h_ = [p](double u) {
    return (std::pow(require_positive(u, "power generator"), p) - 1.0) / p;
  };
  m.h_inv_ = [p](double u) {
    double base = 1.0 + u * p;
    if (!(base > 0.0))
      throw DomainError("power generator inverse: 1 + u p must be positive");
    return std::pow(base, 1.0 / p);
  };
  return m;
}

MeanGenerator MeanGenerator::custom(std::string name, std::function<double(double)> h,
                                    std::function<double(double)> h_inv) {
  MeanGenerator m;
  m.tag_ = Tag::Custom;
  m.name_ = std::move(name);
  m.h_ = std::move(h);
  m.h_inv_ = std::move(h_inv);
  return m;
}

double MeanGenerator::h(double u) const { return h_(u); }
double MeanGenerator::h_inv(double u) const { return h_inv_(u); }

double MeanGenerator::h_prime(double u) const {
  switch (tag_) {
    case Tag::Identity: return 1.0;
    case Tag::Log: return 1.0 / require_positive(u, "log generator derivative");
    case Tag::Power:
      return std::pow(require_positive(u, "power generator derivative"), p_ - 1.0);
    case Tag::Custom: break;
  }
  throw ArgumentError("mean generator '" + name_ + "' has no closed-form derivative");
}

MeanGenerator MeanGenerator::inverse() const {
  if (tag_ == Tag::Identity) return identity();
  return custom(name_ + "^-1", h_inv_, h_);
}

MeanGenerator MeanGenerator::compose(const MeanGenerator& outer, const MeanGenerator& inner) {
  if (outer.tag_ == Tag::Identity) return inner;
  if (inner.tag_ == Tag::Identity) return outer;
  auto oh = outer.h_, ohi = outer.h_inv_;
  auto ih = inner.h_, ihi = inner.h_inv_;
  return custom(outer.name_ + "o" + inner.name_,
                [oh, ih](double u) { return oh(ih(u)); },
                [ohi, ihi](double u) { return ihi(ohi(u)); });
}

std::string MeanGenerator::to_json() const {
  nlohmann::json j;
  switch (tag_) {
    case Tag::Identity: j["tag"] = "identity"; break;
    case Tag::Log: j["tag"] = "log"; break;
    case Tag::Power:
      j["tag"] = "power";
      j["p"] = p_;
      break;
    case Tag::Custom:
      throw ArgumentError("mean generator '" + name_ + "' is not serializable");
  }
  return j.dump();
}

MeanGenerator MeanGenerator::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mean generator: ") + e.what());
  }
  if (!j.is_object() || !j.contains("tag") || !j["tag"].is_string())
    throw ParseError("mean generator: expected object with string 'tag'");
  std::string tag = j["tag"].get<std::string>();
  if (tag == "identity") return identity();
  if (tag == "log") return log();
  if (tag == "power") {
    if (!j.contains("p") || !j["p"].is_number())
      throw ParseError("mean generator: power tag requires numeric 'p'");
    return power(j["p"].get<double>());
  }
  throw ParseError("mean generator: unknown tag '" + tag + "'");
}

double qa_mean(const MeanGenerator& h, double x, double y, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ArgumentError("qa_mean: alpha must lie in [0,1]");
  return h.h_inv(alpha * h.h(x) + (1.0 - alpha) * h.h(y));
}

std::string DeformationSpec::to_json() const {
  nlohmann::json j;
  j["rho"] = nlohmann::json::parse(rho.to_json());
  j["tau"] = nlohmann::json::parse(tau.to_json());
  return j.dump();
}

DeformationSpec DeformationSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("deformation spec: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rho") || !j.contains("tau"))
    throw ParseError("deformation spec: expected object with 'rho' and 'tau'");
  DeformationSpec spec;
  spec.rho = MeanGenerator::from_json(j["rho"].dump());
  spec.tau = MeanGenerator::from_json(j["tau"].dump());
  return spec;
}

namespace {

Vec map_coords(const MeanGenerator& m, const Vec& theta) {
  Vec out(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) out[i] = m.h(theta[i]);
  return out;
}

Vec map_coords_inv(const MeanGenerator& m, const Vec& theta) {
  Vec out(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) out[i] = m.h_inv(theta[i]);
  return out;
}

}  // namespace

Generator deform(const Generator& gen, const DeformationSpec& spec) {
  Generator base = gen;
  MeanGenerator rho = spec.rho, tau = spec.tau;
  Generator out(
      "deform[" + gen.name() + ";" + rho.name() + "," + tau.name() + "]",
      gen.param_len(),
      [base, rho, tau](const Vec& t) { return tau.h_inv(base.value(map_coords(rho, t))); },
      [base, rho](const Vec& t) {
        try {
          return base.in_domain(map_coords(rho, t));
        } catch (const DomainError&) {
          return false;
        }
      },
      nullptr, gen.layout(), gen.matrix_dim());
  std::vector<Vec> grid;
  for (const Vec& t : gen.probe_grid()) {
    try {
      grid.push_back(map_coords_inv(rho, t));
    } catch (const DomainError&) {
    }
  }
  out.set_probe_grid(std::move(grid));
  return out;
}

Generator comparative_deform(const Generator& gen, const MeanGenerator& rho,
                             const MeanGenerator& tau) {
  Generator base = gen;
  Generator::GradFn grad = nullptr;
  if (rho.tag() == MeanGenerator::Tag::Identity && tau.has_derivative() &&
      gen.has_closed_gradient()) {
    MeanGenerator t = tau;
    grad = [base, t](const Vec& theta) {
      double scale = t.h_prime(base.value(theta));
      Vec g = base.gradient(theta);
      for (double& v : g) v *= scale;
      return g;
    };
  }
  MeanGenerator r = rho, t = tau;
  Generator out(
      tau.name() + "o" + gen.name() + "o" + rho.name() + "^-1", gen.param_len(),
      [base, r, t](const Vec& u) { return t.h(base.value(map_coords_inv(r, u))); },
      [base, r](const Vec& u) {
        try {
          return base.in_domain(map_coords_inv(r, u));
        } catch (const DomainError&) {
          return false;
        }
      },
      grad, gen.layout(), gen.matrix_dim());
  std::vector<Vec> grid;
  for (const Vec& p : gen.probe_grid()) {
    try {
      grid.push_back(map_coords(rho, p));
    } catch (const DomainError&) {
    }
  }
  out.set_probe_grid(std::move(grid));
  return out;
}

const char* verdict_name(ConvexVerdict v) {
  switch (v) {
    case ConvexVerdict::Convex: return "convex";
    case ConvexVerdict::NotConvex: return "not-convex";
    case ConvexVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

ConvexVerdict classify(double worst, double pass_slack, double fail_threshold) {
  if (worst <= pass_slack) return ConvexVerdict::Convex;
  if (worst > fail_threshold) return ConvexVerdict::NotConvex;
  return ConvexVerdict::Inconclusive;
}

}  // namespace

ConvexityReport convexity_certificate(const Generator& gen, const std::vector<Vec>& grid,
                                      double step) {
  if (!(step > 0.0)) throw ArgumentError("convexity_certificate: step must be positive");
  ConvexityReport rep;
  rep.step = step;
  rep.grid = grid;
  double worst = -std::numeric_limits<double>::infinity();
  // Central second differences along every coordinate axis.
  for (const Vec& x : grid) {
    if (!gen.in_domain(x)) continue;
    for (int i = 0; i < gen.param_len(); ++i) {
      Vec xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      if (!gen.in_domain(xp) || !gen.in_domain(xm)) continue;
      double d2 = gen.value(xp) - 2.0 * gen.value(x) + gen.value(xm);
      worst = std::max(worst, -d2);
    }
  }
  // Midpoint Jensen gaps between grid pairs.
  for (size_t a = 0; a < grid.size(); ++a) {
    for (size_t b = a + 1; b < grid.size(); ++b) {
      if (!gen.in_domain(grid[a]) || !gen.in_domain(grid[b])) continue;
      Vec mid(grid[a].size());
      for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (grid[a][i] + grid[b][i]);
      if (!gen.in_domain(mid)) continue;
      double gap = gen.value(mid) - 0.5 * (gen.value(grid[a]) + gen.value(grid[b]));
      worst = std::max(worst, gap);
    }
  }
  if (!std::isfinite(worst)) {
    rep.verdict = ConvexVerdict::Inconclusive;
    rep.worst_violation = 0.0;
    return rep;
  }
  rep.worst_violation = std::max(0.0, worst);
  rep.verdict = classify(worst, rep.pass_slack, rep.fail_threshold);
  return rep;
}

ConvexityReport mn_convexity_check(const Generator& gen, const MeanGenerator& rho,
                                   const MeanGenerator& tau, const std::vector<double>& grid,
                                   const std::vector<double>& alphas) {
  if (gen.param_len() != 1)
    throw ArgumentError("mn_convexity_check: one-dimensional generators only");

  // Route (a): sample the definition g(M_rho(x,y)) <= M_tau(g(x), g(y)).
  double worst = -std::numeric_limits<double>::infinity();
  ConvexityReport rep;
  for (double x : grid) rep.grid.push_back({x});
  for (size_t a = 0; a < grid.size(); ++a) {
    for (size_t b = 0; b < grid.size(); ++b) {
      if (a == b) continue;
      double x = grid[a], y = grid[b];
      if (!gen.in_domain({x}) || !gen.in_domain({y})) continue;
      double gx = gen.value({x}), gy = gen.value({y});
      for (double al : alphas) {
        double m = qa_mean(rho, x, y, al);
        if (!gen.in_domain({m})) continue;
        double lhs = gen.value({m});
        double rhs = tau.h_inv(al * tau.h(gx) + (1.0 - al) * tau.h(gy));
        worst = std::max(worst, lhs - rhs);
      }
    }
  }
  if (!std::isfinite(worst)) {
    rep.verdict = ConvexVerdict::Inconclusive;
    return rep;
  }
  rep.worst_violation = std::max(0.0, worst);
  ConvexVerdict sampled = classify(worst, rep.pass_slack, rep.fail_threshold);

  // Route (b): ordinary convexity of tau o g o rho^-1 on the mapped grid.
  Generator pulled = comparative_deform(gen, rho, tau);
  std::vector<Vec> mapped;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : grid) {
    double u = rho.h(x);
    mapped.push_back({u});
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  double step = std::max(1e-5, 1e-2 * (hi - lo) / std::max<size_t>(grid.size(), 2));
  ConvexityReport ordinary = convexity_certificate(pulled, mapped, step);

  bool conflict = (sampled == ConvexVerdict::Convex &&
                   ordinary.verdict == ConvexVerdict::NotConvex) ||
                  (sampled == ConvexVerdict::NotConvex &&
                   ordinary.verdict == ConvexVerdict::Convex);
  if (conflict)
    throw InconsistencyError("mn_convexity_check: sampled and pulled-back routes disagree on '" +
                             gen.name() + "'");
  rep.step = ordinary.step;
  rep.verdict = sampled == ConvexVerdict::Inconclusive ? ordinary.verdict : sampled;
  rep.worst_violation = std::max(rep.worst_violation, ordinary.worst_violation);
  return rep;
}

DeformedDivergences certified_divergences(const Generator& deformed, const Vec& t1,
                                          const Vec& t2, Skew skew) {
  std::vector<Vec> segment;
  for (int i = 0; i <= 8; ++i) {
    double a = i / 8.0;
    Vec p(t1.size());
    for (size_t k = 0; k < t1.size(); ++k) p[k] = a * t1[k] + (1.0 - a) * t2[k];
    segment.push_back(p);
  }
  double span = 0.0;
  for (size_t k = 0; k < t1.size(); ++k) span = std::max(span, std::abs(t1[k] - t2[k]));
  double step = std::max(1e-4, 1e-3 * std::max(span, 1.0));
  DeformedDivergences out;
  out.certificate = convexity_certificate(deformed, segment, step);
  if (out.certificate.verdict == ConvexVerdict::NotConvex)
    throw NotConvexError("deformed generator '" + deformed.name() +
                         "' failed the convexity certificate (worst violation " +
                         std::to_string(out.certificate.worst_violation) +
                         "); its divergences are undefined");
  out.bregman = bregman(deformed, t1, t2);
  out.jensen_scaled = jensen_scaled(deformed, t1, t2, skew);
  return out;
}

DeformedDivergences deformed_divergences(const Generator& gen, const DeformationSpec& spec,
                                         const Vec& t1, const Vec& t2, Skew skew) {
  return certified_divergences(deform(gen, spec), t1, t2, skew);
}

}  // namespace expfam
