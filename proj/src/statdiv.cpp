#include "statdiv.hpp"

#include <cmath>

#include "sym_packed.hpp"

namespace expfam {

namespace {

const McProposal* pick_proposal(const Density& p, const Density& q) {
  if (p.proposal && q.proposal)
    return p.proposal->spread >= q.proposal->spread ? &*p.proposal : &*q.proposal;
  if (p.proposal) return &*p.proposal;
  if (q.proposal) return &*q.proposal;
  return nullptr;
}

void require_same_support(const Density& p, const Density& q) {
  if (p.support.kind != q.support.kind || p.support.dim != q.support.dim)
    throw ArgumentError("statistical divergence: densities must share a support");
}

double integrate_pair(const Density& p, const Density& q,
                      const std::function<double(double, double)>& combine,
                      const Scheme& scheme, std::string_view tag) {
  require_same_support(p, q);
  Integrand f = [&](std::span<const double> x) {
    return combine(p.log_eval(x), q.log_eval(x));
  };
  return integrate(f, p.support, scheme, tag, pick_proposal(p, q)).value;
}

// Gaussian importance proposal with precision scaled by 0.7 so it is broader
// than the member it is derived from.
McProposal normal_nd_proposal(const Vec& theta_packed, int d) {
  Vec scaled = theta_packed;
  for (double& v : scaled) v *= 0.7;
  CholeskyPacked chol = cholesky_packed(scaled, d, 0.0);
  if (!chol.ok) throw DomainError("proposal: precision matrix not positive-definite");
  double log_norm = -0.5 * (d * std::log(2.0 * M_PI) - chol.log_det);
  McProposal prop;
  prop.spread = -chol.log_det;
  prop.sample = [chol, d](std::mt19937_64& rng, std::span<double> out) {
    // Box-Muller pairs, then solve L^T x = z so that cov(x) = theta^{-1}.
    auto uniform = [&rng]() {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    int i = 0;
    while (i < d) {
      double u1 = 1.0 - uniform();
      double u2 = uniform();
      double r = std::sqrt(-2.0 * std::log(u1));
      out[i++] = r * std::cos(2.0 * M_PI * u2);
      if (i < d) out[i++] = r * std::sin(2.0 * M_PI * u2);
    }
    std::vector<double> z(out.begin(), out.end());
    chol_backward(chol, z.data());
    for (int k = 0; k < d; ++k) out[k] = z[k];
  };
  prop.log_pdf = [scaled, d, log_norm](std::span<const double> x) {
    return log_norm - 0.5 * packed_quadform(scaled, d, x);
  };
  return prop;
}

}  // namespace

Density family_density(const Family& family, const Vec& theta, bool normalized) {
  family.require_domain(theta);
  Density d;
  d.support = family.support();
  d.normalized = normalized;
  double log_z = normalized ? family.cumulant(theta) : 0.0;
  Family fam = family;
  Vec t = theta;
  d.log_eval = [fam, t, log_z](std::span<const double> x) {
    return fam.log_unnormalized(t, x) - log_z;
  };
  if (family.kind() == FamilyKind::CenteredNormalND)
    d.proposal = normal_nd_proposal(theta, family.dim());
  return d;
}

Density scale_density(Density d, double factor) {
  if (!(factor > 0.0)) throw ArgumentError("scale_density: factor must be positive");
  double shift = std::log(factor);
  auto base = d.log_eval;
  d.log_eval = [base, shift](std::span<const double> x) { return base(x) + shift; };
  d.normalized = false;
  return d;
}

double density_mass(const Density& p, const Scheme& scheme) {
  Integrand f = [&](std::span<const double> x) { return std::exp(p.log_eval(x)); };
  return integrate(f, p.support, scheme, "mass", p.proposal ? &*p.proposal : nullptr)
      .value;
}

double bhattacharyya_coeff(const Density& p, const Density& q, double alpha,
                           const Scheme& scheme) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ArgumentError("bhattacharyya_coeff: alpha must lie in (0,1)");
  return integrate_pair(
      p, q,
      [alpha](double lp, double lq) { return std::exp(alpha * lp + (1.0 - alpha) * lq); },
      scheme, "bhatt-coeff");
}

double kl_extended(const Density& p, const Density& q, const Scheme& scheme) {
  return integrate_pair(
      p, q,
      [](double lp, double lq) {
        double pe = std::exp(lp), qe = std::exp(lq);
        double t = qe - pe;
        if (pe > 0.0) t += pe * (lp - lq);
        return t;
      },
      scheme, "kl-extended");
}

double bhattacharyya_scaled(const Density& p, const Density& q, Skew skew,
                            const Scheme& scheme) {
  switch (skew.tag) {
    case Skew::Tag::Limit0:
      return kl_extended(q, p, scheme);
    case Skew::Tag::Limit1:
      return kl_extended(p, q, scheme);
    case Skew::Tag::Half:
      return -4.0 * std::log(bhattacharyya_coeff(p, q, 0.5, scheme));
    case Skew::Tag::General: {
      double a = skew.alpha;
      return -std::log(bhattacharyya_coeff(p, q, a, scheme)) / (a * (1.0 - a));
    }
  }
  throw ArgumentError("bhattacharyya_scaled: invalid skew tag");
}

double renyi_div(const Density& p, const Density& q, double alpha, const Scheme& scheme) {
  if (alpha == 0.0 || alpha == 1.0)
    throw ArgumentError("renyi_div: alpha must lie outside {0,1}");
  return std::log(bhattacharyya_coeff(p, q, alpha, scheme)) / (alpha - 1.0);
}

double hellinger_sq(const Density& p, const Density& q, const Scheme& scheme) {
  return integrate_pair(
      p, q,
      [](double lp, double lq) { return 0.5 * sq(std::exp(0.5 * lp) - std::exp(0.5 * lq)); },
      scheme, "hellinger");
}

double alpha_div(const Density& p, const Density& q, Skew skew, const Scheme& scheme) {
  switch (skew.tag) {
    case Skew::Tag::Limit0:
      return kl_extended(q, p, scheme);
    case Skew::Tag::Limit1:
      return kl_extended(p, q, scheme);
    case Skew::Tag::Half:
      return 4.0 * hellinger_sq(p, q, scheme);
    case Skew::Tag::General: {
      double a = skew.alpha;
      double v = integrate_pair(
          p, q,
          [a](double lp, double lq) {
            return a * std::exp(lp) + (1.0 - a) * std::exp(lq) -
                   std::exp(a * lp + (1.0 - a) * lq);
          },
          scheme, "alpha-div");
      return v / (a * (1.0 - a));
    }
  }
  throw ArgumentError("alpha_div: invalid skew tag");
}

double cross_entropy_extended(const Density& p, const Density& q, const Scheme& scheme) {
  double v = integrate_pair(
      p, q,
      [](double lp, double lq) {
        double pe = std::exp(lp), qe = std::exp(lq);
        double t = qe;
        if (pe > 0.0) t -= pe * lq;
        return t;
      },
      scheme, "cross-entropy");
  return v - 1.0;
}

double entropy_extended(const Density& p, const Scheme& scheme) {
  Integrand f = [&](std::span<const double> x) {
    double lp = p.log_eval(x);
    double pe = std::exp(lp);
    return pe > 0.0 ? pe * (1.0 - lp) : 0.0;
  };
  double v =
      integrate(f, p.support, scheme, "entropy", p.proposal ? &*p.proposal : nullptr).value;
  return v - 1.0;
}

KleklParts klekl_decomposition(const Density& p, const Density& q, const Scheme& scheme) {
  require_same_support(p, q);
  KleklParts parts;
  parts.z_p = density_mass(p, scheme);
  parts.z_q = density_mass(q, scheme);
  double cross = integrate_pair(
      p, q,
      [](double lp, double lq) {
        double pe = std::exp(lp);
        return pe > 0.0 ? pe * (lp - lq) : 0.0;
      },
      scheme, "klekl-cross");
  parts.kl_normalized = cross / parts.z_p + std::log(parts.z_q / parts.z_p);
  parts.total =
      parts.z_p * (parts.kl_normalized + std::log(parts.z_p / parts.z_q)) +
      parts.z_q - parts.z_p;
  return parts;
}

Vec moment_sufficient_stat(const Family& family, const Vec& theta, const Scheme& scheme) {
  Density p = family_density(family, theta, true);
  int len = family.param_len();
  Vec moment(len);
  for (int i = 0; i < len; ++i) {
    Integrand f = [&, i](std::span<const double> x) {
      double lp = p.log_eval(x);
      double pe = std::exp(lp);
      return pe > 0.0 ? family.sufficient_stat(x)[i] * pe : 0.0;
    };
    std::string tag = "moment-" + std::to_string(i);
    moment[i] =
        integrate(f, p.support, scheme, tag, p.proposal ? &*p.proposal : nullptr).value;
  }
  return moment;
}

double mixed_alpha_oracle(const Family& family, const Vec& t1, const Vec& t2,
                          double alpha, const Scheme& scheme) {
  if (alpha == 0.0 || alpha == 1.0)
    throw ArgumentError("mixed_alpha_oracle: alpha must lie outside {0,1}");
  Density p1 = family_density(family, t1, false);
  Density p2 = family_density(family, t2, false);
  double z2 = density_mass(p2, scheme);
  double v = integrate_pair(
      p1, p2,
      [alpha, z2](double l1, double l2) {
        return alpha * std::exp(l1) + (1.0 - alpha) * std::exp(l2) / z2 -
               std::exp(alpha * l1 + (1.0 - alpha) * l2) / z2;
      },
      scheme, "mixed-alpha");
  return v / (alpha * (1.0 - alpha));
}

double mixed_bhattacharyya_oracle(const Family& family, const Vec& t1, const Vec& t2,
                                  double alpha, const Scheme& scheme) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ArgumentError("mixed_bhattacharyya_oracle: alpha must lie in (0,1)");
  Density p1 = family_density(family, t1, false);
  Density p2 = family_density(family, t2, false);
  double z2 = density_mass(p2, scheme);
  double coeff = integrate_pair(
      p1, p2,
      [alpha](double l1, double l2) { return std::exp(alpha * l1 + (1.0 - alpha) * l2); },
      scheme, "mixed-bhatt");
  return std::log(z2) - std::log(coeff);
}

}  // namespace expfam
