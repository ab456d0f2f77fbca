#include "divergences.hpp"

#include <cmath>

namespace expfam {

namespace {

Vec mix(const Vec& t1, const Vec& t2, double alpha) {
  Vec m(t1.size());
  for (size_t i = 0; i < t1.size(); ++i) m[i] = alpha * t1[i] + (1.0 - alpha) * t2[i];
  return m;
}

Vec diff(const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

double kappa_factor(double alpha) {
  double a1 = alpha * (1.0 - alpha);
  if (a1 == 0.0) throw ArgumentError("kappa scaling is undefined at alpha in {0,1}");
  return 1.0 / (a1 * std::pow(4.0, 4.0 * a1));
}

double bregman(const Generator& gen, const Vec& t1, const Vec& t2) {
  Vec g2 = gen.gradient(t2);
  return gen.value(t1) - gen.value(t2) - gen.inner(diff(t1, t2), g2);
}

double jensen_skewed(const Generator& gen, const Vec& t1, const Vec& t2, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ArgumentError("jensen_skewed: alpha must lie in (0,1)");
  return alpha * gen.value(t1) + (1.0 - alpha) * gen.value(t2) -
         gen.value(mix(t1, t2, alpha));
}

double jensen_scaled(const Generator& gen, const Vec& t1, const Vec& t2, Skew skew,
                     JensenScaling scaling) {
  switch (skew.tag) {
    case Skew::Tag::Limit0:
      if (scaling == JensenScaling::Kappa)
        throw ArgumentError("kappa scaling is undefined at the Bregman limits");
      return bregman(gen, t1, t2);
    case Skew::Tag::Limit1:
      if (scaling == JensenScaling::Kappa)
        throw ArgumentError("kappa scaling is undefined at the Bregman limits");
      return bregman(gen, t2, t1);
    case Skew::Tag::Half: {
      double j = jensen_skewed(gen, t1, t2, 0.5);
      return scaling == JensenScaling::Kappa ? kappa_factor(0.5) * j : 4.0 * j;
    }
    case Skew::Tag::General: {
      double a = skew.alpha;
      // Outside (0,1) the mixture point may leave the domain; the generator
      // raises the domain error itself.
      double j = a * gen.value(t1) + (1.0 - a) * gen.value(t2) - gen.value(mix(t1, t2, a));
      return scaling == JensenScaling::Kappa ? kappa_factor(a) * j
                                             : j / (a * (1.0 - a));
    }
  }
  throw ArgumentError("jensen_scaled: invalid skew tag");
}

double fenchel_young(const Generator& gen, const Generator& conjugate, const Vec& theta,
                     const Vec& eta) {
  return gen.value(theta) + conjugate.value(eta) - gen.inner(theta, eta);
}

double duo_bregman(const Generator& upper, const Generator& lower, const Vec& t1,
                   const Vec& t2) {
  if (upper.param_len() != lower.param_len())
    throw ArgumentError("duo_bregman: generators must share a parameter space");
  // Spot-check upper >= lower along the segment and on the probe grid.
  auto check = [&](const Vec& t) {
    if (!upper.in_domain(t) || !lower.in_domain(t)) return;
    if (upper.value(t) < lower.value(t) - 1e-12)
      throw ArgumentError("duo_bregman: generator ordering F1 >= F2 violated at a sample point");
  };
  for (int i = 0; i <= 8; ++i) check(mix(t1, t2, i / 8.0));
  for (const Vec& t : upper.probe_grid()) check(t);
  Vec g2 = lower.gradient(t2);
  return upper.value(t1) - lower.value(t2) - lower.inner(diff(t1, t2), g2);
}

double scalar_kl(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ArgumentError("scalar_kl: arguments must be positive");
  return a * std::log(a / b) + b - a;
}

BzParts bz_decomposition(const Family& family, const Vec& t1, const Vec& t2) {
  family.require_domain(t1);
  family.require_domain(t2);
  Generator f = family.cumulant_generator();
  double z1 = family.partition(t1);
  double z2 = family.partition(t2);
  BzParts parts;
  parts.conformal = z1 * bregman(f, t2, t1);
  parts.scalar = scalar_kl(z1, z2);
  parts.total = parts.conformal + parts.scalar;
  return parts;
}

double mixed_alpha_div(const Family& family, const Vec& t1, const Vec& t2, double alpha) {
  if (alpha == 0.0 || alpha == 1.0)
    throw ArgumentError("mixed_alpha_div: alpha must lie outside {0,1}");
  family.require_domain(t1);
  family.require_domain(t2);
  Vec bar = mix(t1, t2, alpha);
  family.require_domain(bar);
  double z1 = family.partition(t1);
  double z2 = family.partition(t2);
  double zbar = family.partition(bar);
  return (alpha * z1 + (1.0 - alpha) - zbar / z2) / (alpha * (1.0 - alpha));
}

double mixed_bhattacharyya(const Family& family, const Vec& t1, const Vec& t2,
                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ArgumentError("mixed_bhattacharyya: alpha must lie in (0,1)");
  family.require_domain(t1);
  family.require_domain(t2);
  Vec bar = mix(t1, t2, alpha);
  return family.cumulant(t2) - family.cumulant(bar);
}

}  // namespace expfam
