#pragma once

#include "family.hpp"
#include "generator.hpp"

namespace expfam {

// Skew selection for the scaled Jensen divergence family. The limit branches
// are chosen by tag, never by floating-point tolerance.
struct Skew {
  enum class Tag { Limit0, Limit1, Half, General };
  Tag tag = Tag::General;
  double alpha = 0.5;

  static Skew limit0() { return {Tag::Limit0, 0.0}; }
  static Skew limit1() { return {Tag::Limit1, 1.0}; }
  static Skew half() { return {Tag::Half, 0.5}; }
  static Skew general(double a) {
    if (!std::isfinite(a)) throw ArgumentError("skew: alpha must be finite");
    if (a == 0.0 || a == 1.0)
      throw ArgumentError("skew: general branch excludes alpha in {0,1}");
    return {Tag::General, a};
  }
  // Exact dispatch: 0, 1 and 1/2 select their branches, everything else is
  // the general formula.
  static Skew from_alpha(double a) {
    if (a == 0.0) return limit0();
    if (a == 1.0) return limit1();
    if (a == 0.5) return half();
    return general(a);
  }
};

enum class JensenScaling { Standard, Kappa };

// kappa(alpha) = 1 / (alpha (1-alpha) 4^{4 alpha (1-alpha)}); kappa(1/2) = 1.
double kappa_factor(double alpha);

// B_G(t1 : t2) = G(t1) - G(t2) - <t1 - t2, grad G(t2)>
double bregman(const Generator& gen, const Vec& t1, const Vec& t2);

// J_{G,alpha}(t1 : t2) = alpha G(t1) + (1-alpha) G(t2) - G(alpha t1 + (1-alpha) t2)
double jensen_skewed(const Generator& gen, const Vec& t1, const Vec& t2, double alpha);

// Scaled skewed Jensen divergence with Bregman limits:
//   alpha in {0}: B_G(t1:t2);  {1}: B_G(t2:t1);  {1/2}: 4 J_G;
//   otherwise J_{G,alpha} / (alpha (1-alpha)).
// JensenScaling::Kappa replaces the factor by kappa(alpha) (half/general only).
double jensen_scaled(const Generator& gen, const Vec& t1, const Vec& t2, Skew skew,
                     JensenScaling scaling = JensenScaling::Standard);

// Y_{G,G*}(theta : eta) = G(theta) + G*(eta) - <theta, eta>
double fenchel_young(const Generator& gen, const Generator& conjugate, const Vec& theta,
                     const Vec& eta);

// B_{F1,F2}(t1 : t2) = F1(t1) - F2(t2) - <t1 - t2, grad F2(t2)> for F1 >= F2.
// The ordering is checked on the segment between the arguments and on the
// generators' probe grids; a violation raises ArgumentError.
double duo_bregman(const Generator& upper, const Generator& lower, const Vec& t1,
                   const Vec& t2);

// D_skl(a : b) = a log(a/b) + b - a
double scalar_kl(double a, double b);

// B_Z(t2 : t1) split into a conformal Bregman part Z(t1) B_F(t2:t1) and the
// scalar KL part D_skl(Z(t1) : Z(t2)).
struct BzParts {
  double conformal = 0.0;
  double scalar = 0.0;
  double total = 0.0;
};
BzParts bz_decomposition(const Family& family, const Vec& t1, const Vec& t2);

// Divergences between the normalized member p_{t1} and the unnormalized
// member ~p_{t2}. Both may take negative values.
double mixed_alpha_div(const Family& family, const Vec& t1, const Vec& t2, double alpha);
double mixed_bhattacharyya(const Family& family, const Vec& t1, const Vec& t2,
                           double alpha);

}  // namespace expfam
