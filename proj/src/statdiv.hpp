#pragma once

#include <optional>

#include "divergences.hpp"
#include "family.hpp"
#include "integrate.hpp"

namespace expfam {

// A positive density given by its log, evaluated against the support's
// reference measure. Work stays in log space until the last moment so that
// products like p^alpha q^(1-alpha) do not underflow prematurely.
struct Density {
  std::function<double(std::span<const double>)> log_eval;
  Support support;
  bool normalized = false;
  std::optional<McProposal> proposal;  // importance proposal for Monte-Carlo
};

// Density of a family member; normalized divides by the partition function.
Density family_density(const Family& family, const Vec& theta, bool normalized);

// Multiplies a density by a positive factor (homogeneity tests).
Density scale_density(Density d, double factor);

// Integral of the density itself (its mass).
double density_mass(const Density& p, const Scheme& scheme);

// rho_alpha(p, q) = integral of p^alpha q^(1-alpha)
double bhattacharyya_coeff(const Density& p, const Density& q, double alpha,
                           const Scheme& scheme);

// -log rho_alpha / (alpha (1-alpha)), with KL limits at alpha in {0,1} and
// 4 D_B at alpha = 1/2.
double bhattacharyya_scaled(const Density& p, const Density& q, Skew skew,
                            const Scheme& scheme);

// D_{R,alpha}(p:q) = log(rho_alpha) / (alpha - 1)
double renyi_div(const Density& p, const Density& q, double alpha, const Scheme& scheme);

// Extended KL between positive densities: integral of p log(p/q) + q - p.
double kl_extended(const Density& p, const Density& q, const Scheme& scheme);

// Alpha-divergence family between positive densities; branches: reverse KL
// at 0, 4 Hellinger^2 at 1/2, KL at 1.
double alpha_div(const Density& p, const Density& q, Skew skew, const Scheme& scheme);

// Squared Hellinger distance between positive densities.
double hellinger_sq(const Density& p, const Density& q, const Scheme& scheme);

double cross_entropy_extended(const Density& p, const Density& q, const Scheme& scheme);
double entropy_extended(const Density& p, const Scheme& scheme);

struct KleklParts {
  double z_p = 0.0;
  double z_q = 0.0;
  double kl_normalized = 0.0;
  double total = 0.0;
};
// Splits the extended KL into the normalized KL between p/Z_p and q/Z_q plus
// the scalar KL of the masses.
KleklParts klekl_decomposition(const Density& p, const Density& q, const Scheme& scheme);

// E_{p_theta}[t(x)] computed by integration, one component at a time.
Vec moment_sufficient_stat(const Family& family, const Vec& theta, const Scheme& scheme);

// Integration route for the divergences between the normalized member p_{t1}
// and the unnormalized member ~p_{t2}; the mass of ~p_{t2} is itself taken by
// quadrature so the route stays independent of the closed forms.
double mixed_alpha_oracle(const Family& family, const Vec& t1, const Vec& t2,
                          double alpha, const Scheme& scheme);
double mixed_bhattacharyya_oracle(const Family& family, const Vec& t1, const Vec& t2,
                                  double alpha, const Scheme& scheme);

}  // namespace expfam
