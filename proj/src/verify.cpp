#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "deform.hpp"
#include "divergences.hpp"
#include "family.hpp"
#include "legendre.hpp"
#include "statdiv.hpp"

namespace expfam {

namespace {

const std::vector<double> kAlphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct CheckRow {
  std::string family;
  std::string name;
  double max_error;
  double tolerance;
  bool pass;
};

class Report {
 public:
  void add(const std::string& family, const std::string& name, double err, double tol) {
    rows_.push_back({family, name, err, tol, err <= tol});
  }
  void add(const std::string& family, const std::string& name, double err, double tol,
           bool pass) {
    rows_.push_back({family, name, err, tol, pass});
  }
  nlohmann::json to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    int passed = 0;
    for (const auto& r : rows_) {
      checks.push_back({{"family", r.family},
                        {"name", r.name},
                        {"max_error", r.max_error},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass}});
      passed += r.pass ? 1 : 0;
    }
    nlohmann::json j;
    j["checks"] = checks;
    j["passed"] = passed;
    j["failed"] = static_cast<int>(rows_.size()) - passed;
    return j;
  }

 private:
  std::vector<CheckRow> rows_;
};

std::vector<std::pair<Vec, Vec>> grid_pairs(const Family& fam, size_t limit = 5) {
  const auto& g = fam.param_grid();
  std::vector<std::pair<Vec, Vec>> pairs;
  const std::pair<size_t, size_t> picks[] = {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {1, 4}};
  for (auto [a, b] : picks) {
    if (pairs.size() >= limit) break;
    if (a < g.size() && b < g.size()) pairs.emplace_back(g[a], g[b]);
  }
  return pairs;
}

Vec mix_point(const Vec& a, const Vec& b, double alpha) {
  Vec m(a.size());
  for (size_t i = 0; i < a.size(); ++i) m[i] = alpha * a[i] + (1.0 - alpha) * b[i];
  return m;
}

double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

void convexity_suite(Report& rep, const Family& fam, const std::string& label) {
  const auto& grid = fam.param_grid();
  auto pairs = grid_pairs(fam);
  Generator f = fam.cumulant_generator();
  Generator z = fam.partition_generator();

  // Midpoints of accepted parameter pairs stay accepted.
  bool midpoints_ok = true;
  for (size_t a = 0; a < grid.size(); ++a)
    for (size_t b = a + 1; b < grid.size(); ++b)
      midpoints_ok = midpoints_ok && fam.in_domain(mix_point(grid[a], grid[b], 0.5));
  rep.add(label, "theta-domain-midpoint-convex", midpoints_ok ? 0.0 : 1.0, 0.0);

  double roundtrip = 0.0;
  for (const Vec& t : grid) {
    double fv = fam.cumulant(t), zv = fam.partition(t);
    roundtrip = std::max(roundtrip, std::abs(zv - std::exp(fv)) / std::abs(zv));
    roundtrip = std::max(roundtrip, std::abs(fv - std::log(zv)) / std::max(1.0, std::abs(fv)));
  }
  rep.add(label, "z-exp-f-roundtrip", roundtrip, 1e-12);

  // Strict chain Z(mix) < geometric < arithmetic on distinct pairs.
  double chain_violation = 0.0;
  for (const auto& [t1, t2] : pairs) {
    double z1 = fam.partition(t1), z2 = fam.partition(t2);
    for (double a : kAlphas) {
      double zm = fam.partition(mix_point(t1, t2, a));
      double geo = std::pow(z1, a) * std::pow(z2, 1.0 - a);
      double arith = a * z1 + (1.0 - a) * z2;
      double s1 = std::max(1.0, geo);
      double s2 = std::max(1.0, arith);
      chain_violation = std::max(chain_violation, 1e-12 - (geo - zm) / s1);
      chain_violation = std::max(chain_violation, 1e-12 - (arith - geo) / s2);
    }
  }
  rep.add(label, "ineqZZ-chain-strict", std::max(0.0, chain_violation), 0.0,
          chain_violation <= 0.0);

  for (auto [gen, tag] : {std::pair<const Generator*, const char*>{&f, "F"},
                          std::pair<const Generator*, const char*>{&z, "Z"}}) {
    double min_b = std::numeric_limits<double>::infinity();
    for (const auto& [t1, t2] : pairs) {
      min_b = std::min(min_b, bregman(*gen, t1, t2));
      min_b = std::min(min_b, bregman(*gen, t2, t1));
    }
    rep.add(label, std::string("bregman-positivity-") + tag, std::max(0.0, -min_b), 0.0,
            min_b > 0.0);
  }

  double grad_rel = 0.0;
  double fd_gap = 0.0;
  for (const Vec& t : grid) {
    Vec gf = fam.grad_cumulant(t);
    Vec gz = fam.grad_partition(t);
    double zv = fam.partition(t);
    for (size_t i = 0; i < gf.size(); ++i)
      grad_rel = std::max(grad_rel, std::abs(gf[i] - gz[i] / zv) /
                                        std::max(1.0, std::abs(gf[i])));
    Vec fdf = f.fd_gradient(t);
    Vec fdz = z.fd_gradient(t);
    for (size_t i = 0; i < gf.size(); ++i) {
      fd_gap = std::max(fd_gap, std::abs(gf[i] - fdf[i]));
      fd_gap = std::max(fd_gap, std::abs(gz[i] - fdz[i]));
    }
  }
  rep.add(label, "grad-f-equals-grad-z-over-z", grad_rel, 1e-10);
  rep.add(label, "grad-finite-difference", fd_gap, 1e-6);
}

void identities_suite(Report& rep, const Family& fam, const std::string& label,
                      const Scheme& scheme) {
  auto pairs = grid_pairs(fam);
  Generator f = fam.cumulant_generator();
  Generator z = fam.partition_generator();
  Generator zm1 = fam.partition_minus_one_generator();
  const bool heavy = fam.kind() == FamilyKind::CenteredNormalND;
  const std::vector<double>& alphas =
      heavy ? std::vector<double>{0.25, 0.5, 0.75} : kAlphas;
  if (heavy && pairs.size() > 3) pairs.resize(3);

  double eq12 = 0.0, propz = 0.0;
  for (const auto& [t1, t2] : pairs) {
    Density p1 = family_density(fam, t1, true);
    Density p2 = family_density(fam, t2, true);
    Density u1 = family_density(fam, t1, false);
    Density u2 = family_density(fam, t2, false);
    for (double a : alphas) {
      Skew skew = Skew::from_alpha(a);
      if (!heavy) {
        double oracle_f = bhattacharyya_scaled(p1, p2, skew, scheme);
        eq12 = std::max(eq12, std::abs(oracle_f - jensen_scaled(f, t1, t2, skew)));
      }
      double oracle_z = alpha_div(u1, u2, skew, scheme);
      propz = std::max(propz, std::abs(oracle_z - jensen_scaled(z, t1, t2, skew)));
    }
  }
  if (!heavy) rep.add(label, "eq12-bhattacharyya-jensen", eq12, 1e-6);
  rep.add(label, "propZ-alpha-jensen", propz, 1e-6);
  if (heavy) return;

  double klekl = 0.0, bz = 0.0, klbz = 0.0, hell = 0.0, entropy_dec = 0.0;
  double renyi = 0.0, duo = 0.0, mixed_a = 0.0, mixed_b = 0.0;
  for (const auto& [t1, t2] : pairs) {
    Density p1 = family_density(fam, t1, true);
    Density u1 = family_density(fam, t1, false);
    Density u2 = family_density(fam, t2, false);
    double ext_kl = kl_extended(u1, u2, scheme);
    KleklParts parts = klekl_decomposition(u1, u2, scheme);
    klekl = std::max(klekl, std::abs(parts.total - ext_kl));
    BzParts parts_bz = bz_decomposition(fam, t1, t2);
    bz = std::max(bz, rel_gap(parts_bz.total, bregman(z, t2, t1)));
    klbz = std::max(klbz, std::abs(ext_kl - bregman(z, t2, t1)));
    hell = std::max(hell, std::abs(hellinger_sq(u1, u2, scheme) -
                                   jensen_skewed(z, t1, t2, 0.5)));
    double hx = cross_entropy_extended(u1, u2, scheme);
    double hp = entropy_extended(u1, scheme);
    entropy_dec = std::max(entropy_dec, std::abs(ext_kl - (hx - hp)));
    {
      Density p2 = family_density(fam, t2, true);
      for (double a : {0.3, 0.7}) {
        double dbs = bhattacharyya_scaled(p1, p2, Skew::general(a), scheme);
        double dr = renyi_div(p1, p2, a, scheme);
        renyi = std::max(renyi, std::abs(dbs - dr / a));
      }
    }
    duo = std::max(duo, std::abs(duo_bregman(zm1, f, t2, t1) -
                                 kl_extended(p1, u2, scheme)));
    for (double a : {0.3, 0.5, 0.8}) {
      mixed_a = std::max(mixed_a, std::abs(mixed_alpha_div(fam, t1, t2, a) -
                                           mixed_alpha_oracle(fam, t1, t2, a, scheme)));
      mixed_b = std::max(mixed_b,
                         std::abs(mixed_bhattacharyya(fam, t1, t2, a) -
                                  mixed_bhattacharyya_oracle(fam, t1, t2, a, scheme)));
    }
  }
  rep.add(label, "klekl-decomposition", klekl, 1e-8);
  rep.add(label, "bz-decomposition", bz, 1e-10);
  rep.add(label, "kl-extended-equals-bz", klbz, 1e-6);
  rep.add(label, "hellinger-equals-jz", hell, 1e-6);
  rep.add(label, "entropy-decomposition", entropy_dec, 1e-9);
  rep.add(label, "renyi-bhattacharyya-scaling", renyi, 1e-10);
  rep.add(label, "duo-bregman-mixed-kl", duo, 1e-6);
  rep.add(label, "mixed-alpha", mixed_a, 1e-6);
  rep.add(label, "mixed-bhattacharyya", mixed_b, 1e-8);

  double continuity = 0.0;
  double duality = 0.0;
  const double eps = 1e-4;
  for (const auto& [t1, t2] : pairs) {
    for (const Generator* gen : {&f, &z}) {
      continuity = std::max(
          continuity, std::abs(jensen_scaled(*gen, t1, t2, Skew::general(eps)) -
                               bregman(*gen, t1, t2)));
      continuity = std::max(
          continuity, std::abs(jensen_scaled(*gen, t1, t2, Skew::general(1.0 - eps)) -
                               bregman(*gen, t2, t1)));
      for (double a : {0.2, 0.6})
        duality = std::max(duality, std::abs(jensen_skewed(*gen, t1, t2, a) -
                                             jensen_skewed(*gen, t2, t1, 1.0 - a)));
    }
  }
  rep.add(label, "limit-continuity", continuity, 1e-3);
  rep.add(label, "jensen-reference-duality", duality, 0.0);
}

void legendre_suite(Report& rep, const Family& fam, const std::string& label,
                    const Scheme& scheme) {
  Generator f = fam.cumulant_generator();
  Generator z = fam.partition_generator();
  auto pairs = grid_pairs(fam, 2);
  const auto& grid = fam.param_grid();
  std::vector<Vec> probe(grid.begin(), grid.begin() + std::min<size_t>(3, grid.size()));

  for (auto [gen, tag] : {std::pair<const Generator*, const char*>{&f, "F"},
                          std::pair<const Generator*, const char*>{&z, "Z"}}) {
    double dc = 0.0;
    for (const Vec& t : probe) dc = std::max(dc, double_conjugate_gap(*gen, t));
    rep.add(label, std::string("double-conjugate-") + tag, dc, 1e-7);

    ConjugatePair pair(*gen);
    double spread = 0.0;
    for (const auto& [t1, t2] : pairs)
      spread = std::max(spread, canonical_divergence(pair, t1, t2).max_spread());
    rep.add(label, std::string("four-route-canonical-") + tag, spread, 1e-8);
  }

  double negent = 0.0;
  for (const Vec& t : probe) negent = std::max(negent, negentropy_gap(fam, t, scheme));
  rep.add(label, "negentropy", negent, 1e-6);

  double revkl = 0.0;
  for (const auto& [t1, t2] : pairs) {
    Density p1 = family_density(fam, t1, true);
    Density p2 = family_density(fam, t2, true);
    revkl = std::max(revkl, std::abs(bregman(f, t1, t2) - kl_extended(p2, p1, scheme)));
  }
  rep.add(label, "canonical-reverse-kl", revkl, 1e-6);

  ConjugatePair pair_f(f);
  double nonneg = 0.0, equality = 0.0;
  for (const Vec& t : probe) {
    Vec eta_t = pair_f.to_dual(t);
    equality = std::max(equality,
                        std::abs(fenchel_young(f, pair_f.dual(), t, eta_t)));
    for (const Vec& s : probe) {
      Vec eta = pair_f.to_dual(s);
      nonneg = std::max(nonneg, -fenchel_young(f, pair_f.dual(), t, eta));
    }
  }
  rep.add(label, "young-fenchel-nonneg", std::max(0.0, nonneg), 1e-10);
  rep.add(label, "young-equality", equality, 1e-10);

  if (fam.param_len() == 1) {
    double mono = 0.0;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
      mono = std::max(mono, fam.grad_cumulant(grid[i])[0] -
                                fam.grad_cumulant(grid[i + 1])[0]);
      mono = std::max(mono, fam.grad_partition(grid[i])[0] -
                                fam.grad_partition(grid[i + 1])[0]);
    }
    rep.add(label, "dual-map-monotone", std::max(0.0, mono), 0.0, mono < 0.0);
  }
}

void deformation_suite(Report& rep) {
  const std::string label = "exponential";
  Family fam = Family::make(FamilyKind::Exponential, 1);
  Generator z = fam.partition_generator();
  Generator f = fam.cumulant_generator();

  std::vector<Vec> grid;
  std::vector<double> grid1d;
  for (int i = 0; i <= 12; ++i) {
    double t = 0.25 + i * (4.0 - 0.25) / 12.0;
    grid.push_back({t});
    grid1d.push_back(t);
  }

  // Convexity of the power-deformed partition function flips at p = -1.
  int mismatches = 0;
  for (double p : {-2.0, -1.5, -1.1, -0.9, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0}) {
    Generator zp = comparative_deform(z, MeanGenerator::identity(), MeanGenerator::power(p));
    ConvexityReport cert = convexity_certificate(zp, grid, 0.02);
    ConvexVerdict expected = p > -1.0 ? ConvexVerdict::Convex : ConvexVerdict::NotConvex;
    if (cert.verdict != expected) ++mismatches;
  }
  rep.add(label, "power-sweep-convexity", mismatches, 0.0);

  const std::vector<double> mn_alphas = {0.25, 0.5, 0.75};
  Generator theta_sq(
      "theta-squared", 1, [](const Vec& t) { return t[0] * t[0]; },
      [](const Vec& t) { return t[0] > 1e-12; },
      [](const Vec& t) { return Vec{2.0 * t[0]}; });
  int mn_bad = 0;
  try {
    if (mn_convexity_check(z, MeanGenerator::identity(), MeanGenerator::log(), grid1d,
                           mn_alphas)
            .verdict != ConvexVerdict::Convex)
      ++mn_bad;
    if (mn_convexity_check(theta_sq, MeanGenerator::identity(), MeanGenerator::log(),
                           grid1d, mn_alphas)
            .verdict != ConvexVerdict::NotConvex)
      ++mn_bad;
    ConvexityReport plain = convexity_certificate(z, grid, 0.02);
    if (mn_convexity_check(z, MeanGenerator::identity(), MeanGenerator::identity(), grid1d,
                           mn_alphas)
            .verdict != plain.verdict)
      ++mn_bad;
  } catch (const InconsistencyError&) {
    mn_bad += 10;
  }
  rep.add(label, "mn-convexity-routes-agree", mn_bad, 0.0);

  DeformationSpec spec{MeanGenerator::power(2.0), MeanGenerator::log()};
  DeformationSpec inverse_spec{spec.rho.inverse(), spec.tau.inverse()};
  Generator once = deform(f, spec);
  Generator back = deform(once, inverse_spec);
  double roundtrip = 0.0;
  for (const Vec& t : fam.param_grid())
    if (back.in_domain(t))
      roundtrip = std::max(roundtrip, std::abs(back.value(t) - f.value(t)));
  rep.add(label, "deform-roundtrip", roundtrip, 1e-8);

  DeformationSpec s1{MeanGenerator::power(2.0), MeanGenerator::log()};
  DeformationSpec s2{MeanGenerator::identity(), MeanGenerator::power(0.5)};
  Generator two_step = deform(deform(f, s1), s2);
  DeformationSpec composite{MeanGenerator::compose(s1.rho, s2.rho),
                            MeanGenerator::compose(s1.tau, s2.tau)};
  Generator one_step = deform(f, composite);
  double compose_gap = 0.0;
  for (const Vec& t : fam.param_grid())
    if (two_step.in_domain(t) && one_step.in_domain(t))
      compose_gap =
          std::max(compose_gap, std::abs(two_step.value(t) - one_step.value(t)));
  rep.add(label, "deformation-group-compose", compose_gap, 1e-9);

  double mono = 0.0;
  const std::vector<double> ps = {-1.0, 0.0, 1.0, 2.0};
  for (size_t i = 0; i + 1 < ps.size(); ++i) {
    MeanGenerator lo_gen = MeanGenerator::power(ps[i]);
    MeanGenerator hi_gen = MeanGenerator::power(ps[i + 1]);
    for (double x : {0.5, 1.0, 2.0})
      for (double y : {0.8, 3.0})
        for (double a : mn_alphas)
          mono = std::max(mono, qa_mean(lo_gen, x, y, a) - qa_mean(hi_gen, x, y, a));
  }
  rep.add(label, "power-mean-monotone", std::max(0.0, mono), 1e-12);

  double inv_roundtrip = 0.0;
  for (const MeanGenerator& m : {MeanGenerator::identity(), MeanGenerator::log(),
                                 MeanGenerator::power(2.0), MeanGenerator::power(-0.5)})
    for (double u : {0.3, 1.0, 2.5, 7.0})
      inv_roundtrip = std::max(inv_roundtrip, std::abs(m.h_inv(m.h(u)) - u));
  rep.add(label, "qa-mean-generator-roundtrip", inv_roundtrip, 1e-10);

  Generator z1 = comparative_deform(z, MeanGenerator::identity(), MeanGenerator::power(1.0));
  Vec t1 = {1.0}, t2 = {2.0};
  double affine_gap = std::abs(certified_divergences(z1, t1, t2, Skew::half()).bregman -
                               bregman(z, t1, t2));
  rep.add(label, "deformed-bregman-affine-invariance", affine_gap, 1e-12);
}

void identities_mc_check(Report& rep, std::uint64_t seed) {
  Family fam = Family::make(FamilyKind::CenteredNormalND, 5);
  Scheme mc;
  mc.kind = Scheme::Kind::MonteCarlo;
  mc.max_evals = 200000;
  mc.seed = seed;
  Generator z = fam.partition_generator();
  auto pairs = grid_pairs(fam, 2);
  double worst = 0.0;
  for (const auto& [t1, t2] : pairs) {
    Density u1 = family_density(fam, t1, false);
    Density u2 = family_density(fam, t2, false);
    for (double a : {0.3, 0.7}) {
      double oracle = alpha_div(u1, u2, Skew::general(a), mc);
      double closed = jensen_scaled(z, t1, t2, Skew::general(a));
      worst = std::max(worst, std::abs(oracle - closed) / std::max(1.0, std::abs(closed)));
    }
  }
  rep.add("centered-normal-nd[d=5]", "propZ-alpha-jensen-mc", worst, 2e-2);
}

}  // namespace

nlohmann::json run_verify(const VerifyOptions& options) {
  const std::string& suite = options.suite;
  if (suite != "convexity" && suite != "identities" && suite != "legendre" &&
      suite != "deformation" && suite != "all")
    throw ArgumentError("verify: unknown suite '" + suite + "'");

  std::vector<Family> families;
  if (options.family.empty()) {
    for (const std::string& name : Family::kind_names())
      families.push_back(Family::make(name, name == "centered-normal-nd" ? 2 : 1));
  } else {
    families.push_back(
        Family::make(options.family, options.family == "centered-normal-nd" ? 2 : 1));
  }

  Scheme scheme;
  scheme.seed = options.seed;

  Report rep;
  for (const Family& fam : families) {
    std::string label = fam.name();
    if (fam.kind() == FamilyKind::CenteredNormalND)
      label += "[d=" + std::to_string(fam.dim()) + "]";
    if (suite == "convexity" || suite == "all") convexity_suite(rep, fam, label);
    if (suite == "identities" || suite == "all") identities_suite(rep, fam, label, scheme);
    if (suite == "legendre" || suite == "all") legendre_suite(rep, fam, label, scheme);
  }
  if ((suite == "identities" || suite == "all") &&
      (options.family.empty() || options.family == "centered-normal-nd"))
    identities_mc_check(rep, options.seed);
  if ((suite == "deformation" || suite == "all") &&
      (options.family.empty() || options.family == "exponential"))
    deformation_suite(rep);

  nlohmann::json j = rep.to_json();
  j["suite"] = suite;
  j["family"] = options.family.empty() ? nlohmann::json() : nlohmann::json(options.family);
  j["seed"] = options.seed;
  return j;
}

}  // namespace expfam
