#include "expfam/expfam.h"

#include <cstring>
#include <new>
#include <string>

#include "deform.hpp"
#include "divergences.hpp"
#include "family.hpp"
#include "integrate.hpp"
#include "legendre.hpp"
#include "statdiv.hpp"
#include "verify.hpp"

#include <nlohmann/json.hpp>

struct expfam_family {
  expfam::Family fam;
};

struct expfam_scheme {
  expfam::Scheme scheme;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
expfam_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return EXPFAM_OK;
  } catch (const expfam::ArgumentError& e) {
    set_error(e.what());
    return EXPFAM_ERR_ARGUMENT;
  } catch (const expfam::DomainError& e) {
    set_error(e.what());
    return EXPFAM_ERR_DOMAIN;
  } catch (const expfam::ConvergenceError& e) {
    set_error(e.what());
    return EXPFAM_ERR_CONVERGENCE;
  } catch (const expfam::NotConvexError& e) {
    set_error(e.what());
    return EXPFAM_ERR_NOT_CONVEX;
  } catch (const expfam::ParseError& e) {
    set_error(e.what());
    return EXPFAM_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return EXPFAM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return EXPFAM_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return EXPFAM_ERR_INTERNAL;
  }
}

expfam_status fail_argument(const char* message) {
  set_error(message);
  return EXPFAM_ERR_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

expfam::Vec to_vec(const double* data, int len) {
  if (len < 0) throw expfam::ArgumentError("negative length");
  return expfam::Vec(data, data + len);
}

void check_param(const expfam::Family& fam, int len) {
  if (len != fam.param_len())
    throw expfam::ArgumentError("theta length does not match the family order");
}

using expfam::Skew;

// Closed-form dispatch by divergence name. The generator is the cumulant
// function for normalized densities, the partition function otherwise.
double closed_form_divergence(const expfam::Family& fam, const std::string& kind,
                              bool unnormalized, const expfam::Vec& t1,
                              const expfam::Vec& t2, double alpha, bool kappa) {
  expfam::Generator gen =
      unnormalized ? fam.partition_generator() : fam.cumulant_generator();
  expfam::JensenScaling scaling =
      kappa ? expfam::JensenScaling::Kappa : expfam::JensenScaling::Standard;
  if (kappa && kind != "alpha" && kind != "jensen")
    throw expfam::ArgumentError("kappa scaling applies to the 'alpha' and 'jensen' kinds");

  if (kind == "kl") return expfam::bregman(gen, t2, t1);
  if (kind == "rkl" || kind == "bregman") return expfam::bregman(gen, t1, t2);
  if (kind == "alpha")
    return expfam::jensen_scaled(gen, t1, t2, Skew::from_alpha(alpha), scaling);
  if (kind == "hellinger") {
    double j = expfam::jensen_skewed(gen, t1, t2, 0.5);
    return unnormalized ? j : 1.0 - std::exp(-j);
  }
  if (kind == "bhattacharyya") {
    if (unnormalized)
      throw expfam::ArgumentError("bhattacharyya is defined between normalized densities");
    return expfam::jensen_skewed(gen, t1, t2, alpha);
  }
  if (kind == "renyi") {
    if (unnormalized)
      throw expfam::ArgumentError("renyi is defined between normalized densities");
    if (alpha == 0.0 || alpha == 1.0)
      throw expfam::ArgumentError("renyi: alpha must lie outside {0,1}");
    return alpha * expfam::jensen_scaled(gen, t1, t2, Skew::general(alpha));
  }
  if (kind == "jensen") {
    double j = expfam::jensen_skewed(gen, t1, t2, alpha);
    return kappa ? expfam::kappa_factor(alpha) * j : j;
  }
  if (kind == "mixed-alpha") return expfam::mixed_alpha_div(fam, t1, t2, alpha);
  if (kind == "mixed-bhattacharyya")
    return expfam::mixed_bhattacharyya(fam, t1, t2, alpha);
  if (kind == "duo-kl")
    return expfam::duo_bregman(fam.partition_minus_one_generator(),
                               fam.cumulant_generator(), t2, t1);
  throw expfam::ArgumentError("unknown divergence kind '" + kind + "'");
}

double oracle_divergence(const expfam::Family& fam, const std::string& kind,
                         bool unnormalized, const expfam::Vec& t1, const expfam::Vec& t2,
                         double alpha, const expfam::Scheme& scheme) {
  auto normalized_pair = [&] {
    return std::pair(expfam::family_density(fam, t1, true),
                     expfam::family_density(fam, t2, true));
  };
  auto raw_pair = [&] {
    return std::pair(expfam::family_density(fam, t1, !unnormalized ? true : false),
                     expfam::family_density(fam, t2, !unnormalized ? true : false));
  };

  if (kind == "kl") {
    auto [p, q] = raw_pair();
    return expfam::kl_extended(p, q, scheme);
  }
  if (kind == "rkl" || kind == "bregman") {
    auto [p, q] = raw_pair();
    return expfam::kl_extended(q, p, scheme);
  }
  if (kind == "alpha") {
    Skew skew = Skew::from_alpha(alpha);
    if (unnormalized) {
      auto [p, q] = raw_pair();
      return expfam::alpha_div(p, q, skew, scheme);
    }
    auto [p, q] = normalized_pair();
    return expfam::bhattacharyya_scaled(p, q, skew, scheme);
  }
  if (kind == "hellinger") {
    auto [p, q] = raw_pair();
    return expfam::hellinger_sq(p, q, scheme);
  }
  if (kind == "bhattacharyya") {
    if (unnormalized)
      throw expfam::ArgumentError("bhattacharyya is defined between normalized densities");
    auto [p, q] = normalized_pair();
    return -std::log(expfam::bhattacharyya_coeff(p, q, alpha, scheme));
  }
  if (kind == "renyi") {
    if (unnormalized)
      throw expfam::ArgumentError("renyi is defined between normalized densities");
    auto [p, q] = normalized_pair();
    return expfam::renyi_div(p, q, alpha, scheme);
  }
  if (kind == "jensen") {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw expfam::ArgumentError("jensen: alpha must lie in (0,1)");
    if (unnormalized) {
      auto [p, q] = raw_pair();
      return alpha * (1.0 - alpha) *
             expfam::alpha_div(p, q, Skew::general(alpha), scheme);
    }
    auto [p, q] = normalized_pair();
    return -std::log(expfam::bhattacharyya_coeff(p, q, alpha, scheme));
  }
  if (kind == "mixed-alpha") return expfam::mixed_alpha_oracle(fam, t1, t2, alpha, scheme);
  if (kind == "mixed-bhattacharyya")
    return expfam::mixed_bhattacharyya_oracle(fam, t1, t2, alpha, scheme);
  if (kind == "duo-kl") {
    expfam::Density p = expfam::family_density(fam, t1, true);
    expfam::Density q = expfam::family_density(fam, t2, false);
    return expfam::kl_extended(p, q, scheme);
  }
  throw expfam::ArgumentError("unknown divergence kind '" + kind + "'");
}

}  // namespace

extern "C" {

const char* expfam_version(void) { return "0.1.0"; }

const char* expfam_status_name(expfam_status status) {
  switch (status) {
    case EXPFAM_OK: return "ok";
    case EXPFAM_ERR_ARGUMENT: return "argument-error";
    case EXPFAM_ERR_DOMAIN: return "domain-error";
    case EXPFAM_ERR_CONVERGENCE: return "no-convergence";
    case EXPFAM_ERR_NOT_CONVEX: return "not-convex";
    case EXPFAM_ERR_PARSE: return "parse-error";
    case EXPFAM_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* expfam_last_error(void) { return g_last_error.c_str(); }

void expfam_free(char* text) { delete[] text; }

expfam_status expfam_family_create(const char* kind, int dim, expfam_family** out) {
  if (!kind || !out) return fail_argument("expfam_family_create: null argument");
  return guarded([&] { *out = new expfam_family{expfam::Family::make(kind, dim)}; });
}

expfam_status expfam_family_from_json(const char* json, expfam_family** out,
                                      double* theta_out, int capacity, int* theta_len) {
  if (!json || !out) return fail_argument("expfam_family_from_json: null argument");
  return guarded([&] {
    auto [fam, theta] = expfam::Family::from_json(json);
    if (theta_len) *theta_len = theta ? static_cast<int>(theta->size()) : 0;
    if (theta && theta_out) {
      if (capacity < static_cast<int>(theta->size()))
        throw expfam::ArgumentError("theta buffer too small");
      std::memcpy(theta_out, theta->data(), theta->size() * sizeof(double));
    }
    *out = new expfam_family{std::move(fam)};
  });
}

expfam_status expfam_family_to_json(const expfam_family* family, const double* theta,
                                    int len, char** out) {
  if (!family || !out) return fail_argument("expfam_family_to_json: null argument");
  return guarded([&] {
    if (theta) {
      expfam::Vec t = to_vec(theta, len);
      check_param(family->fam, len);
      *out = copy_string(family->fam.to_json(&t));
    } else {
      *out = copy_string(family->fam.to_json(nullptr));
    }
  });
}

void expfam_family_destroy(expfam_family* family) { delete family; }

const char* expfam_family_kind(const expfam_family* family) {
  return family ? family->fam.name().c_str() : "";
}

int expfam_family_dim(const expfam_family* family) {
  return family ? family->fam.dim() : 0;
}

int expfam_family_param_len(const expfam_family* family) {
  return family ? family->fam.param_len() : 0;
}

int expfam_family_sample_len(const expfam_family* family) {
  return family ? family->fam.sample_len() : 0;
}

int expfam_family_in_domain(const expfam_family* family, const double* theta, int len) {
  if (!family || !theta || len != family->fam.param_len()) return 0;
  return family->fam.in_domain(to_vec(theta, len)) ? 1 : 0;
}

expfam_status expfam_theta_from_source(const expfam_family* family, const double* source,
                                       int source_len, double* theta_out, int capacity,
                                       int* theta_len) {
  if (!family || !source || !theta_out)
    return fail_argument("expfam_theta_from_source: null argument");
  return guarded([&] {
    expfam::Vec theta = family->fam.theta_from_source(to_vec(source, source_len));
    if (capacity < static_cast<int>(theta.size()))
      throw expfam::ArgumentError("theta buffer too small");
    std::memcpy(theta_out, theta.data(), theta.size() * sizeof(double));
    if (theta_len) *theta_len = static_cast<int>(theta.size());
  });
}

expfam_status expfam_cumulant(const expfam_family* family, const double* theta, int len,
                              double* out) {
  if (!family || !theta || !out) return fail_argument("expfam_cumulant: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    *out = family->fam.cumulant(to_vec(theta, len));
  });
}

expfam_status expfam_partition(const expfam_family* family, const double* theta, int len,
                               double* out) {
  if (!family || !theta || !out) return fail_argument("expfam_partition: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    *out = family->fam.partition(to_vec(theta, len));
  });
}

expfam_status expfam_grad_cumulant(const expfam_family* family, const double* theta,
                                   int len, double* grad) {
  if (!family || !theta || !grad)
    return fail_argument("expfam_grad_cumulant: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    expfam::Vec g = family->fam.grad_cumulant(to_vec(theta, len));
    std::memcpy(grad, g.data(), g.size() * sizeof(double));
  });
}

expfam_status expfam_grad_partition(const expfam_family* family, const double* theta,
                                    int len, double* grad) {
  if (!family || !theta || !grad)
    return fail_argument("expfam_grad_partition: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    expfam::Vec g = family->fam.grad_partition(to_vec(theta, len));
    std::memcpy(grad, g.data(), g.size() * sizeof(double));
  });
}

expfam_status expfam_density(const expfam_family* family, const double* theta, int len,
                             const double* x, int x_len, double* out) {
  if (!family || !theta || !x || !out) return fail_argument("expfam_density: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    *out = family->fam.density(to_vec(theta, len),
                               std::span<const double>(x, static_cast<size_t>(x_len)));
  });
}

expfam_status expfam_unnormalized_density(const expfam_family* family, const double* theta,
                                          int len, const double* x, int x_len,
                                          double* out) {
  if (!family || !theta || !x || !out)
    return fail_argument("expfam_unnormalized_density: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    *out = family->fam.unnormalized_density(
        to_vec(theta, len), std::span<const double>(x, static_cast<size_t>(x_len)));
  });
}

expfam_status expfam_scheme_create(const char* json, expfam_scheme** out) {
  if (!out) return fail_argument("expfam_scheme_create: null argument");
  return guarded([&] {
    *out = new expfam_scheme{expfam::Scheme::from_json(json ? json : "")};
  });
}

expfam_status expfam_scheme_set_seed(expfam_scheme* scheme, uint64_t seed) {
  if (!scheme) return fail_argument("expfam_scheme_set_seed: null argument");
  scheme->scheme.seed = seed;
  return EXPFAM_OK;
}

void expfam_scheme_destroy(expfam_scheme* scheme) { delete scheme; }

expfam_status expfam_divergence(const expfam_family* family, const char* kind,
                                int unnormalized, const double* theta1,
                                const double* theta2, int len, double alpha,
                                int kappa_scaling, double* out) {
  if (!family || !kind || !theta1 || !theta2 || !out)
    return fail_argument("expfam_divergence: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    *out = closed_form_divergence(family->fam, kind, unnormalized != 0,
                                  to_vec(theta1, len), to_vec(theta2, len), alpha,
                                  kappa_scaling != 0);
  });
}

expfam_status expfam_divergence_oracle(const expfam_family* family, const char* kind,
                                       int unnormalized, const double* theta1,
                                       const double* theta2, int len, double alpha,
                                       const expfam_scheme* scheme, double* out) {
  if (!family || !kind || !theta1 || !theta2 || !out)
    return fail_argument("expfam_divergence_oracle: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    expfam::Scheme s = scheme ? scheme->scheme : expfam::Scheme{};
    *out = oracle_divergence(family->fam, kind, unnormalized != 0, to_vec(theta1, len),
                             to_vec(theta2, len), alpha, s);
  });
}

expfam_status expfam_deform_probe(const expfam_family* family, const char* generator,
                                  const char* rho_json, const char* tau_json,
                                  const double* theta1, const double* theta2, int len,
                                  double alpha, const double* grid, int grid_len,
                                  char** json_out) {
  if (!family || !generator || !rho_json || !tau_json || !theta1 || !theta2 || !json_out)
    return fail_argument("expfam_deform_probe: null argument");
  return guarded([&] {
    check_param(family->fam, len);
    std::string gname = generator;
    expfam::Generator base;
    if (gname == "F") base = family->fam.cumulant_generator();
    else if (gname == "Z") base = family->fam.partition_generator();
    else throw expfam::ArgumentError("generator must be 'F' or 'Z'");

    expfam::MeanGenerator rho = expfam::MeanGenerator::from_json(rho_json);
    expfam::MeanGenerator tau = expfam::MeanGenerator::from_json(tau_json);
    expfam::Generator deformed = expfam::comparative_deform(base, rho, tau);

    std::vector<expfam::Vec> cert_grid;
    if (grid && grid_len > 0) {
      if (family->fam.param_len() != 1)
        throw expfam::ArgumentError("scalar certification grids need a 1-d family");
      for (int i = 0; i < grid_len; ++i) cert_grid.push_back({grid[i]});
    } else {
      for (const expfam::Vec& t : base.probe_grid()) {
        expfam::Vec u(t.size());
        bool ok = true;
        try {
          for (size_t i = 0; i < t.size(); ++i) u[i] = rho.h(t[i]);
        } catch (const expfam::DomainError&) {
          ok = false;
        }
        if (ok) cert_grid.push_back(u);
      }
    }
    expfam::Vec t1 = to_vec(theta1, len), t2 = to_vec(theta2, len);
    double span = 0.0;
    for (size_t i = 0; i < t1.size(); ++i)
      span = std::max(span, std::abs(t1[i] - t2[i]));
    expfam::ConvexityReport cert =
        expfam::convexity_certificate(deformed, cert_grid, std::max(1e-4, 1e-2 * span));

    nlohmann::json j;
    j["generator"] = gname;
    j["rho"] = nlohmann::json::parse(rho.to_json());
    j["tau"] = nlohmann::json::parse(tau.to_json());
    j["verdict"] = expfam::verdict_name(cert.verdict);
    j["worst_violation"] = cert.worst_violation;
    if (cert.verdict != expfam::ConvexVerdict::NotConvex) {
      j["bregman"] = expfam::bregman(deformed, t1, t2);
      j["jensen_scaled"] =
          expfam::jensen_scaled(deformed, t1, t2, expfam::Skew::from_alpha(alpha));
    }
    *json_out = copy_string(j.dump());
  });
}

expfam_status expfam_verify(const char* suite, const char* family, uint64_t seed,
                            char** json_out) {
  if (!suite || !json_out) return fail_argument("expfam_verify: null argument");
  return guarded([&] {
    expfam::VerifyOptions options;
    options.suite = suite;
    options.family = family ? family : "";
    options.seed = seed;
    *json_out = copy_string(expfam::run_verify(options).dump(2) + "\n");
  });
}

}  // extern "C"
