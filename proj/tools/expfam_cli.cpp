// Command-line front end for the expfam shared library: single divergence
// computations with oracle cross-checks, identity-verification suites,
// alpha sweeps, and deformation sweeps. Talks to the library through the C
// API only.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "expfam/expfam.h"

namespace {

using nlohmann::json;

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

void check(expfam_status status, const std::string& context) {
  if (status != EXPFAM_OK)
    fail(1, context + ": " + expfam_status_name(status) + ": " + expfam_last_error());
}

struct FamilyHandle {
  expfam_family* ptr = nullptr;
  ~FamilyHandle() { expfam_family_destroy(ptr); }
};

struct SchemeHandle {
  expfam_scheme* ptr = nullptr;
  ~SchemeHandle() { expfam_scheme_destroy(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { expfam_free(ptr); }
};

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_inline_or_file(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return arg;
  std::ifstream in(arg);
  if (!in) fail(1, "cannot read file '" + arg + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared flags describing the family and the two parameter points.
struct FamilyArgs {
  std::string kind = "exponential";
  std::string family_json;
  int dim = 1;
  std::vector<double> theta1, theta2;
  bool source_param = false;

  void attach(CLI::App* cmd, bool need_thetas = true) {
    cmd->add_option("--family", kind,
                    "family kind (exponential, poisson, bernoulli, centered-normal-1d, "
                    "normal-1d, centered-normal-nd)");
    cmd->add_option("--family-json", family_json,
                    "family descriptor as inline JSON or a file path");
    cmd->add_option("--dim", dim, "sample dimension (centered-normal-nd only)");
    auto* t1 = cmd->add_option("--theta1", theta1, "first natural parameter")
                   ->delimiter(',');
    auto* t2 = cmd->add_option("--theta2", theta2, "second natural parameter")
                   ->delimiter(',');
    if (need_thetas) {
      t1->required();
      t2->required();
    }
    cmd->add_flag("--source-param", source_param,
                  "interpret --theta1/--theta2 as source parameters "
                  "(rate, probability, variance, (mean, variance), packed covariance)");
  }

  FamilyHandle open() const {
    FamilyHandle fam;
    if (!family_json.empty()) {
      std::string text = read_inline_or_file(family_json);
      check(expfam_family_from_json(text.c_str(), &fam.ptr, nullptr, 0, nullptr),
            "family");
    } else {
      check(expfam_family_create(kind.c_str(), dim, &fam.ptr), "family");
    }
    return fam;
  }

  std::vector<double> natural(const FamilyHandle& fam, const std::vector<double>& raw,
                              const char* which) const {
    if (!source_param) {
      if (static_cast<int>(raw.size()) != expfam_family_param_len(fam.ptr))
        fail(1, std::string(which) + " must have " +
                    std::to_string(expfam_family_param_len(fam.ptr)) + " coordinates");
      return raw;
    }
    std::vector<double> theta(64);
    int len = 0;
    check(expfam_theta_from_source(fam.ptr, raw.data(), static_cast<int>(raw.size()),
                                   theta.data(), static_cast<int>(theta.size()), &len),
          which);
    theta.resize(len);
    return theta;
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("EXPFAM_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    fail(1, "EXPFAM_SEED must be an unsigned integer");
  }
  return 24301;
}

SchemeHandle open_scheme(const std::string& scheme_json, std::optional<std::uint64_t> seed) {
  SchemeHandle scheme;
  std::string text = scheme_json.empty() ? "" : read_inline_or_file(scheme_json);
  check(expfam_scheme_create(text.c_str(), &scheme.ptr), "scheme");
  if (seed) check(expfam_scheme_set_seed(scheme.ptr, *seed), "scheme");
  return scheme;
}

json family_echo(const FamilyHandle& fam) {
  return json{{"kind", expfam_family_kind(fam.ptr)}, {"dim", expfam_family_dim(fam.ptr)}};
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(1, "cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out.flush()) fail(1, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(1, "failed to move temporary file onto '" + path + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------

int run_div(const FamilyArgs& fargs, const std::string& kind, double alpha,
            bool unnormalized, bool oracle, bool kappa, const std::string& scheme_json,
            std::optional<std::uint64_t> seed, double tolerance) {
  FamilyHandle fam = fargs.open();
  std::vector<double> t1 = fargs.natural(fam, fargs.theta1, "--theta1");
  std::vector<double> t2 = fargs.natural(fam, fargs.theta2, "--theta2");
  int len = static_cast<int>(t1.size());

  double closed = 0.0;
  check(expfam_divergence(fam.ptr, kind.c_str(), unnormalized ? 1 : 0, t1.data(),
                          t2.data(), len, alpha, kappa ? 1 : 0, &closed),
        "divergence");

  json report;
  report["request"] = {
      {"family", family_echo(fam)},
      {"theta1", t1},
      {"theta2", t2},
      {"kind", kind},
      {"alpha", std::isfinite(alpha) ? json(alpha) : json()},
      {"unnormalized", unnormalized},
      {"oracle", oracle},
      {"kappa_scaling", kappa},
  };
  report["closed_form"] = closed;
  report["tolerance"] = tolerance;

  bool pass = true;
  if (oracle) {
    SchemeHandle scheme = open_scheme(scheme_json, seed);
    double oval = 0.0;
    check(expfam_divergence_oracle(fam.ptr, kind.c_str(), unnormalized ? 1 : 0, t1.data(),
                                   t2.data(), len, alpha, scheme.ptr, &oval),
          "oracle");
    double abs_err = std::abs(closed - oval);
    double rel_err = abs_err / std::max({std::abs(closed), std::abs(oval), 1e-300});
    pass = abs_err <= tolerance || rel_err <= tolerance;
    report["oracle"] = oval;
    report["abs_err"] = abs_err;
    report["rel_err"] = rel_err;
    report["verdict"] = pass ? "pass" : "fail";
  } else {
    report["oracle"] = nullptr;
    report["abs_err"] = nullptr;
    report["rel_err"] = nullptr;
    report["verdict"] = "oracle-skipped";
  }
  std::cout << report.dump(2) << "\n";
  return pass ? 0 : 2;
}

int run_verify(const std::string& suite, const std::string& family, std::uint64_t seed) {
  OwnedString out;
  check(expfam_verify(suite.c_str(), family.empty() ? nullptr : family.c_str(), seed,
                      &out.ptr),
        "verify");
  std::cout << out.ptr;
  json summary = json::parse(out.ptr);
  return summary["failed"].get<int>() == 0 ? 0 : 2;
}

int run_sweep(const FamilyArgs& fargs, double alpha_min, double alpha_max, int steps,
              bool endpoints, const std::string& scheme_json,
              std::optional<std::uint64_t> seed, const std::string& output) {
  if (!(alpha_min > 0.0 && alpha_max < 1.0 && alpha_min <= alpha_max))
    fail(1, "sweep needs 0 < alpha-min <= alpha-max < 1");
  if (steps < 1) fail(1, "sweep needs at least one step");

  FamilyHandle fam = fargs.open();
  std::vector<double> t1 = fargs.natural(fam, fargs.theta1, "--theta1");
  std::vector<double> t2 = fargs.natural(fam, fargs.theta2, "--theta2");
  int len = static_cast<int>(t1.size());
  SchemeHandle scheme = open_scheme(scheme_json, seed);

  std::vector<double> alphas;
  if (endpoints) alphas.push_back(0.0);
  for (int i = 0; i < steps; ++i)
    alphas.push_back(steps == 1 ? alpha_min
                                : alpha_min + (alpha_max - alpha_min) * i / (steps - 1));
  if (endpoints) alphas.push_back(1.0);

  auto closed = [&](const char* kind, int unnorm, double a) {
    double v = 0.0;
    check(expfam_divergence(fam.ptr, kind, unnorm, t1.data(), t2.data(), len, a, 0, &v),
          "divergence");
    return v;
  };
  auto oracle = [&](const char* kind, int unnorm, double a) {
    double v = 0.0;
    check(expfam_divergence_oracle(fam.ptr, kind, unnorm, t1.data(), t2.data(), len, a,
                                   scheme.ptr, &v),
          "oracle");
    return v;
  };

  std::ostringstream csv;
  csv << "alpha,jensen_F_scaled,bhattacharyya_oracle,jensen_Z_scaled,alpha_div_oracle,"
         "err_F,err_Z\n";
  for (double a : alphas) {
    double jf = closed("alpha", 0, a);
    double of = oracle("alpha", 0, a);
    double jz = closed("alpha", 1, a);
    double oz = oracle("alpha", 1, a);
    csv << format17(a) << ',' << format17(jf) << ',' << format17(of) << ','
        << format17(jz) << ',' << format17(oz) << ',' << format17(std::abs(jf - of))
        << ',' << format17(std::abs(jz - oz)) << '\n';
  }
  write_atomic(output, csv.str());
  json info = {{"output", output}, {"rows", alphas.size()}};
  std::cout << info.dump(2) << "\n";
  return 0;
}

int run_deform(const FamilyArgs& fargs, const std::string& generator,
               const std::string& rho_json, const std::string& tau_json, double p_min,
               double p_max, double p_step, bool p_range, double alpha,
               std::vector<double> grid_spec, const std::string& output) {
  FamilyHandle fam = fargs.open();
  std::vector<double> t1 = fargs.natural(fam, fargs.theta1, "--theta1");
  std::vector<double> t2 = fargs.natural(fam, fargs.theta2, "--theta2");
  int len = static_cast<int>(t1.size());

  std::vector<double> grid;
  if (!grid_spec.empty()) {
    if (grid_spec.size() != 3) fail(1, "--grid expects min,max,points");
    int n = static_cast<int>(grid_spec[2]);
    if (n < 2 || !(grid_spec[0] < grid_spec[1])) fail(1, "--grid expects min < max and points >= 2");
    for (int i = 0; i < n; ++i)
      grid.push_back(grid_spec[0] + (grid_spec[1] - grid_spec[0]) * i / (n - 1));
  }

  auto probe = [&](const std::string& rho, const std::string& tau) {
    OwnedString out;
    check(expfam_deform_probe(fam.ptr, generator.c_str(), rho.c_str(), tau.c_str(),
                              t1.data(), t2.data(), len, alpha,
                              grid.empty() ? nullptr : grid.data(),
                              static_cast<int>(grid.size()), &out.ptr),
          "deform");
    return json::parse(out.ptr);
  };

  if (!p_range) {
    std::string rho = rho_json.empty() ? std::string("{\"tag\":\"identity\"}")
                                       : read_inline_or_file(rho_json);
    std::string tau = tau_json.empty() ? std::string("{\"tag\":\"identity\"}")
                                       : read_inline_or_file(tau_json);
    json result = probe(rho, tau);
    std::cout << result.dump(2) << "\n";
    return 0;
  }

  if (output.empty()) fail(1, "--output is required for a p-range sweep");
  if (!(p_step > 0.0) || p_max < p_min) fail(1, "invalid p range");
  std::ostringstream csv;
  csv << "p,verdict,bregman,jensen_scaled\n";
  int rows = 0;
  for (double p = p_min; p <= p_max + 1e-12; p += p_step) {
    json row = probe("{\"tag\":\"identity\"}",
                     std::string("{\"tag\":\"power\",\"p\":") + format17(p) + "}");
    csv << format17(p) << ',' << row["verdict"].get<std::string>() << ',';
    if (row.contains("bregman")) csv << format17(row["bregman"].get<double>());
    csv << ',';
    if (row.contains("jensen_scaled")) csv << format17(row["jensen_scaled"].get<double>());
    csv << '\n';
    ++rows;
  }
  write_atomic(output, csv.str());
  json info = {{"output", output}, {"rows", rows}};
  std::cout << info.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "expfam: closed-form divergences of exponential families cross-checked "
      "against numerical-integration oracles"};
  app.require_subcommand(1);

  // div ----------------------------------------------------------------
  auto* div = app.add_subcommand("div", "compute one divergence, optionally vs oracle");
  FamilyArgs div_fam;
  div_fam.attach(div);
  std::string div_kind;
  double div_alpha = std::numeric_limits<double>::quiet_NaN();
  bool div_unnorm = false, div_oracle = false, div_kappa = false;
  std::string div_scheme;
  std::optional<std::uint64_t> div_seed;
  double div_tol = 1e-6;
  div->add_option("--kind", div_kind,
                  "divergence kind: kl, rkl, alpha, hellinger, bhattacharyya, renyi, "
                  "jensen, bregman, mixed-alpha, mixed-bhattacharyya, duo-kl")
      ->required();
  div->add_option("--alpha", div_alpha, "skew parameter");
  div->add_flag("--unnormalized", div_unnorm, "divergence between unnormalized densities");
  div->add_flag("--oracle", div_oracle, "also integrate the density-side definition");
  div->add_flag("--kappa", div_kappa, "alternative kappa(alpha) Jensen scaling");
  div->add_option("--scheme-json", div_scheme, "integration scheme (inline JSON or file)");
  div->add_option("--seed", div_seed, "Monte-Carlo seed (overrides EXPFAM_SEED)");
  div->add_option("--tolerance", div_tol, "oracle agreement tolerance");

  // verify -------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run identity-verification suites");
  std::string verify_suite = "all";
  std::string verify_family;
  std::optional<std::uint64_t> verify_seed;
  verify->add_option("suite", verify_suite,
                     "convexity | identities | legendre | deformation | all");
  verify->add_option("--family", verify_family, "restrict to one family");
  verify->add_option("--seed", verify_seed, "Monte-Carlo seed (overrides EXPFAM_SEED)");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "tabulate scaled divergences across alpha");
  FamilyArgs sweep_fam;
  sweep_fam.attach(sweep);
  double a_min = 0.1, a_max = 0.9;
  int steps = 9;
  bool endpoints = false;
  std::string sweep_scheme, sweep_output;
  std::optional<std::uint64_t> sweep_seed;
  sweep->add_option("--alpha-min", a_min, "first alpha (in (0,1))");
  sweep->add_option("--alpha-max", a_max, "last alpha (in (0,1))");
  sweep->add_option("--steps", steps, "number of alpha values");
  sweep->add_flag("--endpoints", endpoints, "append alpha in {0,1} Bregman-branch rows");
  sweep->add_option("--scheme-json", sweep_scheme, "integration scheme");
  sweep->add_option("--seed", sweep_seed, "Monte-Carlo seed (overrides EXPFAM_SEED)");
  sweep->add_option("--output", sweep_output, "CSV output path")->required();

  // deform ---------------------------------------------------------------
  auto* deform = app.add_subcommand(
      "deform", "certify convexity of deformed generators and their divergences");
  FamilyArgs deform_fam;
  deform_fam.attach(deform);
  std::string gen_name = "Z", rho_json, tau_json, deform_output;
  double p_min = 0.0, p_max = 0.0, p_step = 0.25, deform_alpha = 0.5;
  std::vector<double> grid_spec;
  bool p_range = false;
  deform->add_option("--generator", gen_name, "generator to deform: F or Z");
  deform->add_option("--rho-json", rho_json, "rho mean-generator spec (single probe)");
  deform->add_option("--tau-json", tau_json, "tau mean-generator spec (single probe)");
  auto* pmin_opt = deform->add_option("--p-min", p_min, "power-sweep start");
  deform->add_option("--p-max", p_max, "power-sweep end");
  deform->add_option("--p-step", p_step, "power-sweep step");
  deform->add_option("--alpha", deform_alpha, "skew for the Jensen column");
  deform->add_option("--grid", grid_spec, "certification grid as min,max,points")
      ->delimiter(',');
  deform->add_option("--output", deform_output, "CSV output path (p-range sweep)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::optional<std::uint64_t> env_seed;
    if (std::getenv("EXPFAM_SEED")) env_seed = default_seed();
    if (div->parsed()) {
      auto seed = div_seed ? div_seed : env_seed;
      return run_div(div_fam, div_kind, div_alpha, div_unnorm, div_oracle, div_kappa,
                     div_scheme, seed, div_tol);
    }
    if (verify->parsed()) {
      std::uint64_t seed = verify_seed ? *verify_seed : (env_seed ? *env_seed : 13);
      return run_verify(verify_suite, verify_family, seed);
    }
    if (sweep->parsed()) {
      auto seed = sweep_seed ? sweep_seed : env_seed;
      return run_sweep(sweep_fam, a_min, a_max, steps, endpoints, sweep_scheme, seed,
                       sweep_output);
    }
    if (deform->parsed()) {
      p_range = pmin_opt->count() > 0;
      return run_deform(deform_fam, gen_name, rho_json, tau_json, p_min, p_max, p_step,
                        p_range, deform_alpha, grid_spec, deform_output);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
