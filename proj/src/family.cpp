#include "family.hpp"

#include <array>
#include <cmath>

#include "sym_packed.hpp"
#include <nlohmann/json.hpp>

namespace expfam {

namespace {

constexpr double kDomainMargin = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

}  // namespace

bool Support::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != (kind == Kind::RealVector ? dim : 1)) return false;
  if (!all_finite(x)) return false;
  switch (kind) {
    case Kind::HalfLine: return x[0] >= 0.0;
    case Kind::RealLine: return true;
    case Kind::Naturals: return x[0] >= 0.0 && is_integer(x[0]);
    case Kind::Binary: return x[0] == 0.0 || x[0] == 1.0;
    case Kind::RealVector: return true;
  }
  return false;
}

Family::Family(FamilyKind kind, int dim) : kind_(kind), dim_(dim) { build_grid(); }

Family Family::make(FamilyKind kind, int dim) {
  int expected = (kind == FamilyKind::CenteredNormalND) ? dim : 1;
  if (kind == FamilyKind::CenteredNormalND) {
    if (dim < 1) throw ArgumentError("centered-normal-nd requires dim >= 1");
  } else if (dim != 1) {
    throw ArgumentError("family '" + kind_names()[static_cast<int>(kind)] +
                        "' requires dim == 1");
  }
  return Family(kind, expected);
}

Family Family::make(const std::string& kind_name, int dim) {
  auto k = kind_from_name(kind_name);
  if (!k) throw ArgumentError("unknown family kind '" + kind_name + "'");
  return make(*k, dim);
}

const std::vector<std::string>& Family::kind_names() {
  static const std::vector<std::string> names = {
      "exponential", "poisson", "bernoulli", "centered-normal-1d", "normal-1d",
      "centered-normal-nd"};
  return names;
}

std::optional<FamilyKind> Family::kind_from_name(const std::string& name) {
  const auto& names = kind_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<FamilyKind>(i);
  return std::nullopt;
}

const std::string& Family::name() const { return kind_names()[static_cast<int>(kind_)]; }

int Family::param_len() const {
  switch (kind_) {
    case FamilyKind::Normal1D: return 2;
    case FamilyKind::CenteredNormalND: return packed_len(dim_);
    default: return 1;
  }
}

int Family::sample_len() const {
  return kind_ == FamilyKind::CenteredNormalND ? dim_ : 1;
}

ParamLayout Family::layout() const {
  return kind_ == FamilyKind::CenteredNormalND ? ParamLayout::SymMatrix
                                               : ParamLayout::Vector;
}

Support Family::support() const {
  Support s;
  switch (kind_) {
    case FamilyKind::Exponential:
      s.kind = Support::Kind::HalfLine;
      break;
    case FamilyKind::Poisson:
      s.kind = Support::Kind::Naturals;
      s.log_weight = [](long k) { return -std::lgamma(static_cast<double>(k) + 1.0); };
      break;
    case FamilyKind::Bernoulli:
      s.kind = Support::Kind::Binary;
      break;
    case FamilyKind::CenteredNormal1D:
    case FamilyKind::Normal1D:
      s.kind = Support::Kind::RealLine;
      break;
    case FamilyKind::CenteredNormalND:
      s.kind = Support::Kind::RealVector;
      s.dim = dim_;
      break;
  }
  return s;
}

bool Family::in_domain(const Vec& theta) const {
  if (static_cast<int>(theta.size()) != param_len()) return false;
  if (!all_finite(theta)) return false;
  switch (kind_) {
    case FamilyKind::Exponential:
    case FamilyKind::CenteredNormal1D:
      return theta[0] > kDomainMargin;
    case FamilyKind::Poisson:
    case FamilyKind::Bernoulli:
      return true;
    case FamilyKind::Normal1D:
      return theta[0] > kDomainMargin;
    case FamilyKind::CenteredNormalND:
      return cholesky_packed(theta, dim_, kDomainMargin).ok;
  }
  return false;
}

void Family::require_domain(const Vec& theta) const {
  if (!in_domain(theta))
    throw DomainError("family '" + name() + "': parameter outside natural domain");
}

double Family::cumulant(const Vec& theta) const {
  require_domain(theta);
  switch (kind_) {
    case FamilyKind::Exponential:
      return -std::log(theta[0]);
    case FamilyKind::Poisson:
      return std::exp(theta[0]);
    case FamilyKind::Bernoulli:
      // log(1 + e^t), evaluated without overflow
      return theta[0] > 0 ? theta[0] + std::log1p(std::exp(-theta[0]))
                          : std::log1p(std::exp(theta[0]));
    case FamilyKind::CenteredNormal1D:
      return 0.5 * (kLog2Pi - std::log(theta[0]));
    case FamilyKind::Normal1D:
      return 0.5 * (kLog2Pi - std::log(theta[0])) + sq(theta[1]) / (2.0 * theta[0]);
    case FamilyKind::CenteredNormalND: {
      auto c = cholesky_packed(theta, dim_, kDomainMargin);
      return 0.5 * (dim_ * kLog2Pi - c.log_det);
    }
  }
  throw ArgumentError("unreachable family kind");
}

double Family::partition(const Vec& theta) const { return std::exp(cumulant(theta)); }

Vec Family::grad_cumulant(const Vec& theta) const {
  require_domain(theta);
  switch (kind_) {
    case FamilyKind::Exponential:
      return {-1.0 / theta[0]};
    case FamilyKind::Poisson:
      return {std::exp(theta[0])};
    case FamilyKind::Bernoulli:
      return {1.0 / (1.0 + std::exp(-theta[0]))};
    case FamilyKind::CenteredNormal1D:
      return {-0.5 / theta[0]};
    case FamilyKind::Normal1D: {
      double t1 = theta[0], t2 = theta[1];
      return {-0.5 / t1 - sq(t2) / (2.0 * sq(t1)), t2 / t1};
    }
    case FamilyKind::CenteredNormalND: {
      Vec inv = spd_inverse_packed(theta, dim_);
      for (double& v : inv) v *= -0.5;
      return inv;
    }
  }
  throw ArgumentError("unreachable family kind");
}

Vec Family::grad_partition(const Vec& theta) const {
  require_domain(theta);
  switch (kind_) {
    case FamilyKind::Exponential:
      return {-1.0 / sq(theta[0])};
    case FamilyKind::Poisson: {
      double et = std::exp(theta[0]);
      return {et * std::exp(et)};
    }
    case FamilyKind::Bernoulli:
      return {std::exp(theta[0])};
    case FamilyKind::CenteredNormal1D:
      return {-std::sqrt(M_PI / 2.0) * std::pow(theta[0], -1.5)};
    case FamilyKind::Normal1D: {
      double t1 = theta[0], t2 = theta[1];
      double e = std::exp(sq(t2) / (2.0 * t1));
      return {-std::sqrt(M_PI / 2.0) * (t1 + sq(t2)) * e / std::pow(t1, 2.5),
              std::sqrt(2.0 * M_PI) * t2 * e / std::pow(t1, 1.5)};
    }
    case FamilyKind::CenteredNormalND: {
      double z = partition(theta);
      Vec g = grad_cumulant(theta);
      for (double& v : g) v *= z;
      return g;
    }
  }
  throw ArgumentError("unreachable family kind");
}

Vec Family::sufficient_stat(std::span<const double> x) const {
  switch (kind_) {
    case FamilyKind::Exponential:
      return {-x[0]};
    case FamilyKind::Poisson:
    case FamilyKind::Bernoulli:
      return {x[0]};
    case FamilyKind::CenteredNormal1D:
      return {-0.5 * sq(x[0])};
    case FamilyKind::Normal1D:
      return {-0.5 * sq(x[0]), x[0]};
    case FamilyKind::CenteredNormalND: {
      // pack(-1/2 x x^T)
      Vec t(packed_len(dim_));
      int k = 0;
      for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j, ++k) t[k] = -0.5 * x[i] * x[j];
      return t;
    }
  }
  throw ArgumentError("unreachable family kind");
}

double Family::log_unnormalized(const Vec& theta, std::span<const double> x) const {
  require_domain(theta);
  if (!support().contains(x)) return kNegInf;
  Vec t = sufficient_stat(x);
  return inner(theta, t);
}

double Family::unnormalized_density(const Vec& theta, std::span<const double> x) const {
  return std::exp(log_unnormalized(theta, x));
}

double Family::density(const Vec& theta, std::span<const double> x) const {
  double lu = log_unnormalized(theta, x);
  return std::exp(lu - cumulant(theta));
}

double Family::inner(const Vec& a, const Vec& b) const {
  if (layout() == ParamLayout::SymMatrix) return packed_inner(dim_, a, b);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec Family::theta_from_source(const Vec& source) const {
  switch (kind_) {
    case FamilyKind::Exponential:
      if (source.size() != 1 || source[0] <= 0.0)
        throw ArgumentError("exponential source parameter must be a rate > 0");
      return {source[0]};
    case FamilyKind::Poisson:
      if (source.size() != 1 || source[0] <= 0.0)
        throw ArgumentError("poisson source parameter must be a rate > 0");
      return {std::log(source[0])};
    case FamilyKind::Bernoulli:
      if (source.size() != 1 || source[0] <= 0.0 || source[0] >= 1.0)
        throw ArgumentError("bernoulli source parameter must be in (0,1)");
      return {std::log(source[0] / (1.0 - source[0]))};
    case FamilyKind::CenteredNormal1D:
      if (source.size() != 1 || source[0] <= 0.0)
        throw ArgumentError("centered-normal-1d source parameter must be a variance > 0");
      return {1.0 / source[0]};
    case FamilyKind::Normal1D:
      if (source.size() != 2 || source[1] <= 0.0)
        throw ArgumentError("normal-1d source parameters are (mean, variance > 0)");
      return {1.0 / source[1], source[0] / source[1]};
    case FamilyKind::CenteredNormalND:
      if (static_cast<int>(source.size()) != packed_len(dim_))
        throw ArgumentError("centered-normal-nd source is a packed covariance matrix");
      return spd_inverse_packed(source, dim_);
  }
  throw ArgumentError("unreachable family kind");
}

void Family::build_grid() {
  switch (kind_) {
    case FamilyKind::Exponential:
    case FamilyKind::CenteredNormal1D:
      for (double t : {0.3, 0.7, 1.0, 1.5, 2.0, 3.5, 5.0}) grid_.push_back({t});
      break;
    case FamilyKind::Poisson:
      for (double t : {-1.5, -0.5, 0.0, 0.5, 1.2}) grid_.push_back({t});
      break;
    case FamilyKind::Bernoulli:
      for (double t : {-2.0, -0.75, 0.0, 0.6, 1.8}) grid_.push_back({t});
      break;
    case FamilyKind::Normal1D:
      grid_ = {{0.5, -1.0}, {0.5, 0.5}, {1.0, 0.0}, {1.0, 1.0},
               {2.0, -0.5}, {2.0, 1.5}, {3.0, 0.0}};
      break;
    case FamilyKind::CenteredNormalND: {
      int d = dim_;
      auto diag = [d](double v) {
        std::vector<double> full(static_cast<size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i) full[i * d + i] = v;
        return full;
      };
      auto a = diag(1.0);
      grid_.push_back(pack_sym(a.data(), d));
      auto b = diag(1.8);
      grid_.push_back(pack_sym(b.data(), d));
      // Banded SPD member: eigenvalues 1.3 + 0.6 cos(k pi / (d+1)) > 0.7.
      auto c = diag(1.3);
      for (int i = 0; i + 1 < d; ++i) {
        c[i * d + i + 1] = 0.3;
        c[(i + 1) * d + i] = 0.3;
      }
      grid_.push_back(pack_sym(c.data(), d));
      auto e = diag(0.6);
      grid_.push_back(pack_sym(e.data(), d));
      break;
    }
  }
}

Generator Family::cumulant_generator() const {
  Family fam = *this;
  Generator g(
      "F[" + name() + "]", param_len(),
      [fam](const Vec& t) { return fam.cumulant(t); },
      [fam](const Vec& t) { return fam.in_domain(t); },
      [fam](const Vec& t) { return fam.grad_cumulant(t); }, layout(),
      layout() == ParamLayout::SymMatrix ? dim_ : 0);
  g.set_probe_grid(grid_);
  return g;
}

Generator Family::partition_generator() const {
  Family fam = *this;
  Generator g(
      "Z[" + name() + "]", param_len(),
      [fam](const Vec& t) { return fam.partition(t); },
      [fam](const Vec& t) { return fam.in_domain(t); },
      [fam](const Vec& t) { return fam.grad_partition(t); }, layout(),
      layout() == ParamLayout::SymMatrix ? dim_ : 0);
  g.set_probe_grid(grid_);
  return g;
}

Generator Family::partition_minus_one_generator() const {
  Family fam = *this;
  Generator g(
      "Z-1[" + name() + "]", param_len(),
      [fam](const Vec& t) { return fam.partition(t) - 1.0; },
      [fam](const Vec& t) { return fam.in_domain(t); },
      [fam](const Vec& t) { return fam.grad_partition(t); }, layout(),
      layout() == ParamLayout::SymMatrix ? dim_ : 0);
  g.set_probe_grid(grid_);
  return g;
}

std::string Family::to_json(const Vec* theta) const {
  nlohmann::json j;
  j["kind"] = name();
  j["dim"] = dim_;
  if (theta) j["theta"] = *theta;
  return j.dump();
}

std::pair<Family, std::optional<Vec>> Family::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("family descriptor: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ParseError("family descriptor: expected object with string 'kind'");
  int dim = 1;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer())
      throw ParseError("family descriptor: 'dim' must be an integer");
    dim = j["dim"].get<int>();
  }
  Family fam = Family::make(j["kind"].get<std::string>(), dim);
  std::optional<Vec> theta;
  if (j.contains("theta")) {
    if (!j["theta"].is_array())
      throw ParseError("family descriptor: 'theta' must be an array");
    theta = j["theta"].get<Vec>();
    if (static_cast<int>(theta->size()) != fam.param_len())
      throw ParseError("family descriptor: 'theta' has wrong length");
  }
  return {fam, theta};
}

}  // namespace expfam
