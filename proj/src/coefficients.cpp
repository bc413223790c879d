#include "rws/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include "json.hpp"
#include <ostream>

#include "rws/error.hpp"

namespace rws {

namespace {

constexpr double kExponentTol = 1e-12;

int sgn(double v) { return v > kExponentTol ? 1 : (v < -kExponentTol ? -1 : 0); }

struct WeightExponents {
  double power = 0.0;    // j^power
  double loglog = 0.0;   // (log log j)^{-loglog}
};

WeightExponents weight_exponents(CriterionKind kind, double gamma) {
  switch (kind) {
    case CriterionKind::SqrtJ: return {0.5, 0.0};
    case CriterionKind::Gamma: return {1.0 / gamma, 0.0};
    case CriterionKind::LogLog: return {0.5, 1.0};
    default: return {0.0, 0.0};
  }
}

// Bertrand-type test for sum x^A (log x)^B (log log x)^C once the exponential
// factor is neutral; threshold is -1 for a sum over all j, 0 for j_n = q^n
// (the term becomes q^{nA} n^B (log n)^C).
bool bertrand_converges(double A, double B, double C, double threshold) {
  if (sgn(A - threshold) != 0) return A < threshold;
  if (sgn(B + 1.0) != 0) return B < -1.0;
  return C < -1.0 - kExponentTol;
}

}  // namespace

CoefficientField CoefficientField::zeros(int J_max) {
  require(J_max >= 0 && J_max <= kMaxDenseScale, ErrorKind::InvalidParameter,
          "J_max must lie in [0, " + std::to_string(kMaxDenseScale) + "], got " + std::to_string(J_max));
  CoefficientField f;
  f.J_max = J_max;
  f.levels.resize(static_cast<std::size_t>(J_max) + 1);
  for (int j = 0; j <= J_max; ++j) f.levels[static_cast<std::size_t>(j)].assign(std::size_t{1} << j, 0.0);
  return f;
}

namespace {
void check_index(const CoefficientField& f, int j, std::int64_t k) {
  if (j < 0 || static_cast<std::size_t>(j) >= f.levels.size() || k < 0 ||
      static_cast<std::size_t>(k) >= f.levels[static_cast<std::size_t>(j)].size()) {
    fail(ErrorKind::InvalidParameter,
         "coefficient index (" + std::to_string(j) + ", " + std::to_string(k) + ") out of range");
  }
}
}  // namespace

double CoefficientField::at(int j, std::int64_t k) const {
  check_index(*this, j, k);
  return levels[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
}

void CoefficientField::set(int j, std::int64_t k, double value) {
  check_index(*this, j, k);
  levels[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = value;
}

void CoefficientField::validate() const {
  require(J_max >= 0 && levels.size() == static_cast<std::size_t>(J_max) + 1, ErrorKind::InvalidParameter,
          "field must hold levels 0..J_max");
  require(std::isfinite(coarse), ErrorKind::InvalidParameter, "non-finite coarse coefficient");
  for (int j = 0; j <= J_max; ++j) {
    const auto& lvl = levels[static_cast<std::size_t>(j)];
    require(lvl.size() == scale_size(j), ErrorKind::InvalidParameter,
            "level " + std::to_string(j) + " must hold 2^j entries");
    for (double v : lvl) require(std::isfinite(v), ErrorKind::InvalidParameter, "non-finite coefficient at level " + std::to_string(j));
  }
}

double RateDescriptor::formula(std::int64_t j) const {
  if (j < j_min || j < 0) return 0.0;
  const double x = static_cast<double>(j);
  double v = K * std::exp2(-s * x);
  if (a != 0.0) v *= std::pow(x, a);
  if (b != 0.0) v *= std::pow(std::log(x), b);
  if (c != 0.0) v *= std::pow(std::log(std::log(x)), c);
  return v;
}

bool RateDescriptor::active(std::int64_t j) const {
  if (j < j_min) return false;
  switch (support) {
    case Support::All: return true;
    case Support::Explicit: return std::binary_search(indices.begin(), indices.end(), static_cast<int>(j));
    case Support::Geometric: {
      if (j < q) return false;
      std::int64_t p = q;
      while (p < j) p *= q;
      return p == j;
    }
  }
  return false;
}

double RateDescriptor::value(std::int64_t j) const { return active(j) ? formula(j) : 0.0; }

void RateDescriptor::validate() const {
  require(std::isfinite(K) && K >= 0.0, ErrorKind::InvalidParameter, "rate constant must be finite and >= 0");
  require(std::isfinite(s) && std::isfinite(a) && std::isfinite(b) && std::isfinite(c), ErrorKind::InvalidParameter,
          "rate exponents must be finite");
  require(j_min >= 0, ErrorKind::InvalidParameter, "j_min must be >= 0");
  if (b != 0.0) require(j_min >= 2, ErrorKind::InvalidParameter, "log factor needs j_min >= 2");
  if (c != 0.0) require(j_min >= 3, ErrorKind::InvalidParameter, "log log factor needs j_min >= 3");
  if (a < 0.0) require(j_min >= 1, ErrorKind::InvalidParameter, "negative power needs j_min >= 1");
  if (support == Support::Geometric) require(q >= 2, ErrorKind::InvalidParameter, "geometric support needs q >= 2");
  if (support == Support::Explicit) {
    require(std::is_sorted(indices.begin(), indices.end()) &&
                std::adjacent_find(indices.begin(), indices.end()) == indices.end(),
            ErrorKind::InvalidParameter, "explicit support must be strictly increasing");
  }
}

ScaleEnvelope ScaleEnvelope::from_rate(const RateDescriptor& rate, int J_max) {
  rate.validate();
  require(J_max >= 0, ErrorKind::InvalidParameter, "J_max must be >= 0");
  ScaleEnvelope env;
  env.values.resize(static_cast<std::size_t>(J_max) + 1);
  for (int j = 0; j <= J_max; ++j) env.values[static_cast<std::size_t>(j)] = rate.value(j);
  env.rate = rate;
  return env;
}

ScaleEnvelope scale_envelope(const CoefficientField& field) {
  ScaleEnvelope env;
  env.values.reserve(field.levels.size());
  for (const auto& lvl : field.levels) {
    double m = 0.0;
    for (double v : lvl) m = std::max(m, std::abs(v));
    env.values.push_back(m);
  }
  return env;
}

CriterionKind parse_criterion(const std::string& name) {
  if (name == "linfty") return CriterionKind::Linfty;
  if (name == "c0") return CriterionKind::C0;
  if (name == "l1") return CriterionKind::L1;
  if (name == "sqrtj") return CriterionKind::SqrtJ;
  if (name == "gamma") return CriterionKind::Gamma;
  if (name == "loglog") return CriterionKind::LogLog;
  fail(ErrorKind::InvalidParameter, "unknown criterion '" + name + "'");
}

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::Linfty: return "linfty";
    case CriterionKind::C0: return "c0";
    case CriterionKind::L1: return "l1";
    case CriterionKind::SqrtJ: return "sqrtj";
    case CriterionKind::Gamma: return "gamma";
    case CriterionKind::LogLog: return "loglog";
  }
  return "?";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::UndecidableNumeric: return "undecidable-numeric";
  }
  return "?";
}

double criterion_weight(CriterionKind kind, std::int64_t j, double gamma) {
  const double x = static_cast<double>(std::max<std::int64_t>(j, 0));
  switch (kind) {
    case CriterionKind::Linfty:
    case CriterionKind::C0:
    case CriterionKind::L1: return 1.0;
    case CriterionKind::SqrtJ: return std::sqrt(x);
    case CriterionKind::Gamma: return std::pow(x, 1.0 / gamma);
    case CriterionKind::LogLog: {
      // log log j < 1 below j = 16; the weight is capped at sqrt(j) there
      const double ll = x > 1.0 ? std::log(std::log(x)) : 0.0;
      return std::sqrt(x) / std::max(1.0, ll);
    }
  }
  return 1.0;
}

CriterionDecision check_criterion(const ScaleEnvelope& env, CriterionKind kind, std::optional<double> gamma) {
  if (kind == CriterionKind::Gamma) {
    require(gamma.has_value(), ErrorKind::InvalidParameter, "criterion 'gamma' needs a gamma value");
    require(*gamma > 0.0 && *gamma <= 2.0, ErrorKind::InvalidParameter, "gamma must lie in (0, 2]");
  }
  const double g = gamma.value_or(2.0);

  CriterionDecision out;
  double acc = 0.0;
  for (std::size_t j = 0; j < env.values.size(); ++j) {
    const double w = env.values[j];
    if (kind == CriterionKind::Linfty || kind == CriterionKind::C0) {
      acc = std::max(acc, w);
    } else {
      acc += criterion_weight(kind, static_cast<std::int64_t>(j), g) * w;
    }
    out.partial_sums.push_back(acc);
  }

  if (!env.rate) {
    out.verdict = Verdict::UndecidableNumeric;
    out.rule = "no symbolic rate; partial sums only";
    return out;
  }
  const RateDescriptor& r = *env.rate;
  r.validate();
  auto set = [&](bool holds, std::string rule) {
    out.verdict = holds ? Verdict::Holds : Verdict::Fails;
    out.rule = std::move(rule);
  };

  if (r.K == 0.0) {
    set(true, "identically zero envelope");
    return out;
  }
  if (r.support == RateDescriptor::Support::Explicit) {
    set(true, "finitely many non-zero terms");
    return out;
  }

  if (kind == CriterionKind::Linfty || kind == CriterionKind::C0) {
    // sign of the growth of omega_j as j -> infinity: -1 decays, 0 constant, +1 grows
    int growth = -sgn(r.s);
    if (growth == 0) growth = sgn(r.a);
    if (growth == 0) growth = sgn(r.b);
    if (growth == 0) growth = sgn(r.c);
    if (kind == CriterionKind::Linfty) {
      set(growth <= 0, growth <= 0 ? "omega_j bounded" : "omega_j unbounded");
    } else {
      set(growth < 0, growth < 0 ? "omega_j -> 0" : "omega_j does not tend to 0");
    }
    return out;
  }

  const auto we = weight_exponents(kind, g);
  const double A = r.a + we.power;
  const double B = r.b;
  const double C = r.c - we.loglog;
  if (sgn(r.s) != 0) {
    set(r.s > 0, r.s > 0 ? "geometric decay" : "geometric growth");
    return out;
  }
  const bool geometric = r.support == RateDescriptor::Support::Geometric;
  const bool conv = bertrand_converges(A, B, C, geometric ? 0.0 : -1.0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s series with exponents (%.6g, %.6g, %.6g) %s",
                geometric ? "sparse geometric" : "Bertrand", A, B, C, conv ? "converges" : "diverges");
  set(conv, buf);
  return out;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InsufficientData, "linear fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::InsufficientData, "degenerate abscissae in linear fit");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

HolderFit holder_fit(const ScaleEnvelope& env, int j_lo, int j_hi) {
  if (j_hi < 0) j_hi = env.J_max();
  j_lo = std::max(j_lo, 0);
  j_hi = std::min(j_hi, env.J_max());
  std::vector<int> best, run, all;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double v = env.values[static_cast<std::size_t>(j)];
    if (v > 0.0 && std::isfinite(v)) {
      run.push_back(j);
      all.push_back(j);
      if (run.size() > best.size()) best = run;
    } else {
      run.clear();
    }
  }
  const std::vector<int>& use = best.size() >= 4 ? best : all;
  require(use.size() >= 4, ErrorKind::InsufficientData,
          "holder fit needs at least 4 non-zero envelope values, found " + std::to_string(use.size()));
  std::vector<double> xs, ys;
  for (int j : use) {
    xs.push_back(j);
    ys.push_back(std::log2(env.values[static_cast<std::size_t>(j)]));
  }
  const auto [slope, intercept] = linear_fit(xs, ys);
  return {-slope, std::exp2(intercept), use};
}

StepKind parse_step_kind(const std::string& name) {
  if (name == "heaviside") return StepKind::Heaviside;
  if (name == "sawtooth") return StepKind::Sawtooth;
  fail(ErrorKind::InvalidParameter, "unknown step function '" + name + "'");
}

CoefficientField step_function_coefficients(const MotherWaveletTable& table, StepKind kind, int J_max) {
  require(J_max >= 0 && J_max <= kMaxDenseScale, ErrorKind::InvalidParameter,
          "step-function depth must lie in [0, " + std::to_string(kMaxDenseScale) + "]");
  // Substituting u = 2^j x - k turns every coefficient into a quadrature over
  // the table grid that only sees where the jumps fall, and jumps sit at
  // integer u. Tail sums at integers therefore give the grid quadrature exactly.
  const int S = table.support;
  const std::size_t unit = table.samples_per_unit();
  const double h = table.step();
  std::vector<double> tail(static_cast<std::size_t>(S) + 1, 0.0);  // tail[i] = h sum_{u_m >= i} psi
  double moment1 = 0.0;
  {
    double acc = 0.0;
    for (std::size_t m = static_cast<std::size_t>(S) * unit; m-- > 0;) {
      acc += table.psi[m];
      moment1 += static_cast<double>(m) * h * table.psi[m];
      if (m % unit == 0) tail[m / unit] = acc * h;
    }
    moment1 *= h;
  }
  const double total = tail[0];

  CoefficientField field = CoefficientField::zeros(J_max);
  for (int j = 0; j <= J_max; ++j) {
    const std::int64_t n = std::int64_t{1} << j;
    auto& lvl = field.levels[static_cast<std::size_t>(j)];
    for (std::int64_t k = 0; k < n; ++k) {
      double c = 0.0;
      if (kind == StepKind::Heaviside) {
        const std::int64_t signed_k = (k <= n / 2) ? k : k - n;
        const std::int64_t cut = -signed_k;  // sign(u + k) jumps at u = -k
        if (cut <= 0) c = total;
        else if (cut >= S) c = -total;
        else c = 2.0 * tail[static_cast<std::size_t>(cut)] - total;
      } else {
        // x - 1/2 - floor(x) with x = (u + k) 2^{-j}
        const double scale = std::ldexp(1.0, -j);
        c = scale * (moment1 + static_cast<double>(k) * total) - 0.5 * total;
        for (std::int64_t cut = n - k; cut < S; cut += n) {
          if (cut > 0) c -= tail[static_cast<std::size_t>(cut)];
        }
      }
      lvl[static_cast<std::size_t>(k)] = c;
    }
  }
  return field;
}

void write_field_json(const CoefficientField& field, std::ostream& out) {
  nlohmann::json doc;
  doc["J_max"] = field.J_max;
  doc["coarse"] = field.coarse;
  doc["levels"] = field.levels;
  out << doc.dump() << '\n';
}

CoefficientField read_field_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
    CoefficientField f;
    f.J_max = doc.at("J_max").get<int>();
    f.coarse = doc.at("coarse").get<double>();
    f.levels = doc.at("levels").get<std::vector<std::vector<double>>>();
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidParameter, std::string("malformed field JSON: ") + e.what());
  }
}

void write_envelope_csv(const ScaleEnvelope& env, std::ostream& out) {
  out << "j,omega_j\n";
  char buf[64];
  for (std::size_t j = 0; j < env.values.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.15g\n", j, env.values[j]);
    out << buf;
  }
}

}  // namespace rws
