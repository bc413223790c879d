#include "rws/random_laws.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "rws/error.hpp"
#include "rws/parallel.hpp"

namespace rws {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  require(!text.empty() && end == text.c_str() + text.size() && std::isfinite(v), ErrorKind::InvalidParameter,
          "bad " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

RandomLaw RandomLaw::parse(const std::string& text) {
  const auto parts = split(text, ':');
  require(!parts.empty(), ErrorKind::InvalidParameter, "empty law string");
  const std::string& tag = parts[0];
  auto expect = [&](std::size_t n) {
    require(parts.size() == n, ErrorKind::InvalidParameter,
            "law '" + tag + "' expects " + std::to_string(n - 1) + " parameter(s): '" + text + "'");
  };
  RandomLaw law;
  if (tag == "rademacher") {
    expect(1);
    law.kind = LawKind::Rademacher;
  } else if (tag == "gaussian") {
    expect(1);
    law.kind = LawKind::Gaussian;
  } else if (tag == "bernoulli") {
    expect(2);
    law.kind = LawKind::Bernoulli;
    law.p = parse_number(parts[1], "bernoulli p");
  } else if (tag == "exp_tail") {
    expect(3);
    law.kind = LawKind::ExpTail;
    law.b = parse_number(parts[1], "exp_tail b");
    law.gamma = parse_number(parts[2], "exp_tail gamma");
  } else if (tag == "heavy_tail") {
    expect(2);
    law.kind = LawKind::HeavyTail;
    law.l = parse_number(parts[1], "heavy_tail l");
  } else if (tag == "bounded_uniform") {
    expect(2);
    law.kind = LawKind::BoundedUniform;
    law.M = parse_number(parts[1], "bounded_uniform M");
  } else {
    fail(ErrorKind::InvalidParameter, "unknown law '" + tag + "'");
  }
  law.validate();
  return law;
}

std::string RandomLaw::to_string() const {
  switch (kind) {
    case LawKind::Rademacher: return "rademacher";
    case LawKind::Gaussian: return "gaussian";
    case LawKind::Bernoulli: return "bernoulli:" + fmt(p);
    case LawKind::ExpTail: return "exp_tail:" + fmt(b) + ":" + fmt(gamma);
    case LawKind::HeavyTail: return "heavy_tail:" + fmt(l);
    case LawKind::BoundedUniform: return "bounded_uniform:" + fmt(M);
  }
  return "?";
}

void RandomLaw::validate() const {
  switch (kind) {
    case LawKind::Bernoulli:
      require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter, "bernoulli p must lie in (0, 1)");
      break;
    case LawKind::ExpTail:
      require(b > 0.0, ErrorKind::InvalidParameter, "exp_tail b must be > 0");
      require(gamma > 0.0 && gamma <= 2.0, ErrorKind::InvalidParameter, "exp_tail gamma must lie in (0, 2]");
      break;
    case LawKind::HeavyTail:
      require(l > 0.0, ErrorKind::InvalidParameter, "heavy_tail l must be > 0");
      break;
    case LawKind::BoundedUniform:
      require(M > 0.0, ErrorKind::InvalidParameter, "bounded_uniform M must be > 0");
      break;
    default: break;
  }
}

bool RandomLaw::bounded() const {
  return kind == LawKind::Rademacher || kind == LawKind::Bernoulli || kind == LawKind::BoundedUniform;
}

double RandomLaw::bound() const {
  switch (kind) {
    case LawKind::Rademacher:
    case LawKind::Bernoulli: return 1.0;
    case LawKind::BoundedUniform: return M;
    default: return std::numeric_limits<double>::infinity();
  }
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

std::array<std::uint64_t, 2> random_bits(std::uint64_t seed, const DrawIndex& index) {
  const auto k = static_cast<std::uint64_t>(index.k);
  const auto r = philox4x32({static_cast<std::uint32_t>(index.stream), static_cast<std::uint32_t>(index.j),
                             static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)},
                            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return {(std::uint64_t{r[0]} << 32) | r[1], (std::uint64_t{r[2]} << 32) | r[3]};
}

double bits_to_open_unit(std::uint64_t bits) {
  // the top word would round up to exactly 1
  return std::min((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53, 1.0 - 0x1.0p-53);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter, "normal quantile needs p in (0, 1)");
  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                 1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
                                 2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                 3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                 2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7, 2.04426310338993978564e-15};
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    val = poly(e, r) / poly(f, r);
  }
  return q < 0.0 ? -val : val;
}

double draw(const RandomLaw& law, std::uint64_t seed, const DrawIndex& index) {
  const auto bits = random_bits(seed, index);
  const double u = bits_to_open_unit(bits[0]);
  const double sign = (bits[1] >> 63) ? -1.0 : 1.0;
  switch (law.kind) {
    case LawKind::Rademacher: return sign;
    case LawKind::Gaussian: return normal_quantile(u);
    case LawKind::Bernoulli: return u < law.p ? 1.0 : 0.0;
    case LawKind::ExpTail: return sign * std::pow(-std::log(u) / law.b, 1.0 / law.gamma);
    case LawKind::HeavyTail: return sign * std::pow(u, -1.0 / law.l);
    case LawKind::BoundedUniform: return law.M * (2.0 * u - 1.0);
  }
  return 0.0;
}

double tail_probability(const RandomLaw& law, double x) {
  require(x >= 0.0 && !std::isnan(x), ErrorKind::InvalidParameter, "tail probability needs x >= 0");
  switch (law.kind) {
    case LawKind::Rademacher: return x <= 1.0 ? 1.0 : 0.0;
    case LawKind::Gaussian: return std::erfc(x / std::sqrt(2.0));
    case LawKind::Bernoulli: return x == 0.0 ? 1.0 : (x <= 1.0 ? law.p : 0.0);
    case LawKind::ExpTail: return std::exp(-law.b * std::pow(x, law.gamma));
    case LawKind::HeavyTail: return x <= 1.0 ? 1.0 : std::pow(x, -law.l);
    case LawKind::BoundedUniform: return std::max(0.0, 1.0 - x / law.M);
  }
  return 0.0;
}

double log_tail_probability(const RandomLaw& law, double x) {
  require(x >= 0.0 && !std::isnan(x), ErrorKind::InvalidParameter, "tail probability needs x >= 0");
  switch (law.kind) {
    case LawKind::Gaussian: {
      if (x < 30.0) return std::log(std::erfc(x / std::sqrt(2.0)));
      const double z = x / std::sqrt(2.0);
      const double z2 = z * z;
      const double series = 1.0 - 1.0 / (2.0 * z2) + 3.0 / (4.0 * z2 * z2) - 15.0 / (8.0 * z2 * z2 * z2);
      return -z2 - std::log(z * std::sqrt(M_PI)) + std::log(series);
    }
    case LawKind::ExpTail: return -law.b * std::pow(x, law.gamma);
    case LawKind::HeavyTail: return x <= 1.0 ? 0.0 : -law.l * std::log(x);
    default: {
      const double p = tail_probability(law, x);
      return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  }
}

double mean_abs(const RandomLaw& law) {
  switch (law.kind) {
    case LawKind::Rademacher: return 1.0;
    case LawKind::Gaussian: return std::sqrt(2.0 / M_PI);
    case LawKind::Bernoulli: return law.p;
    case LawKind::ExpTail: return std::pow(law.b, -1.0 / law.gamma) * std::tgamma(1.0 + 1.0 / law.gamma);
    case LawKind::HeavyTail:
      return law.l > 1.0 ? law.l / (law.l - 1.0) : std::numeric_limits<double>::infinity();
    case LawKind::BoundedUniform: return 0.5 * law.M;
  }
  return 0.0;
}

std::vector<int> divergence_sequence(const RandomLaw& law, DivergenceVariant variant, int n_max) {
  law.validate();
  require(n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
  if (law.bounded()) {
    fail(ErrorKind::NoDivergenceSequence, "law '" + law.to_string() + "' is bounded: P(|chi| >= n^3) vanishes");
  }
  constexpr double kLimit = 1e9;
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    const double x = std::pow(static_cast<double>(n), 3);
    const double log2p = log_tail_probability(law, x) / std::log(2.0);
    require(std::isfinite(log2p), ErrorKind::NoDivergenceSequence, "zero tail probability at n = " + std::to_string(n));
    require(-log2p < kLimit, ErrorKind::NumericalFailure, "divergence scale overflows at n = " + std::to_string(n));
    double j;
    if (variant == DivergenceVariant::Plain) {
      j = std::max(0.0, std::ceil(-log2p - 1e-9));
    } else {
      // minimal j >= 1 with log2(j) - j <= log2 P
      j = std::max(1.0, std::floor(-log2p) - 1.0);
      while (std::log2(j) - j > log2p + 1e-12) j += 1.0;
      while (j > 1.0 && std::log2(j - 1.0) - (j - 1.0) <= log2p + 1e-12) j -= 1.0;
    }
    int jn = static_cast<int>(j);
    if (!seq.empty()) jn = std::max(jn, seq.back() + 1);
    seq.push_back(jn);
  }
  return seq;
}

std::vector<GaussianMaxRow> gaussian_max_check(int j_lo, int j_hi, int trials, std::uint64_t seed) {
  require(j_lo >= 10 && j_hi <= 24 && j_lo <= j_hi, ErrorKind::InvalidParameter, "j range must lie within [10, 24]");
  require(trials >= 20, ErrorKind::InvalidParameter, "gaussian_max_check needs >= 20 trials");
  const RandomLaw gauss{};
  std::vector<GaussianMaxRow> rows;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double threshold = std::sqrt(2.0 * j);
    const std::int64_t count = std::int64_t{1} << j;
    std::vector<char> hit(static_cast<std::size_t>(trials), 0);
    parallel_for(
        static_cast<std::size_t>(trials),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t t = begin; t < end; ++t) {
            const std::int64_t base = static_cast<std::int64_t>(t) << 32;
            for (std::int64_t k = 0; k < count; ++k) {
              if (std::abs(draw(gauss, seed, {Stream::Trial, j, base | k})) > threshold) {
                hit[t] = 1;
                break;
              }
            }
          }
        },
        1);
    GaussianMaxRow row;
    row.j = j;
    row.trials = trials;
    for (char h : hit) row.exceedances += h;
    row.rate = static_cast<double>(row.exceedances) / trials;
    row.union_bound = std::exp(j * (std::log(2.0) - 1.0));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rws
