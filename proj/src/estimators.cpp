#include "rws/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "rws/error.hpp"
#include "rws/parallel.hpp"

namespace rws {

namespace {

constexpr int kAnalysisMargin = 4;
constexpr int kMaxStreamedScale = 30;

}  // namespace

CoefficientField analyze(const SamplePath& path, const MotherWaveletTable& table, int J) {
  path.validate();
  const int R = path.resolution;
  require(J >= 0 && J <= R && J <= kMaxDenseScale, ErrorKind::InvalidParameter,
          "analysis depth J = " + std::to_string(J) + " not supported at R = " + std::to_string(R));
  const std::size_t n = path.values.size();
  const std::size_t mask = n - 1;
  const auto& f = path.values;
  CoefficientField field = CoefficientField::zeros(J);
  double mean = 0.0;
  for (double v : f) mean += v;
  field.coarse = mean / static_cast<double>(n);
  for (int j = 0; j <= J; ++j) {
    const int L = R - j;
    const auto ker = table.psi_at_level(L);
    const double w = std::ldexp(1.0, -L);
    auto& lvl = field.levels[static_cast<std::size_t>(j)];
    parallel_for(
        lvl.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t k = begin; k < end; ++k) {
            const std::size_t base = k << L;
            double acc = 0.0;
            for (std::size_t t = 0; t < ker.size(); ++t) acc += f[(base + t) & mask] * ker[t];
            lvl[k] = w * acc;
          }
        },
        64);
  }
  return field;
}

ScaleEnvelope empirical_scale_envelope(const SamplePath& path, const MotherWaveletTable& table, int J) {
  require(J >= 0 && J <= path.resolution - kAnalysisMargin, ErrorKind::InvalidParameter,
          "envelope depth J = " + std::to_string(J) + " needs R >= J + " + std::to_string(kAnalysisMargin));
  return scale_envelope(analyze(path, table, J));
}

SupGrowthProfile sup_profile(const std::vector<SamplePath>& partials, const std::vector<int>& J_list, int depth) {
  require(partials.size() == J_list.size() && !partials.empty(), ErrorKind::InvalidParameter,
          "one path per truncation expected");
  const int R = partials.front().resolution;
  require(depth >= 0 && depth <= R, ErrorKind::InvalidParameter, "interval depth must lie in [0, R]");
  SupGrowthProfile prof;
  prof.truncations = J_list;
  prof.depth = depth;
  const std::size_t cells = std::size_t{1} << depth;
  const std::size_t per = std::size_t{1} << (R - depth);
  for (const auto& p : partials) {
    std::vector<double> local(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      double m = 0.0;
      for (std::size_t i = c * per; i < (c + 1) * per; ++i) m = std::max(m, std::abs(p.values[i]));
      local[c] = m;
    }
    prof.global_sup.push_back(*std::max_element(local.begin(), local.end()));
    prof.local_sups.push_back(std::move(local));
  }
  return prof;
}

SupGrowthProfile sup_growth(const CoefficientField& field, const MotherWaveletTable& table,
                            const std::optional<RandomLaw>& law, std::uint64_t seed, const std::vector<int>& J_list,
                            int depth, int R) {
  std::vector<SamplePath> partials;
  if (law) {
    partials = synthesize_partials(randomize(field, *law, seed), table, J_list, R);
  } else {
    partials = synthesize_partials(field, table, J_list, R);
  }
  return sup_profile(partials, J_list, depth);
}

namespace {
template <typename Fn>
void for_each_in(const SamplePath& path, const Interval& iv, Fn&& fn) {
  const auto n = static_cast<std::int64_t>(path.values.size());
  const auto first = static_cast<std::int64_t>(std::ceil(iv.lo * static_cast<double>(n)));
  const auto last = static_cast<std::int64_t>(std::ceil(iv.hi * static_cast<double>(n)));
  for (std::int64_t m = first; m < last; ++m) fn(path.values[static_cast<std::size_t>(((m % n) + n) % n)]);
}
}  // namespace

double interval_average(const SamplePath& path, const Interval& iv) {
  double sum = 0.0;
  std::size_t count = 0;
  for_each_in(path, iv, [&](double v) {
    sum += v;
    ++count;
  });
  require(count > 0, ErrorKind::InsufficientData, "interval contains no grid point");
  return sum / static_cast<double>(count);
}

double interval_sup(const SamplePath& path, const Interval& iv) {
  double m = 0.0;
  std::size_t count = 0;
  for_each_in(path, iv, [&](double v) {
    m = std::max(m, std::abs(v));
    ++count;
  });
  require(count > 0, ErrorKind::InsufficientData, "interval contains no grid point");
  return m;
}

double hmin_estimate(const ScaleEnvelope& env, int j_lo, int j_hi) {
  require(j_lo >= 0 && j_hi - j_lo >= 4, ErrorKind::InsufficientData, "hmin needs j_hi - j_lo >= 4");
  require(j_hi <= env.J_max(), ErrorKind::InsufficientData, "hmin range exceeds the envelope");
  std::vector<double> xs, ys;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double v = env.values[static_cast<std::size_t>(j)];
    require(v > 0.0 && std::isfinite(v), ErrorKind::InsufficientData,
            "envelope vanishes at j = " + std::to_string(j) + " inside the hmin range");
    xs.push_back(j);
    ys.push_back(std::log2(v));
  }
  return -linear_fit(xs, ys).first;
}

ScaleEnvelope randomized_power_envelope(double alpha, const RandomLaw& law, std::uint64_t seed, int J) {
  require(J >= 0 && J <= kMaxStreamedScale, ErrorKind::InvalidParameter,
          "streamed envelope depth must lie in [0, " + std::to_string(kMaxStreamedScale) + "]");
  law.validate();
  ScaleEnvelope env;
  for (int j = 0; j <= J; ++j) {
    const std::size_t count = std::size_t{1} << j;
    const std::size_t chunks = std::min<std::size_t>(count, 256);
    std::vector<double> part(chunks, 0.0);
    parallel_for(
        chunks,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t c = begin; c < end; ++c) {
            double m = 0.0;
            for (std::size_t k = c * count / chunks; k < (c + 1) * count / chunks; ++k) {
              m = std::max(m, std::abs(draw(law, seed, {Stream::Coefficient, j, static_cast<std::int64_t>(k)})));
            }
            part[c] = m;
          }
        },
        2);
    env.values.push_back(std::exp2(-alpha * j) * *std::max_element(part.begin(), part.end()));
  }
  return env;
}

double ModulusSpec::operator()(double h) const {
  double v = std::pow(h, alpha);
  if (gamma > 0.0) v *= std::pow(std::abs(std::log(h)), 1.0 / gamma);
  return v;
}

double ModulusFit::spread() const {
  require(!ratios.empty(), ErrorKind::InsufficientData, "empty modulus fit");
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

bool ModulusFit::strictly_increasing() const {
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (!(ratios[i] > ratios[i - 1])) return false;
  return true;
}

ModulusFit modulus_ratio(const SamplePath& path, const ModulusSpec& theta, int m_lo, int m_hi) {
  path.validate();
  const int R = path.resolution;
  require(m_lo >= 2 && m_lo < m_hi && m_hi <= R - 1, ErrorKind::InvalidParameter,
          "lag range must satisfy 2 <= m_lo < m_hi <= R - 1");
  const std::size_t n = path.values.size();
  const auto& f = path.values;
  ModulusFit fit;
  for (int m = m_lo; m <= m_hi; ++m) {
    const std::size_t shift = std::size_t{1} << (R - m);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, std::abs(f[(i + shift) & (n - 1)] - f[i]));
    const double h = std::ldexp(1.0, -m);
    fit.m.push_back(m);
    fit.lags.push_back(h);
    fit.sup_increments.push_back(sup);
    fit.theta_values.push_back(theta(h));
    fit.ratios.push_back(sup / theta(h));
  }
  return fit;
}

RegularModulusResult regular_modulus_check(const PowerLogModulus& theta, int N, int J) {
  require(std::isfinite(theta.alpha) && std::isfinite(theta.kappa), ErrorKind::UnsupportedFamily,
          "modulus parameters must be finite");
  require(theta.alpha >= 0.0, ErrorKind::UnsupportedFamily, "power-log modulus needs alpha >= 0");
  require(N >= 0 && J >= 1, ErrorKind::InvalidParameter, "need N >= 0 and J >= 1");
  RegularModulusResult out;
  auto first = [&](int n) { return theta.alpha > n; };
  auto second = [&](int n) { return theta.alpha < n + 1; };
  int chosen = -1;
  for (int n = 0; n <= N; ++n) {
    if (first(n) && second(n)) {
      chosen = n;
      break;
    }
  }
  out.regular = chosen >= 0;
  out.witness = chosen;
  if (chosen < 0) chosen = std::clamp(static_cast<int>(std::floor(theta.alpha)), 0, N);
  out.first_holds = first(chosen);
  out.second_holds = second(chosen);

  // truncated sums relative to the term at J, term ratio 2^{e (j - J)} (|j| / J)^kappa
  auto term = [&](double e, int j) {
    if (theta.kappa != 0.0 && j == 0) return 0.0;
    return std::exp2(e * (j - J)) * std::pow(std::abs(static_cast<double>(j)) / J, theta.kappa);
  };
  const double e1 = chosen - theta.alpha;
  const double e2 = chosen + 1 - theta.alpha;
  constexpr int kTerms = 4000;
  for (int j = J; j <= J + kTerms; ++j) out.first_ratio += term(e1, j);
  for (int j = J - kTerms; j <= J; ++j) out.second_ratio += term(e2, j);
  return out;
}

void write_profile_csv(const SupGrowthProfile& profile, std::ostream& out, const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "J,global_sup,interval_id,local_sup\n";
  char buf[96];
  for (std::size_t i = 0; i < profile.truncations.size(); ++i) {
    for (std::size_t l = 0; l < profile.local_sups[i].size(); ++l) {
      std::snprintf(buf, sizeof buf, "%d,%.12g,%zu,%.12g\n", profile.truncations[i], profile.global_sup[i], l,
                    profile.local_sups[i][l]);
      out << buf;
    }
  }
}

void write_modulus_csv(const ModulusFit& fit, std::ostream& out, const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "m,h,sup_increment,theta,ratio\n";
  char buf[128];
  for (std::size_t i = 0; i < fit.m.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g\n", fit.m[i], fit.lags[i], fit.sup_increments[i],
                  fit.theta_values[i], fit.ratios[i]);
    out << buf;
  }
}

}  // namespace rws
