#include "rws/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>

#include "rws/error.hpp"

namespace rws {

namespace {
#include "daubechies_taps.inc"

constexpr int kMaxVanishingMoments = 20;
// Positivity/negativity intervals are searched among dyadic intervals down to
// this width exponent.
constexpr int kIntervalGranularity = 6;

struct IntervalPick {
  Interval interval;
  double bound = 0.0;
};

// Widest dyadic interval attaining the best floor (sign = +1) or best ceiling
// (sign = -1); leftmost on ties.
IntervalPick pick_interval(const std::vector<double>& psi, int refinement, int support, double sign) {
  const int fine = std::min(kIntervalGranularity, refinement);
  const std::size_t per_cell = std::size_t{1} << (refinement - fine);
  const std::size_t cells = static_cast<std::size_t>(support) << fine;
  // floor of sign*psi per finest cell
  std::vector<double> level(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < per_cell; ++i) lo = std::min(lo, sign * psi[c * per_cell + i]);
    level[c] = lo;
  }
  std::vector<std::vector<double>> floors{level};
  while (floors.back().size() % 2 == 0 && floors.size() <= static_cast<std::size_t>(fine)) {
    const auto& prev = floors.back();
    std::vector<double> next(prev.size() / 2);
    for (std::size_t c = 0; c < next.size(); ++c) next[c] = std::min(prev[2 * c], prev[2 * c + 1]);
    floors.push_back(std::move(next));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& lvl : floors)
    for (double v : lvl) best = std::max(best, v);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  // widest first: floors.back() holds the coarsest intervals
  for (auto it = floors.rbegin(); it != floors.rend(); ++it) {
    const double width = static_cast<double>(support) / static_cast<double>(it->size());
    for (std::size_t c = 0; c < it->size(); ++c) {
      if ((*it)[c] >= best - tol) {
        return {Interval{width * static_cast<double>(c), width * static_cast<double>(c + 1)}, sign * (*it)[c]};
      }
    }
  }
  return {};
}

// One cascade step: iterate r (grid 2^{-r}) -> iterate r + 1.
std::vector<double> refine_phi(const std::vector<double>& prev, const std::vector<double>& taps, int support, int r) {
  const double root2 = std::sqrt(2.0);
  const std::size_t stride = std::size_t{1} << r;
  const std::size_t size = (static_cast<std::size_t>(support) << (r + 1)) + 1;
  std::vector<double> next(size, 0.0);
  for (std::size_t m = 0; m < size; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const std::size_t shift = k * stride;
      if (shift > m) break;
      const std::size_t idx = m - shift;
      if (idx < prev.size()) acc += taps[k] * prev[idx];
    }
    next[m] = root2 * acc;
  }
  return next;
}

// psi iterate L from phi iterate L - 1.
std::vector<double> psi_from_phi(const std::vector<double>& coarse_phi, const std::vector<double>& g, int support,
                                 int L) {
  const double root2 = std::sqrt(2.0);
  const std::size_t size = (static_cast<std::size_t>(support) << L) + 1;
  const std::size_t stride = std::size_t{1} << (L - 1);
  std::vector<double> out(size, 0.0);
  for (std::size_t m = 0; m < size; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const std::size_t shift = k * stride;
      if (shift > m) break;
      const std::size_t idx = m - shift;
      if (idx < coarse_phi.size()) acc += g[k] * coarse_phi[idx];
    }
    out[m] = root2 * acc;
  }
  return out;
}

}  // namespace

struct MotherWaveletTable::DeepLevels {
  std::mutex mutex;
  std::vector<std::vector<double>> phi;  // phi[i]: iterate refinement + i
  std::map<int, std::shared_ptr<const std::vector<double>>> psi;
};

WaveletFamily parse_family(const std::string& name) {
  if (name == "haar") return WaveletFamily::Haar;
  if (name == "daubechies" || name == "db") return WaveletFamily::Daubechies;
  fail(ErrorKind::InvalidParameter, "unknown wavelet family '" + name + "'");
}

std::string to_string(WaveletFamily family) {
  return family == WaveletFamily::Haar ? "haar" : "daubechies";
}

std::vector<double> ScalingFilter::highpass() const {
  const std::size_t n = taps.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (i % 2 == 0 ? 1.0 : -1.0) * taps[n - 1 - i];
  return g;
}

ScalingFilter build_filter(WaveletFamily family, int vanishing_moments) {
  if (family == WaveletFamily::Haar) {
    require(vanishing_moments == 1, ErrorKind::InvalidParameter, "haar has exactly one vanishing moment");
  }
  require(vanishing_moments >= 1 && vanishing_moments <= kMaxVanishingMoments, ErrorKind::InvalidParameter,
          "Daubechies order must lie in [1, 20], got " + std::to_string(vanishing_moments));
  const double* taps = kDaubechiesTable[vanishing_moments];
  ScalingFilter f;
  f.vanishing_moments = vanishing_moments;
  f.taps.assign(taps, taps + 2 * vanishing_moments);
  return f;
}

MotherWaveletTable cascade_evaluate(const ScalingFilter& filter, int refinement) {
  require(refinement >= 4 && refinement <= 24, ErrorKind::InvalidParameter,
          "cascade refinement must lie in [4, 24]");
  require(filter.taps.size() >= 2 && filter.taps.size() % 2 == 0, ErrorKind::InvalidParameter,
          "scaling filter needs an even number (>= 2) of taps");
  const double sum = std::accumulate(filter.taps.begin(), filter.taps.end(), 0.0);
  require(std::abs(sum - std::sqrt(2.0)) < 1e-10, ErrorKind::InvalidParameter, "scaling filter taps must sum to sqrt(2)");

  const int support = static_cast<int>(filter.taps.size()) - 1;
  const auto g = filter.highpass();

  MotherWaveletTable table;
  table.filter = filter;
  table.refinement = refinement;
  table.support = support;

  // Level r holds the box-started iterate on the grid m 2^{-r}, m = 0..support*2^r.
  std::vector<double> prev(static_cast<std::size_t>(support) + 1, 0.0);
  prev[0] = 1.0;
  std::vector<double> parent;  // iterate refinement - 1
  for (int r = 0; r < refinement; ++r) {
    auto next = refine_phi(prev, filter.taps, support, r);
    const std::size_t size = next.size();
    // compare against the piecewise-constant extension of the coarser level so
    // that oscillation at the new odd points is seen too
    double diff = 0.0;
    for (std::size_t m = 0; m < size; ++m) {
      const std::size_t parent = m / 2;
      const double coarse = parent < prev.size() ? prev[parent] : 0.0;
      diff = std::max(diff, std::abs(next[m] - coarse));
    }
    table.refinement_diffs.push_back(diff);
    parent = std::move(prev);
    prev = std::move(next);
  }
  table.phi = std::move(prev);
  table.deep = std::make_shared<MotherWaveletTable::DeepLevels>();

  // psi iterate from the parent phi iterate; deeper iterates come from the
  // same recursion in deep_psi
  table.psi = psi_from_phi(parent, g, support, refinement);

  const auto& d = table.refinement_diffs;
  const std::size_t n = d.size();
  if (n >= 3) {
    const double scale = std::max(1.0, *std::max_element(table.psi.begin(), table.psi.end()));
    const bool negligible = d[n - 1] <= 1e-12 * scale;
    if (!negligible && !(d[n - 1] < d[n - 3])) {
      fail(ErrorKind::NumericalFailure, "cascade refinement does not converge (sup-difference " +
                                            std::to_string(d[n - 3]) + " -> " + std::to_string(d[n - 1]) + ")");
    }
  }
  for (double v : table.psi) {
    require(std::isfinite(v), ErrorKind::NumericalFailure, "cascade produced non-finite values");
    table.sup_norm = std::max(table.sup_norm, std::abs(v));
  }

  auto pos = pick_interval(table.psi, refinement, support, 1.0);
  auto neg = pick_interval(table.psi, refinement, support, -1.0);
  table.positivity = pos.interval;
  table.positivity_floor = pos.bound;
  table.negativity = neg.interval;
  table.negativity_ceiling = neg.bound;
  return table;
}

double MotherWaveletTable::psi_at(double u) const {
  if (!(u >= 0.0) || u >= static_cast<double>(support)) return 0.0;
  const auto idx = static_cast<std::size_t>(std::floor(std::ldexp(u, refinement)));
  return idx < psi.size() ? psi[idx] : 0.0;
}

double MotherWaveletTable::phi_at(double u) const {
  if (!(u >= 0.0) || u >= static_cast<double>(support)) return 0.0;
  const auto idx = static_cast<std::size_t>(std::floor(std::ldexp(u, refinement)));
  return idx < phi.size() ? phi[idx] : 0.0;
}

double MotherWaveletTable::translate_abs_sum() const {
  const std::size_t unit = samples_per_unit();
  double best = 0.0;
  for (std::size_t m = 0; m < unit; ++m) {
    double acc = 0.0;
    for (int t = 0; t < support; ++t) acc += std::abs(psi[m + static_cast<std::size_t>(t) * unit]);
    best = std::max(best, acc);
  }
  return best;
}

std::vector<double> MotherWaveletTable::psi_at_level(int level) const {
  require(level >= 0, ErrorKind::InvalidParameter, "negative sampling level");
  const std::size_t count = static_cast<std::size_t>(support) << level;
  std::vector<double> out(count);
  if (level <= refinement) {
    for (std::size_t n = 0; n < count; ++n) out[n] = psi[n << (refinement - level)];
  } else {
    const int computed = std::min(level, std::max(refinement, kMaxCascadeLevel));
    const auto iterate = deep_psi(computed);
    const int shift = level - computed;
    for (std::size_t n = 0; n < count; ++n) out[n] = (*iterate)[n >> shift];
  }
  return out;
}

std::shared_ptr<const std::vector<double>> MotherWaveletTable::deep_psi(int level) const {
  if (level == refinement || !deep) return std::make_shared<const std::vector<double>>(psi);
  std::lock_guard<std::mutex> lock(deep->mutex);
  if (auto it = deep->psi.find(level); it != deep->psi.end()) return it->second;
  auto& chain = deep->phi;
  if (chain.empty()) chain.push_back(phi);
  while (refinement + static_cast<int>(chain.size()) - 1 < level - 1) {
    chain.push_back(refine_phi(chain.back(), filter.taps, support, refinement + static_cast<int>(chain.size()) - 1));
  }
  const auto& parent = chain[static_cast<std::size_t>(level - 1 - refinement)];
  auto out = std::make_shared<const std::vector<double>>(psi_from_phi(parent, filter.highpass(), support, level));
  deep->psi.emplace(level, out);
  return out;
}

double eval_periodized(const MotherWaveletTable& table, int j, std::int64_t k, double x) {
  const double scale = std::ldexp(1.0, j);
  const double base = scale * x - static_cast<double>(k);
  // u = base - l*scale must land in [0, support)
  const auto l_lo = static_cast<std::int64_t>(std::floor((base - table.support) / scale));
  const auto l_hi = static_cast<std::int64_t>(std::ceil(base / scale));
  double acc = 0.0;
  for (std::int64_t l = l_lo; l <= l_hi; ++l) acc += table.psi_at(base - static_cast<double>(l) * scale);
  return acc;
}

void write_table_csv(const MotherWaveletTable& table, std::ostream& out) {
  out << "grid_x,phi,psi\n";
  char buf[128];
  const double h = table.step();
  for (std::size_t m = 0; m < table.psi.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g\n", static_cast<double>(m) * h, table.phi[m], table.psi[m]);
    out << buf;
  }
}

}  // namespace rws
