#include "rws/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <set>

#include "rws/error.hpp"

namespace rws {

namespace {

constexpr int kMaxPlacementScale = 46;

double envelope_value(const ScaleEnvelope& env, int j) {
  if (env.rate) return env.rate->value(j);
  return (j >= 0 && j <= env.J_max()) ? env.values[static_cast<std::size_t>(j)] : 0.0;
}

void require_divergent(const ScaleEnvelope& env, const char* who) {
  require(env.rate.has_value(), ErrorKind::InvalidPrecondition, std::string(who) + " needs a symbolic rate");
  const auto d = check_criterion(env, CriterionKind::L1);
  require(d.verdict == Verdict::Fails, ErrorKind::InvalidPrecondition,
          std::string(who) + " needs a divergent envelope sum (" + d.rule + ")");
}

// Leftmost k >= 0 such that the image of `mother` lies in `target` and, when
// `container` is given, the support of psi_{j,k} lies in it; skips `taken`.
std::optional<std::int64_t> place(const MotherWaveletTable& table, const Interval& mother, int j,
                                  const Interval& target, const std::optional<Interval>& container,
                                  const std::set<std::int64_t>* taken = nullptr) {
  const double scale = std::ldexp(1.0, j);
  double lo = std::ceil(target.lo * scale - mother.lo);
  double hi = std::floor(target.hi * scale - mother.hi);
  if (container) {
    lo = std::max(lo, std::ceil(container->lo * scale));
    hi = std::min(hi, std::floor(container->hi * scale - table.support));
  }
  lo = std::max(lo, 0.0);
  for (double k = lo; k <= hi; k += 1.0) {
    const auto ki = static_cast<std::int64_t>(k);
    if (!taken || !taken->count(ki)) return ki;
  }
  return std::nullopt;
}

void check_scales(const std::vector<int>& scales) {
  require(!scales.empty(), ErrorKind::InvalidParameter, "placement needs at least one scale");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    require(scales[i] >= 0 && scales[i] <= kMaxPlacementScale, ErrorKind::InvalidParameter,
            "placement scales must lie in [0, " + std::to_string(kMaxPlacementScale) + "]");
    if (i > 0) require(scales[i] > scales[i - 1], ErrorKind::InvalidParameter, "placement scales must increase");
  }
}

const Interval kFirstWindow{0.125, 0.375};

}  // namespace

std::vector<int> lemma_subsequence(const ScaleEnvelope& env, int j_limit) {
  require_divergent(env, "lemma_subsequence");
  const RateDescriptor& rate = *env.rate;
  if (j_limit < 0) j_limit = env.J_max();
  std::vector<int> out;
  int start = std::max(rate.j_min, 0);
  for (int gap = 2; start <= j_limit; ++gap) {
    // among the `gap` residues, the one whose running sum reaches 1 first
    int best_r = -1;
    std::size_t best_terms = std::numeric_limits<std::size_t>::max();
    double best_partial = -1.0;
    for (int r = 0; r < gap; ++r) {
      double sum = 0.0;
      std::size_t terms = 0;
      bool reached = false;
      for (std::int64_t j = start + r; j <= j_limit; j += gap) {
        sum += rate.value(j);
        ++terms;
        if (sum >= 1.0) {
          reached = true;
          break;
        }
      }
      const std::size_t cost = reached ? terms : std::numeric_limits<std::size_t>::max();
      if (cost < best_terms || (cost == best_terms && !reached && sum > best_partial)) {
        best_terms = cost;
        best_r = r;
        best_partial = sum;
      }
    }
    double sum = 0.0;
    int last = -1;
    for (std::int64_t j = start + best_r; j <= j_limit; j += gap) {
      out.push_back(static_cast<int>(j));
      last = static_cast<int>(j);
      sum += rate.value(j);
      if (sum >= 1.0) break;
    }
    if (sum < 1.0 || last < 0) break;  // ran out of scales
    start = last + gap + 1;
  }
  return out;
}

Interval scaled_interval(const Interval& mother, int j, std::int64_t k) {
  const double inv = std::ldexp(1.0, -j);
  return {(static_cast<double>(k) + mother.lo) * inv, (static_cast<double>(k) + mother.hi) * inv};
}

Interval half_of(const Interval& iv) {
  const double quarter = 0.25 * iv.width();
  return {iv.center() - quarter, iv.center() + quarter};
}

Interval support_interval(const MotherWaveletTable& table, int j, std::int64_t k) {
  return scaled_interval(Interval{0.0, static_cast<double>(table.support)}, j, k);
}

NestedPlacement nested_placement(const MotherWaveletTable& table, const std::vector<int>& scales) {
  check_scales(scales);
  require(table.positivity_floor > 0.0, ErrorKind::InvalidPrecondition, "table has no positivity interval");
  NestedPlacement out;
  for (std::size_t n = 0; n < scales.size(); ++n) {
    const int j = scales[n];
    std::optional<std::int64_t> k;
    if (n == 0) {
      k = place(table, table.positivity, j, kFirstWindow, std::nullopt);
    } else {
      k = place(table, table.positivity, j, half_of(out.intervals.back()), out.intervals.back());
    }
    if (!k) {
      fail(ErrorKind::PlacementInfeasible, "no admissible position at n = " + std::to_string(n + 1) +
                                               " (scale " + std::to_string(j) + ")");
    }
    out.scales.push_back(j);
    out.positions.push_back(*k);
    out.intervals.push_back(scaled_interval(table.positivity, j, *k));
  }
  return out;
}

std::vector<int> feasible_subsequence(const MotherWaveletTable& table, const std::vector<int>& candidates) {
  std::vector<int> kept;
  std::optional<Interval> prev;
  for (int j : candidates) {
    if (j < 0 || j > kMaxPlacementScale) continue;
    if (!kept.empty() && j <= kept.back()) continue;
    std::optional<std::int64_t> k;
    if (!prev) k = place(table, table.positivity, j, kFirstWindow, std::nullopt);
    else k = place(table, table.positivity, j, half_of(*prev), *prev);
    if (!k) continue;
    kept.push_back(j);
    prev = scaled_interval(table.positivity, j, *k);
  }
  return kept;
}

CoefficientField unbounded_series_field(const ScaleEnvelope& env, const NestedPlacement& placement, int J_max,
                                        UnboundedOptions options) {
  if (env.rate) {
    const auto d = check_criterion(env, CriterionKind::Linfty);
    require(d.verdict == Verdict::Holds, ErrorKind::InvalidPrecondition, "envelope must be bounded");
  }
  CoefficientField field = CoefficientField::zeros(J_max);
  for (int j = 0; j <= J_max; ++j) {
    const double w = envelope_value(env, j);
    require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidPrecondition, "envelope values must be finite and >= 0");
    if (w == 0.0) continue;
    const auto it = std::find(placement.scales.begin(), placement.scales.end(), j);
    std::int64_t k;
    if (it != placement.scales.end()) {
      k = placement.positions[static_cast<std::size_t>(it - placement.scales.begin())];
    } else {
      k = static_cast<std::int64_t>(std::floor(0.75 * std::ldexp(1.0, j)));
    }
    field.set(j, wrap_index(j, k), w);
  }
  if (options.everywhere) {
    const std::size_t L = placement.scales.size();
    for (std::size_t l = 1; l <= L; ++l) {
      const int jl = placement.scales[l - 1];
      const std::int64_t kl = placement.positions[l - 1];
      const int level = static_cast<int>(l);
      if (jl < level) continue;
      const std::int64_t copies = std::int64_t{1} << level;
      for (std::int64_t kp = 0; kp < copies; ++kp) {
        if (level > 1 && kp % 2 == 0) continue;  // coarser dyadic points are covered already
        for (std::size_t n = l; n <= L; ++n) {
          const int jn = placement.scales[n - 1];
          if (jn > J_max) break;
          const std::int64_t shift = (kp << (jn - level)) - (kl << (jn - jl));
          // same value as the original, so overlapping copies keep the envelope
          field.set(jn, wrap_index(jn, placement.positions[n - 1] + shift), envelope_value(env, jn));
        }
      }
    }
  }
  return field;
}

std::vector<int> contreex_scales(const RandomLaw& law, int J_max, std::optional<int> n_max) {
  require(J_max >= 0 && J_max <= kMaxDenseScale, ErrorKind::InvalidParameter, "J_max out of range");
  const int terms = std::min(n_max.value_or(J_max + 1), J_max + 1);
  require(terms >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
  auto seq = divergence_sequence(law, DivergenceVariant::Plain, terms);
  std::vector<int> out;
  for (int j : seq)
    if (j <= J_max) out.push_back(j);
  return out;
}

CoefficientField contreex_field(const RandomLaw& law, int J_max, std::optional<int> n_max) {
  const auto scales = contreex_scales(law, J_max, n_max);
  CoefficientField field = CoefficientField::zeros(J_max);
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    auto& lvl = field.levels[static_cast<std::size_t>(scales[i])];
    std::fill(lvl.begin(), lvl.end(), 1.0 / (n * n));
  }
  return field;
}

PrevalenceRecord prevalence_process(const CoefficientField* f, const RandomLaw& law, std::uint64_t seed,
                                    PrevalenceOptions options) {
  require(options.n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
  require(options.j_cap >= 1 && options.j_cap <= 30, ErrorKind::InvalidParameter, "j_cap must lie in [1, 30]");
  const auto seq = divergence_sequence(law, DivergenceVariant::Strengthened, options.n_max);
  const RandomLaw signs = RandomLaw::parse("rademacher");
  PrevalenceRecord rec;
  rec.law = law.to_string();
  rec.seed = seed;
  bool stop = false;
  for (int n = 1; n <= options.n_max; ++n) {
    PrevalenceScale sc;
    sc.n = n;
    sc.j = seq[static_cast<std::size_t>(n - 1)];
    if (stop || sc.j > options.j_cap) {
      sc.complete = false;
      rec.scales.push_back(sc);
      continue;
    }
    const double nn = static_cast<double>(n);
    const double inv = 1.0 / (nn * nn);
    const double cube = nn * nn * nn;
    const std::int64_t len = 2 * static_cast<std::int64_t>(sc.j);
    sc.blocks = (std::int64_t{1} << sc.j) / len;
    const bool has_level = f && sc.j <= f->J_max;
    for (std::int64_t l = 0; l < sc.blocks && !stop; ++l) {
      for (std::int64_t k = l * len; k < (l + 1) * len; ++k) {
        const double eps = draw(signs, seed, {Stream::Sign, sc.j, k});
        const double c = has_level ? f->at(sc.j, k) : 0.0;
        const double v = eps * inv + c;
        if (std::abs(v) < inv * (1.0 - 1e-12)) continue;
        ++sc.witnesses;
        const double chi = draw(law, seed, {Stream::Coefficient, sc.j, k});
        if (std::abs(chi) >= cube) ++sc.chi_exceedances;
        if (std::abs(v * chi) >= nn) {
          ++sc.exceedances;
          if (options.stop_at_first) {
            stop = true;
            sc.complete = (l + 1 == sc.blocks);
          }
        }
        break;
      }
    }
    if (sc.exceedances > 0) ++rec.scales_with_exceedance;
    rec.scales.push_back(sc);
  }
  rec.stopped_early = stop;
  return rec;
}

std::string prevalence_json(const PrevalenceRecord& record) {
  nlohmann::json doc;
  doc["law"] = record.law;
  doc["seed"] = record.seed;
  doc["scales_with_exceedance"] = record.scales_with_exceedance;
  doc["stopped_early"] = record.stopped_early;
  auto& arr = doc["scales"] = nlohmann::json::array();
  for (const auto& s : record.scales) {
    arr.push_back({{"n", s.n},
                   {"j_n", s.j},
                   {"blocks", s.blocks},
                   {"witnesses", s.witnesses},
                   {"exceedances", s.exceedances},
                   {"chi_exceedances", s.chi_exceedances},
                   {"complete", s.complete}});
  }
  return doc.dump(2);
}

AntimarpisTree antimarpis_field(const ScaleEnvelope& env, const MotherWaveletTable& table,
                                const std::vector<int>& scales, int J_max) {
  require_divergent(env, "antimarpis_field");
  check_scales(scales);
  require(scales.back() <= J_max, ErrorKind::InvalidParameter, "tree scales must not exceed J_max");
  require(table.positivity_floor > 0.0 && table.negativity_ceiling < 0.0, ErrorKind::InvalidPrecondition,
          "table needs both a positivity and a negativity interval");
  AntimarpisTree tree;
  tree.field = CoefficientField::zeros(J_max);
  const int j0 = scales.front();
  const auto k0 = place(table, table.positivity, j0, kFirstWindow, std::nullopt);
  if (!k0) fail(ErrorKind::PlacementInfeasible, "no admissible root position at scale " + std::to_string(j0));
  tree.levels.push_back({TreeNode{j0, *k0, true, -1, scaled_interval(table.positivity, j0, *k0)}});
  for (std::size_t d = 1; d < scales.size(); ++d) {
    const int j = scales[d];
    std::set<std::int64_t> taken;
    std::vector<TreeNode> level;
    const auto& parents = tree.levels.back();
    for (std::size_t p = 0; p < parents.size(); ++p) {
      const Interval& box = parents[p].interval;
      for (bool positive : {true, false}) {
        const Interval& mother = positive ? table.positivity : table.negativity;
        const auto k = place(table, mother, j, half_of(box), box, &taken);
        if (!k) {
          fail(ErrorKind::PlacementInfeasible, "no admissible child at tree depth " + std::to_string(d) +
                                                   " (scale " + std::to_string(j) + ")");
        }
        taken.insert(*k);
        level.push_back(TreeNode{j, *k, positive, static_cast<int>(p), scaled_interval(mother, j, *k)});
      }
    }
    tree.levels.push_back(std::move(level));
  }
  for (const auto& level : tree.levels)
    for (const auto& node : level) tree.field.set(node.j, wrap_index(node.j, node.k), envelope_value(env, node.j));
  return tree;
}

int prop46_multiplier() { return static_cast<int>(std::floor(2.0 / (std::log(2.0) - 0.25))) + 1; }

RateDescriptor prop46_rate() {
  RateDescriptor r;
  r.K = 1.0;
  r.a = -0.5;
  r.b = -1.0;
  r.c = -1.0;
  r.j_min = 3;
  r.support = RateDescriptor::Support::Geometric;
  r.q = prop46_multiplier();
  return r;
}

int prop46_spacing(const MotherWaveletTable& table) { return table.support; }

CoefficientField prop46_field(const MotherWaveletTable& table, int n_max, int J_max) {
  require(n_max >= 1, ErrorKind::InvalidParameter, "n_max must be >= 1");
  const int q = prop46_multiplier();
  std::vector<int> scales;
  std::int64_t j = 1;
  for (int n = 1; n <= n_max; ++n) {
    j *= q;
    require(j <= J_max && j <= kMaxDenseScale, ErrorKind::InvalidParameter,
            "j_" + std::to_string(n) + " = " + std::to_string(j) + " exceeds the representable depth " +
                std::to_string(std::min(J_max, kMaxDenseScale)));
    scales.push_back(static_cast<int>(j));
  }
  const auto rate = prop46_rate();
  const std::int64_t k0 = prop46_spacing(table);
  CoefficientField field = CoefficientField::zeros(J_max);
  for (int s : scales) {
    const double w = rate.value(s);
    for (std::int64_t k = 0; k < (std::int64_t{1} << s); k += k0) field.set(s, k, w);
  }
  return field;
}

}  // namespace rws
