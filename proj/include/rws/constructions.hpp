#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rws/coefficients.hpp"
#include "rws/random_laws.hpp"
#include "rws/wavelet.hpp"

namespace rws {

/// Block algorithm selecting a sparse subsequence j_n of a divergent envelope
/// with gaps tending to infinity and unbounded selected sum. Scales up to
/// j_limit (default: the envelope's J_max) are considered.
std::vector<int> lemma_subsequence(const ScaleEnvelope& env, int j_limit = -1);

struct NestedPlacement {
  std::vector<int> scales;
  std::vector<std::int64_t> positions;
  /// Image of the positivity interval, {x : 2^{j_n} x - k_n in K}.
  std::vector<Interval> intervals;
};

/// Image of a mother-variable interval under x = (u + k) 2^{-j}.
Interval scaled_interval(const Interval& mother, int j, std::int64_t k);
/// Concentric half of an interval.
Interval half_of(const Interval& iv);
/// Region [k, k + support] 2^{-j} where psi_{j,k} lives (before wrapping).
Interval support_interval(const MotherWaveletTable& table, int j, std::int64_t k);

/// Leftmost positions with K_{j_1,k_1} inside [1/8, 3/8] and, for n >= 2,
/// K_{j_n,k_n} inside half of K_{j_{n-1},k_{n-1}} and the support of
/// psi_{j_n,k_n} inside K_{j_{n-1},k_{n-1}}.
NestedPlacement nested_placement(const MotherWaveletTable& table, const std::vector<int>& scales);

/// Greedy thinning of candidate scales so that nested_placement succeeds.
std::vector<int> feasible_subsequence(const MotherWaveletTable& table, const std::vector<int>& candidates);

struct UnboundedOptions {
  /// Add translated copies of the nested tail at dyadic centres so the
  /// unboundedness is not confined to one point.
  bool everywhere = false;
};

/// One coefficient per scale: omega_{j_n} at k_n on placed scales, omega_j
/// at floor(3/4 2^j) elsewhere.
CoefficientField unbounded_series_field(const ScaleEnvelope& env, const NestedPlacement& placement, int J_max,
                                        UnboundedOptions options = {});

/// c_{j_n,k} = 1/n^2 at every k on the plain divergence scales j_n <= J_max
/// (n <= n_max when given).
CoefficientField contreex_field(const RandomLaw& law, int J_max, std::optional<int> n_max = std::nullopt);
/// Scales used by contreex_field.
std::vector<int> contreex_scales(const RandomLaw& law, int J_max, std::optional<int> n_max = std::nullopt);

struct PrevalenceScale {
  int n = 0;
  int j = 0;
  std::int64_t blocks = 0;
  std::int64_t witnesses = 0;
  std::int64_t exceedances = 0;      // |(eps/n^2 + c) chi| >= n at the witness
  std::int64_t chi_exceedances = 0;  // |chi| >= n^3 at the witness
  bool complete = true;              // false when stopped early
};

struct PrevalenceRecord {
  std::string law;
  std::uint64_t seed = 0;
  std::vector<PrevalenceScale> scales;
  int scales_with_exceedance = 0;
  bool stopped_early = false;
};

struct PrevalenceOptions {
  int n_max = 10;
  /// Stop at the first product exceedance.
  bool stop_at_first = false;
  /// Largest scale processed; blocks at deeper scales are skipped.
  int j_cap = 26;
};

/// Process eps/n^2 + c on the strengthened divergence scales, blocks of
/// length 2 j_n. f may be null (zero function) or a dense field.
PrevalenceRecord prevalence_process(const CoefficientField* f, const RandomLaw& law, std::uint64_t seed,
                                    PrevalenceOptions options = {});

std::string prevalence_json(const PrevalenceRecord& record);

struct TreeNode {
  int j = 0;
  std::int64_t k = 0;
  bool positive = true;  // K (true) or K' (false) image
  int parent = -1;
  Interval interval;
};

struct AntimarpisTree {
  CoefficientField field;
  std::vector<std::vector<TreeNode>> levels;
};

/// Binary tree: the root sits like the first nested interval; every node at
/// scale j_n spawns one child whose K lies in half of the node's interval and
/// one whose K' does, both with supports inside the node's interval.
AntimarpisTree antimarpis_field(const ScaleEnvelope& env, const MotherWaveletTable& table,
                                const std::vector<int>& scales, int J_max);

/// floor(2 / (ln 2 - 1/4)) + 1.
int prop46_multiplier();
/// omega_j = (sqrt(j) log j log log j)^{-1} on j_n = 5^n.
RateDescriptor prop46_rate();
/// Minimal spacing with disjoint supports.
int prop46_spacing(const MotherWaveletTable& table);
/// omega_{j_n} at every k in k0 N, n = 1..n_max.
CoefficientField prop46_field(const MotherWaveletTable& table, int n_max, int J_max = kMaxDenseScale);

}  // namespace rws
