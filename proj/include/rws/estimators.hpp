#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rws/coefficients.hpp"
#include "rws/random_laws.hpp"
#include "rws/synthesis.hpp"
#include "rws/wavelet.hpp"

namespace rws {

/// Riemann-sum analysis c_{j,k} = 2^j \int f psi_{j,k}, j = 0..J; coarse is the mean.
CoefficientField analyze(const SamplePath& path, const MotherWaveletTable& table, int J);

/// Requires J <= R - 4.
ScaleEnvelope empirical_scale_envelope(const SamplePath& path, const MotherWaveletTable& table, int J);

struct SupGrowthProfile {
  std::vector<int> truncations;
  std::vector<double> global_sup;
  int depth = 0;
  /// local_sups[i][l]: sup |partial sum J_i| over [l 2^{-depth}, (l+1) 2^{-depth}).
  std::vector<std::vector<double>> local_sups;
};

SupGrowthProfile sup_profile(const std::vector<SamplePath>& partials, const std::vector<int>& J_list, int depth);

/// Sup-norm profile of the (optionally randomized) partial sums.
SupGrowthProfile sup_growth(const CoefficientField& field, const MotherWaveletTable& table,
                            const std::optional<RandomLaw>& law, std::uint64_t seed, const std::vector<int>& J_list,
                            int depth, int R);

/// Mean of the path over grid points in [iv.lo, iv.hi) (torus coordinates).
double interval_average(const SamplePath& path, const Interval& iv);
/// max |path| over grid points in [iv.lo, iv.hi).
double interval_sup(const SamplePath& path, const Interval& iv);

/// -slope of log2 omega_j against j on [j_lo, j_hi].
double hmin_estimate(const ScaleEnvelope& env, int j_lo, int j_hi);

/// Envelope of the randomized field c_{j,k} chi_{j,k} for c_{j,k} = 2^{-alpha j},
/// computed scale by scale without storing the field (scales up to 30).
ScaleEnvelope randomized_power_envelope(double alpha, const RandomLaw& law, std::uint64_t seed, int J);

/// theta(h) = h^alpha |log h|^{1/gamma}; gamma = 0 drops the log factor.
struct ModulusSpec {
  double alpha = 0.5;
  double gamma = 0.0;
  double operator()(double h) const;
};

struct ModulusFit {
  std::vector<int> m;
  std::vector<double> lags;
  std::vector<double> sup_increments;
  std::vector<double> theta_values;
  std::vector<double> ratios;

  /// max ratio / min ratio.
  double spread() const;
  bool strictly_increasing() const;
};

/// Torus sups of |f(x+h) - f(x)| over all grid x, h = 2^{-m}, m_lo..m_hi.
ModulusFit modulus_ratio(const SamplePath& path, const ModulusSpec& theta, int m_lo, int m_hi);

/// theta(h) = h^alpha |log h|^kappa.
struct PowerLogModulus {
  double alpha = 0.5;
  double kappa = 0.0;
};

struct RegularModulusResult {
  bool regular = false;
  /// Smallest N' in 0..N satisfying both inequalities, -1 if none.
  int witness = -1;
  /// Outcomes for N' = witness, or for the N' closest to alpha when none works.
  bool first_holds = false;
  bool second_holds = false;
  /// Numeric ratios sum / (2^{N'J} theta(2^{-J})) at the given J (truncated sums).
  double first_ratio = 0.0;
  double second_ratio = 0.0;
};

/// Symbolic decision of the dyadic-sum regularity conditions for the
/// power-log family: the upper-tail sum is dominated iff alpha > N', the
/// lower-tail sum iff alpha < N' + 1.
RegularModulusResult regular_modulus_check(const PowerLogModulus& theta, int N, int J);

void write_profile_csv(const SupGrowthProfile& profile, std::ostream& out, const std::string& header_comment = "");
void write_modulus_csv(const ModulusFit& fit, std::ostream& out, const std::string& header_comment = "");

}  // namespace rws
