#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rws {

enum class WaveletFamily { Haar, Daubechies };

WaveletFamily parse_family(const std::string& name);
std::string to_string(WaveletFamily family);

/// Low-pass filter h_0..h_{2N-1} of a compactly supported orthonormal wavelet.
struct ScalingFilter {
  std::vector<double> taps;
  int vanishing_moments = 1;

  std::size_t length() const { return taps.size(); }
  /// High-pass companion g_i = (-1)^i h_{L-1-i}.
  std::vector<double> highpass() const;
};

/// Half-open interval [lo, hi) in the mother-wavelet variable u.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(const Interval& other, double tol = 0.0) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }
};

/// Sampled phi and psi on the grid u_m = m 2^{-refinement}, m = 0..support*2^refinement.
/// Immutable after construction.
struct MotherWaveletTable {
  ScalingFilter filter;
  int refinement = 0;
  int support = 0;  // psi vanishes outside [0, support)
  std::vector<double> phi;
  std::vector<double> psi;
  double sup_norm = 0.0;
  Interval positivity;   // psi >= positivity_floor on this interval
  double positivity_floor = 0.0;
  Interval negativity;   // psi <= negativity_ceiling on this interval
  double negativity_ceiling = 0.0;
  /// Sup-differences between consecutive cascade levels, the coarser level
  /// extended piecewise-constant to the finer grid (last entry compares
  /// refinement-1 with refinement).
  std::vector<double> refinement_diffs;

  std::size_t samples_per_unit() const { return std::size_t{1} << refinement; }
  double step() const { return 1.0 / static_cast<double>(samples_per_unit()); }

  /// psi(u) by left-grid-point lookup; exact on the table grid, zero outside
  /// the support.
  double psi_at(double u) const;
  double phi_at(double u) const;

  /// Largest number of integer translates psi(. - k) that are nonzero at one point.
  int overlap_count() const { return support; }
  /// sup_u sum_k |psi(u - k)|, a sharper per-scale bound than overlap*sup.
  double translate_abs_sum() const;

  /// psi on the grid n 2^{-level}, n = 0..support*2^level - 1. Levels up to
  /// the refinement are exact table grid hits; deeper levels continue the
  /// cascade on demand (cached) up to kMaxCascadeLevel and repeat the left
  /// value beyond.
  std::vector<double> psi_at_level(int level) const;

  struct DeepLevels;
  std::shared_ptr<DeepLevels> deep;  // shared by copies

 private:
  std::shared_ptr<const std::vector<double>> deep_psi(int level) const;
};

/// Deepest cascade iterate computed for synthesis kernels.
inline constexpr int kMaxCascadeLevel = 18;

/// Constructs the scaling filter. Haar is Daubechies with N = 1.
ScalingFilter build_filter(WaveletFamily family, int vanishing_moments);

/// Cascade iteration of the two-scale relation started from the box function.
/// Throws NumericalFailure when the sup-difference between the last three
/// levels does not decrease.
MotherWaveletTable cascade_evaluate(const ScalingFilter& filter, int refinement = 12);

/// Periodized, non-L2-normalized basis function psi_{j,k}(x) = sum_l Psi(2^j (x - l) - k).
double eval_periodized(const MotherWaveletTable& table, int j, std::int64_t k, double x);

/// CSV with columns grid_x, phi, psi.
void write_table_csv(const MotherWaveletTable& table, std::ostream& out);

}  // namespace rws
