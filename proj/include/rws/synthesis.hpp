#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rws/coefficients.hpp"
#include "rws/random_laws.hpp"
#include "rws/wavelet.hpp"

namespace rws {

struct Provenance {
  std::string field_id;
  std::string law = "deterministic";
  std::uint64_t seed = 0;
  int truncation = 0;
};

/// Values on x_m = m 2^{-R}, m = 0..2^R-1.
struct SamplePath {
  int resolution = 0;
  std::vector<double> values;
  Provenance provenance;

  std::size_t size() const { return values.size(); }
  double x(std::size_t m) const { return static_cast<double>(m) / static_cast<double>(values.size()); }
  void validate() const;
};

inline constexpr int kMaxResolution = 24;

/// coarse + sum_{j<=J} sum_k c_{j,k} psi_{j,k}(x_m). Requires J <= field.J_max
/// and J <= R; grids finer than the table repeat the left table value.
SamplePath synthesize(const CoefficientField& field, const MotherWaveletTable& table, int J, int R,
                      const std::string& field_id = "field");

/// Partial sums for every J in J_list (ascending), accumulated in one pass.
std::vector<SamplePath> synthesize_partials(const CoefficientField& field, const MotherWaveletTable& table,
                                            const std::vector<int>& J_list, int R,
                                            const std::string& field_id = "field");

/// c_{j,k} chi_{j,k}; the coarse term is left alone.
CoefficientField randomize(const CoefficientField& field, const RandomLaw& law, std::uint64_t seed);

SamplePath randomized_synthesize(const CoefficientField& field, const MotherWaveletTable& table, const RandomLaw& law,
                                 std::uint64_t seed, int J, int R, const std::string& field_id = "field");

/// linear * x + sum_{m=1}^{M} b[m-1] sin(2 pi m x) on the 2^R grid.
SamplePath sine_series(const std::vector<double>& b, int R, double linear = 0.0);

/// -sum_{m<=M} sin(2 pi m x) / (pi m).
SamplePath fourier_sawtooth(int M, int R);

/// sqrt(2) chi_0 x + sum_{m<=M} chi_m sin(2 pi m x) / (pi m), Gaussian chi.
SamplePath wiener_brownian(int M, int R, std::uint64_t seed);

struct BlockEnergies {
  std::vector<double> s;  // s_j, j = 0..
  bool decreasing = true;
  double l1_partial_sum = 0.0;
};

/// a holds a_{-N}..a_{N} (size 2N+1).
BlockEnergies dyadic_block_energies(const std::vector<double>& a);

/// CSV (x, value), 12 significant digits; header_comment lines are prefixed with '#'.
void write_path_csv(const SamplePath& path, std::ostream& out, const std::string& header_comment = "");
std::string provenance_json(const SamplePath& path);

}  // namespace rws
