#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rws/wavelet.hpp"

namespace rws {

/// Wavelet coefficients c_{j,k} on the torus, j = 0..J_max, k = 0..2^j-1,
/// plus the coefficient of the constant function.
struct CoefficientField {
  int J_max = 0;
  double coarse = 0.0;
  std::vector<std::vector<double>> levels;

  static CoefficientField zeros(int J_max);

  std::size_t scale_size(int j) const { return std::size_t{1} << j; }
  double at(int j, std::int64_t k) const;
  void set(int j, std::int64_t k, double value);
  /// Throws InvalidParameter when level sizes are wrong or an entry is not finite.
  void validate() const;
};

/// Largest scale a dense field may hold.
inline constexpr int kMaxDenseScale = 20;

/// Symbolic rate omega_j = K 2^{-s j} j^a (log j)^b (log log j)^c for j >= j_min
/// (natural logarithms), optionally restricted to a sparse index set.
struct RateDescriptor {
  enum class Support { All, Geometric, Explicit };

  double K = 1.0;
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int j_min = 1;
  Support support = Support::All;
  /// Geometric support: j_n = q^n for n >= 1.
  int q = 0;
  /// Explicit support: finite, increasing scale list.
  std::vector<int> indices;

  /// Formula value, ignoring the support restriction; zero below j_min.
  double formula(std::int64_t j) const;
  bool active(std::int64_t j) const;
  /// formula(j) on the support, zero elsewhere.
  double value(std::int64_t j) const;
  void validate() const;
};

struct ScaleEnvelope {
  std::vector<double> values;
  std::optional<RateDescriptor> rate;

  int J_max() const { return static_cast<int>(values.size()) - 1; }
  /// Values up to J_max from a symbolic rate, rate attached.
  static ScaleEnvelope from_rate(const RateDescriptor& rate, int J_max);
};

ScaleEnvelope scale_envelope(const CoefficientField& field);

enum class CriterionKind { Linfty, C0, L1, SqrtJ, Gamma, LogLog };
enum class Verdict { Holds, Fails, UndecidableNumeric };

CriterionKind parse_criterion(const std::string& name);
std::string to_string(CriterionKind kind);
std::string to_string(Verdict verdict);

struct CriterionDecision {
  Verdict verdict = Verdict::UndecidableNumeric;
  /// Human-readable rule that produced the verdict.
  std::string rule;
  /// Weighted partial sums sum_{j<=J} w_j omega_j for J = 0..J_max
  /// (running maxima of omega_j for linfty/c0).
  std::vector<double> partial_sums;
};

/// gamma is required for CriterionKind::Gamma and must lie in (0, 2].
CriterionDecision check_criterion(const ScaleEnvelope& env, CriterionKind kind,
                                  std::optional<double> gamma = std::nullopt);

/// Numeric weight w_j used for the partial-sum evidence.
double criterion_weight(CriterionKind kind, std::int64_t j, double gamma = 2.0);

struct HolderFit {
  double alpha = 0.0;
  double C = 0.0;
  std::vector<int> scales;  // scales entering the regression
};

/// Least squares of log2 omega_j against j. Uses the longest contiguous run
/// of non-zero values in [j_lo, j_hi]; when that run is shorter than four
/// points, all non-zero values in the range are used.
HolderFit holder_fit(const ScaleEnvelope& env, int j_lo = 4, int j_hi = -1);

/// Plain least-squares slope/intercept.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class StepKind { Heaviside, Sawtooth };
StepKind parse_step_kind(const std::string& name);

/// Coefficients 2^j \int f psi_{j,k} by quadrature on the table grid.
/// Heaviside is sign(x) on the line with a single jump at 0; index k stands
/// for the signed position in (-2^{j-1}, 2^{j-1}]. Sawtooth is the torus
/// function x - floor(x) - 1/2.
CoefficientField step_function_coefficients(const MotherWaveletTable& table, StepKind kind, int J_max);

/// Signed position in (-2^{j-1}, 2^{j-1}] to storage index.
inline std::int64_t wrap_index(int j, std::int64_t k) {
  const std::int64_t n = std::int64_t{1} << j;
  return ((k % n) + n) % n;
}

void write_field_json(const CoefficientField& field, std::ostream& out);
CoefficientField read_field_json(std::istream& in);
void write_envelope_csv(const ScaleEnvelope& env, std::ostream& out);

}  // namespace rws
