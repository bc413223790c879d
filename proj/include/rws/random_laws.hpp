#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rws {

enum class LawKind { Rademacher, Gaussian, Bernoulli, ExpTail, HeavyTail, BoundedUniform };

struct RandomLaw {
  LawKind kind = LawKind::Gaussian;
  double p = 0.5;      // bernoulli
  double b = 1.0;      // exp_tail rate
  double gamma = 2.0;  // exp_tail shape
  double l = 1.0;      // heavy_tail index
  double M = 1.0;      // bounded_uniform half-width

  /// "rademacher", "gaussian", "bernoulli:p", "exp_tail:b:gamma",
  /// "heavy_tail:l", "bounded_uniform:M".
  static RandomLaw parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
  bool bounded() const;
  /// sup |chi|, infinite for unbounded laws.
  double bound() const;
};

/// Independent streams of the counter-based generator.
enum class Stream : std::uint32_t {
  Coefficient = 1,
  Sign = 2,
  Fourier = 3,
  Trial = 4,
  Adversary = 5,
};

struct DrawIndex {
  Stream stream = Stream::Coefficient;
  std::int64_t j = 0;
  std::int64_t k = 0;
};

/// Philox4x32-10 block for (key, counter).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// 128 random bits for (seed, index) as two 64-bit words.
std::array<std::uint64_t, 2> random_bits(std::uint64_t seed, const DrawIndex& index);

/// Uniform on (0, 1), 53-bit resolution, never 0 or 1.
double bits_to_open_unit(std::uint64_t bits);

/// Standard normal quantile (Wichura's AS241, PPND16).
double normal_quantile(double p);

double draw(const RandomLaw& law, std::uint64_t seed, const DrawIndex& index);

/// P(|chi| >= x).
double tail_probability(const RandomLaw& law, double x);
/// log P(|chi| >= x), finite far beyond double underflow of the tail itself;
/// -inf when the probability is exactly zero.
double log_tail_probability(const RandomLaw& law, double x);

/// E|chi|.
double mean_abs(const RandomLaw& law);

enum class DivergenceVariant { Plain, Strengthened };

/// Minimal j_n with P(|chi| >= n^3) >= 2^{-j} (plain) or >= j 2^{-j}
/// (strengthened, j >= 1), made strictly increasing, n = 1..n_max.
std::vector<int> divergence_sequence(const RandomLaw& law, DivergenceVariant variant, int n_max);

struct GaussianMaxRow {
  int j = 0;
  int trials = 0;
  int exceedances = 0;
  double rate = 0.0;
  double union_bound = 0.0;  // 2^j e^{-j}
};

/// Per scale j in [j_lo, j_hi], fraction of trials in which the largest of
/// 2^j standard Gaussians in modulus exceeds sqrt(2 j).
std::vector<GaussianMaxRow> gaussian_max_check(int j_lo, int j_hi, int trials, std::uint64_t seed);

}  // namespace rws
