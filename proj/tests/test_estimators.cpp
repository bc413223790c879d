#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rws/error.hpp"
#include "rws/estimators.hpp"
#include "rws/parallel.hpp"
#include "rws/random_laws.hpp"

using namespace rws;

namespace {

CoefficientField power_field(int J, double alpha, std::uint64_t seed) {
  auto f = CoefficientField::zeros(J);
  const auto u = RandomLaw::parse("bounded_uniform:1");
  for (int j = 0; j <= J; ++j)
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
      f.set(j, k, std::exp2(-alpha * j) * draw(u, seed, {Stream::Trial, j, k}));
  return f;
}

SamplePath path_from(std::vector<double> v) {
  SamplePath p;
  p.values = std::move(v);
  p.resolution = static_cast<int>(std::log2(static_cast<double>(p.values.size())));
  return p;
}

}  // namespace

TEST_CASE("Haar analysis inverts synthesis") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Haar, 1), 8);
  const auto f = power_field(8, 0.5, 2);
  const auto g = analyze(synthesize(f, t, 8, 12), t, 8);
  for (int j = 0; j <= 8; ++j)
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) CHECK(std::abs(g.at(j, k) - f.at(j, k)) <= 1e-10);
  CHECK(std::abs(g.coarse - f.coarse) <= 1e-12);
}

TEST_CASE("Daubechies analysis inverts synthesis up to table resolution") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Daubechies, 4), 10);
  const auto f = power_field(7, 0.5, 8);
  const auto g = analyze(synthesize(f, t, 7, 14), t, 7);
  for (int j = 0; j <= 7; ++j) {
    double err = 0.0, mx = 0.0;
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
      err = std::max(err, std::abs(g.at(j, k) - f.at(j, k)));
      mx = std::max(mx, std::abs(f.at(j, k)));
    }
    CAPTURE(j);
    CHECK(err <= 0.02 * mx);
  }
  CHECK_THROWS_AS(empirical_scale_envelope(synthesize(f, t, 7, 10), t, 7), Error);
}

TEST_CASE("empirical envelope of an exact power field") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Haar, 1), 8);
  auto f = CoefficientField::zeros(10);
  for (int j = 0; j <= 10; ++j) f.set(j, (std::int64_t{1} << j) / 3, std::exp2(-0.7 * j));
  const auto env = empirical_scale_envelope(synthesize(f, t, 10, 15), t, 10);
  CHECK(hmin_estimate(env, 2, 10) == doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("analysis of a constant and of a single wavelet") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Daubechies, 10), 12);
  SamplePath flat;
  flat.resolution = 14;
  flat.values.assign(std::size_t{1} << 14, 2.0);
  for (double w : empirical_scale_envelope(flat, t, 8).values) CHECK(w <= 1e-8);
  auto one = CoefficientField::zeros(8);
  one.set(3, 2, 5.0);
  const auto env = empirical_scale_envelope(synthesize(one, t, 8, 17), t, 8);
  CHECK(env.values[3] == doctest::Approx(5.0).epsilon(1e-4 / 5.0));
  for (int j = 0; j <= 8; ++j)
    if (j != 3) CHECK(env.values[j] <= 1e-4);
}

TEST_CASE("interval average and sup on the torus") {
  std::vector<double> v(16);
  for (std::size_t i = 0; i < 16; ++i) v[i] = static_cast<double>(i);
  const auto p = path_from(v);
  CHECK(interval_average(p, {0.0, 0.25}) == doctest::Approx(1.5));
  CHECK(interval_sup(p, {0.5, 0.75}) == 11.0);
  CHECK(interval_sup(p, {-0.125, 0.125}) == 15.0);
  CHECK(interval_average(p, {-0.125, 0.125}) == doctest::Approx((14 + 15 + 0 + 1) / 4.0));
}

TEST_CASE("sup profile records global and local sups") {
  std::vector<double> v(64, 0.0);
  v[5] = -3.0;
  v[40] = 2.0;
  const auto prof = sup_profile({path_from(v)}, {7}, 2);
  REQUIRE(prof.local_sups.size() == 1);
  CHECK(prof.global_sup[0] == 3.0);
  CHECK(prof.local_sups[0] == std::vector<double>{3.0, 0.0, 2.0, 0.0});
  std::ostringstream os;
  write_profile_csv(prof, os, "h");
  CHECK(os.str().rfind("# h\nJ,global_sup,interval_id,local_sup\n7,3,0,3\n", 0) == 0);
}

TEST_CASE("hmin on deterministic and Rademacher envelopes") {
  const auto rad = randomized_power_envelope(0.4, RandomLaw::parse("rademacher"), 3, 20);
  RateDescriptor r;
  r.s = 0.4;
  r.j_min = 0;
  const auto det = ScaleEnvelope::from_rate(r, 20);
  for (int j = 0; j <= 20; ++j) CHECK(rad.values[j] == doctest::Approx(det.values[j]).epsilon(1e-15));
  CHECK(hmin_estimate(rad, 8, 20) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_THROWS_AS(hmin_estimate(rad, 8, 10), Error);
  ScaleEnvelope holes = det;
  holes.values[10] = 0.0;
  CHECK_THROWS_AS(hmin_estimate(holes, 8, 16), Error);
}

TEST_CASE("randomized envelope is reproducible and worker-count invariant") {
  const auto g = RandomLaw::parse("gaussian");
  const auto a = randomized_power_envelope(0.5, g, 12, 18);
  set_worker_count(1);
  const auto b = randomized_power_envelope(0.5, g, 12, 18);
  set_worker_count(0);
  CHECK(a.values == b.values);
  // max of 2^j gaussians grows like sqrt(2 j ln 2)
  CHECK(a.values[18] * std::exp2(0.5 * 18) == doctest::Approx(std::sqrt(2 * 18 * std::log(2.0))).epsilon(0.25));
}

TEST_CASE("modulus ratios on an exact power path") {
  // f(x) = |x - 1/2|^0.5 has sup increment at lag h equal to h^0.5
  std::vector<double> v(1 << 14);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(std::abs(static_cast<double>(i) / v.size() - 0.5));
  const auto fit = modulus_ratio(path_from(v), {0.5, 0.0}, 3, 12);
  for (double r : fit.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.spread() == doctest::Approx(1.0).epsilon(1e-9));
  const auto logfit = modulus_ratio(path_from(v), {0.5, 2.0}, 3, 12);
  CHECK(logfit.theta_values[0] == doctest::Approx(std::pow(0.125, 0.5) * std::sqrt(std::log(8.0))));
  CHECK_FALSE(logfit.strictly_increasing());
  CHECK_THROWS_AS(modulus_ratio(path_from(v), {0.5, 0.0}, 1, 12), Error);
  CHECK_THROWS_AS(modulus_ratio(path_from(v), {0.5, 0.0}, 3, 14), Error);
}

TEST_CASE("regular modulus decision for power-log moduli") {
  const auto half = regular_modulus_check({0.5, 0.0}, 1, 10);
  CHECK(half.regular);
  CHECK(half.witness == 0);
  const auto one = regular_modulus_check({1.0, 0.0}, 1, 10);
  CHECK_FALSE(one.regular);
  CHECK_FALSE(one.first_holds);
  CHECK(one.second_holds);
  const auto onehalf = regular_modulus_check({1.5, 0.5}, 1, 10);
  CHECK(onehalf.regular);
  CHECK(onehalf.witness == 1);
  CHECK_FALSE(regular_modulus_check({1.5, 0.0}, 0, 10).regular);
  // dominated dyadic sums stay bounded
  CHECK(half.first_ratio < 1.0 / (1.0 - std::exp2(-0.5)) + 1e-9);
  CHECK(half.second_ratio < 1.0 / (1.0 - std::exp2(-0.5)) + 1e-9);
  try {
    regular_modulus_check({-0.1, 0.0}, 1, 10);
    FAIL("expected UnsupportedFamily");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedFamily);
  }
}
