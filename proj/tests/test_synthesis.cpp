#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rws/error.hpp"
#include "rws/parallel.hpp"
#include "rws/random_laws.hpp"
#include "rws/synthesis.hpp"

using namespace rws;

namespace {

CoefficientField random_field(int J, std::uint64_t seed) {
  auto f = CoefficientField::zeros(J);
  const auto u = RandomLaw::parse("bounded_uniform:1");
  f.coarse = 0.3;
  for (int j = 0; j <= J; ++j)
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
      f.set(j, k, std::exp2(-0.5 * j) * draw(u, seed, {Stream::Trial, j, k}));
  return f;
}

}  // namespace

TEST_CASE("synthesis agrees with pointwise periodized evaluation") {
  for (int N : {1, 3}) {
    const auto t = cascade_evaluate(build_filter(N == 1 ? WaveletFamily::Haar : WaveletFamily::Daubechies, N), 10);
    const auto f = random_field(6, 9);
    const int R = 10;
    const auto p = synthesize(f, t, 6, R);
    REQUIRE(p.size() == (std::size_t{1} << R));
    for (std::size_t m = 0; m < p.size(); m += 37) {
      double v = f.coarse;
      for (int j = 0; j <= 6; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) v += f.at(j, k) * eval_periodized(t, j, k, p.x(m));
      CAPTURE(m);
      CHECK(p.values[m] == doctest::Approx(v).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("partial sums are nested truncations") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Daubechies, 2), 10);
  const auto f = random_field(8, 3);
  const auto parts = synthesize_partials(f, t, {2, 5, 8}, 11);
  REQUIRE(parts.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const int J = std::vector<int>{2, 5, 8}[i];
    const auto direct = synthesize(f, t, J, 11);
    for (std::size_t m = 0; m < direct.size(); m += 101) CHECK(parts[i].values[m] == direct.values[m]);
  }
  CHECK_THROWS_AS(synthesize_partials(f, t, {5, 2}, 11), Error);
  CHECK_THROWS_AS(synthesize(f, t, 9, 11), Error);
  CHECK_THROWS_AS(synthesize(f, t, 8, 7), Error);
  CHECK_THROWS_AS(synthesize(f, t, 8, kMaxResolution + 1), Error);
}

TEST_CASE("synthesis output is invariant to the worker count") {
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Daubechies, 4), 10);
  const auto f = random_field(12, 5);
  set_worker_count(1);
  const auto a = synthesize(f, t, 12, 16);
  set_worker_count(3);
  const auto b = synthesize(f, t, 12, 16);
  set_worker_count(0);
  CHECK(a.values == b.values);
}

TEST_CASE("randomization multiplies each coefficient by its own draw") {
  const auto f = random_field(6, 1);
  const auto r = randomize(f, RandomLaw::parse("rademacher"), 77);
  CHECK(r.coarse == f.coarse);
  for (int j = 0; j <= 6; ++j)
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
      CHECK(std::abs(r.at(j, k)) == std::abs(f.at(j, k)));
      CHECK(r.at(j, k) == f.at(j, k) * draw(RandomLaw::parse("rademacher"), 77, {Stream::Coefficient, j, k}));
    }
  const auto t = cascade_evaluate(build_filter(WaveletFamily::Haar, 1), 8);
  const auto direct = synthesize(r, t, 6, 9);
  const auto fused = randomized_synthesize(f, t, RandomLaw::parse("rademacher"), 77, 6, 9);
  CHECK(direct.values == fused.values);
  CHECK(fused.provenance.seed == 77);
}

TEST_CASE("sine series against direct summation") {
  std::vector<double> b = {0.7, -0.2, 0.0, 0.05, 0.3};
  b.resize(40, 0.0);
  b[39] = 0.01;  // above the Nyquist frequency of R = 6: aliased
  const int R = 6;
  const auto p = sine_series(b, R, 0.25);
  for (std::size_t m = 0; m < p.size(); ++m) {
    double v = 0.25 * p.x(m);
    for (std::size_t i = 0; i < b.size(); ++i) v += b[i] * std::sin(2.0 * M_PI * (i + 1.0) * p.x(m));
    CHECK(p.values[m] == doctest::Approx(v).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("Fourier sawtooth converges away from the jump") {
  const auto p = fourier_sawtooth(1 << 14, 17);
  CHECK(std::abs(p.values[p.size() / 2]) < 1e-12);
  CHECK(p.values[p.size() / 4] == doctest::Approx(-0.25).epsilon(1e-4));
  double err = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) {
    const double x = p.x(m);
    if (x < 0.1 || x > 0.9) continue;
    err = std::max(err, std::abs(p.values[m] - (x - 0.5)));
  }
  CHECK(err <= 1e-3);
  CHECK_THROWS_AS(fourier_sawtooth(0, 10), Error);
}

TEST_CASE("Wiener expansion starts at zero and has variance 1/2 at the midpoint") {
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = wiener_brownian(256, 10, s);
    CHECK(p.values[0] == 0.0);
    acc += p.values[p.size() / 2] * p.values[p.size() / 2];
  }
  CHECK(std::abs(acc / 200.0 - 0.5) <= 0.15 * 0.5);
  const auto lin = wiener_brownian(0, 8, 4);
  const double slope = lin.values[1] / lin.x(1);
  for (std::size_t m = 1; m < lin.size(); ++m) CHECK(lin.values[m] == doctest::Approx(slope * lin.x(m)));
  CHECK(wiener_brownian(64, 10, 3).values == wiener_brownian(64, 10, 3).values);
}

TEST_CASE("dyadic block energies") {
  // a_n = 1/|n|: s_j^2 = 2 sum_{2^j <= n < 2^{j+1}} n^-2
  const int N = 63;
  std::vector<double> a(2 * N + 1, 0.0);
  for (int n = 1; n <= N; ++n) a[N + n] = a[N - n] = 1.0 / n;
  const auto e = dyadic_block_energies(a);
  REQUIRE(e.s.size() == 6);
  CHECK(e.s[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(e.s[1] == doctest::Approx(std::sqrt(2.0 * (0.25 + 1.0 / 9))));
  CHECK(e.decreasing);
  double sum = 0.0;
  for (double s : e.s) sum += s;
  CHECK(e.l1_partial_sum == doctest::Approx(sum));
  a[N + 40] = 5.0;
  CHECK_FALSE(dyadic_block_energies(a).decreasing);
  CHECK_THROWS_AS(dyadic_block_energies(std::vector<double>(4, 0.0)), Error);
}

TEST_CASE("path CSV and provenance") {
  const auto p = fourier_sawtooth(4, 3);
  std::ostringstream os;
  write_path_csv(p, os, "hello");
  CHECK(os.str().rfind("# hello\nx,value\n0,", 0) == 0);
  CHECK(provenance_json(p).find("fourier_sawtooth") != std::string::npos);
}
