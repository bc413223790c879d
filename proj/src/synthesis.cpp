#include "rws/synthesis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include "json.hpp"
#include <ostream>

#include "rws/error.hpp"
#include "rws/parallel.hpp"

namespace rws {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void check_resolution(int R) {
  require(R >= 1 && R <= kMaxResolution, ErrorKind::InvalidParameter,
          "resolution R must lie in [1, " + std::to_string(kMaxResolution) + "], got " + std::to_string(R));
}

}  // namespace

void SamplePath::validate() const {
  require(values.size() == (std::size_t{1} << resolution), ErrorKind::InvalidParameter, "path must hold 2^R values");
  for (double v : values) require(std::isfinite(v), ErrorKind::NumericalFailure, "path contains non-finite values");
}

std::vector<SamplePath> synthesize_partials(const CoefficientField& field, const MotherWaveletTable& table,
                                            const std::vector<int>& J_list, int R, const std::string& field_id) {
  check_resolution(R);
  require(!J_list.empty(), ErrorKind::InvalidParameter, "no truncation scales requested");
  for (std::size_t i = 0; i < J_list.size(); ++i) {
    const int J = J_list[i];
    require(J >= 0 && J <= field.J_max, ErrorKind::InvalidParameter,
            "truncation J = " + std::to_string(J) + " outside the field depth " + std::to_string(field.J_max));
    require(J <= R, ErrorKind::InvalidParameter,
            "truncation J = " + std::to_string(J) + " finer than the grid R = " + std::to_string(R));
    if (i > 0) require(J > J_list[i - 1], ErrorKind::InvalidParameter, "truncations must increase");
  }
  const int J_top = J_list.back();
  const std::size_t n = std::size_t{1} << R;
  const int S = table.support;

  std::vector<std::vector<double>> kernels;
  kernels.reserve(static_cast<std::size_t>(J_top) + 1);
  for (int j = 0; j <= J_top; ++j) kernels.push_back(table.psi_at_level(R - j));

  std::vector<SamplePath> out(J_list.size());
  for (std::size_t i = 0; i < J_list.size(); ++i) {
    out[i].resolution = R;
    out[i].values.assign(n, 0.0);
    out[i].provenance = {field_id, "deterministic", 0, J_list[i]};
  }

  // Each grid point is owned by one chunk and summed coarse term first, then
  // scales in increasing j, within a scale over increasing k.
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(end - begin, field.coarse);
        std::size_t snap = 0;
        for (int j = 0; j <= J_top; ++j) {
          const int L = R - j;
          const std::size_t mask_k = (std::size_t{1} << j) - 1;
          const std::size_t mask_r = (std::size_t{1} << L) - 1;
          const auto& coef = field.levels[static_cast<std::size_t>(j)];
          const auto& ker = kernels[static_cast<std::size_t>(j)];
          for (std::size_t m = begin; m < end; ++m) {
            const std::size_t q = m >> L;
            const std::size_t r = m & mask_r;
            double s = 0.0;
            for (int t = S - 1; t >= 0; --t) {
              const std::size_t k = (q - static_cast<std::size_t>(t)) & mask_k;
              s += coef[k] * ker[r + (static_cast<std::size_t>(t) << L)];
            }
            acc[m - begin] += s;
          }
          if (snap < J_list.size() && J_list[snap] == j) {
            std::copy(acc.begin(), acc.end(), out[snap].values.begin() + static_cast<std::ptrdiff_t>(begin));
            ++snap;
          }
        }
      },
      1024);
  return out;
}

SamplePath synthesize(const CoefficientField& field, const MotherWaveletTable& table, int J, int R,
                      const std::string& field_id) {
  return std::move(synthesize_partials(field, table, {J}, R, field_id).front());
}

CoefficientField randomize(const CoefficientField& field, const RandomLaw& law, std::uint64_t seed) {
  law.validate();
  CoefficientField out = field;
  for (int j = 0; j <= field.J_max; ++j) {
    auto& lvl = out.levels[static_cast<std::size_t>(j)];
    parallel_for(lvl.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        if (lvl[k] != 0.0) lvl[k] *= draw(law, seed, {Stream::Coefficient, j, static_cast<std::int64_t>(k)});
      }
    });
  }
  return out;
}

SamplePath randomized_synthesize(const CoefficientField& field, const MotherWaveletTable& table, const RandomLaw& law,
                                 std::uint64_t seed, int J, int R, const std::string& field_id) {
  require(J >= 0 && J <= field.J_max, ErrorKind::InvalidParameter, "truncation outside the field depth");
  auto path = synthesize(randomize(field, law, seed), table, J, R, field_id);
  path.provenance.law = law.to_string();
  path.provenance.seed = seed;
  return path;
}

SamplePath sine_series(const std::vector<double>& b, int R, double linear) {
  check_resolution(R);
  const std::size_t n = std::size_t{1} << R;
  const std::size_t half = n / 2;
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (half + 1)));
  auto* data = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  require(spec && data, ErrorKind::NumericalFailure, "FFT buffer allocation failed");
  std::fill(spec[0], spec[0] + 2 * (half + 1), 0.0);
  // b sin(2 pi f x) = X[f] e^{+} + conj(X[f]) e^{-} with X[f] = -i b / 2;
  // frequencies above n/2 alias to n - f with the opposite sign
  for (std::size_t m = 1; m <= b.size(); ++m) {
    const std::size_t f = m % n;
    if (f == 0 || f == half) continue;
    if (f < half) spec[f][1] -= 0.5 * b[m - 1];
    else spec[n - f][1] += 0.5 * b[m - 1];
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, data, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  SamplePath path;
  path.resolution = R;
  path.values.resize(n);
  for (std::size_t m = 0; m < n; ++m) path.values[m] = data[m] + linear * path.x(m);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  fftw_free(data);
  path.provenance.truncation = static_cast<int>(b.size());
  return path;
}

SamplePath fourier_sawtooth(int M, int R) {
  require(M >= 1, ErrorKind::InvalidParameter, "Fourier truncation M must be >= 1");
  std::vector<double> b(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) b[static_cast<std::size_t>(m - 1)] = -1.0 / (M_PI * m);
  auto path = sine_series(b, R);
  path.provenance.field_id = "fourier_sawtooth";
  return path;
}

SamplePath wiener_brownian(int M, int R, std::uint64_t seed) {
  require(M >= 0, ErrorKind::InvalidParameter, "Fourier truncation M must be >= 0");
  const RandomLaw gauss{};
  std::vector<double> b(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) {
    b[static_cast<std::size_t>(m - 1)] = draw(gauss, seed, {Stream::Fourier, 0, m}) / (M_PI * m);
  }
  const double chi0 = draw(gauss, seed, {Stream::Fourier, 0, 0});
  auto path = sine_series(b, R, std::sqrt(2.0) * chi0);
  path.provenance = {"wiener_brownian", "gaussian", seed, M};
  return path;
}

BlockEnergies dyadic_block_energies(const std::vector<double>& a) {
  require(a.size() % 2 == 1, ErrorKind::InvalidParameter, "coefficients must be indexed -N..N (odd length)");
  const std::int64_t N = static_cast<std::int64_t>(a.size() / 2);
  BlockEnergies out;
  for (std::int64_t lo = 1; lo <= N; lo *= 2) {
    double e = 0.0;
    for (std::int64_t m = lo; m < 2 * lo && m <= N; ++m) {
      const double p = a[static_cast<std::size_t>(N + m)];
      const double q = a[static_cast<std::size_t>(N - m)];
      e += p * p + q * q;
    }
    out.s.push_back(std::sqrt(e));
  }
  for (std::size_t j = 0; j < out.s.size(); ++j) {
    out.l1_partial_sum += out.s[j];
    if (j > 0 && out.s[j] > out.s[j - 1] * (1.0 + 1e-12)) out.decreasing = false;
  }
  return out;
}

void write_path_csv(const SamplePath& path, std::ostream& out, const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "x,value\n";
  char buf[64];
  for (std::size_t m = 0; m < path.values.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", path.x(m), path.values[m]);
    out << buf;
  }
}

std::string provenance_json(const SamplePath& path) {
  nlohmann::json doc{{"field_id", path.provenance.field_id},
                     {"law", path.provenance.law},
                     {"seed", path.provenance.seed},
                     {"truncation", path.provenance.truncation},
                     {"resolution", path.resolution},
                     {"samples", path.values.size()}};
  return doc.dump(2);
}

}  // namespace rws
