#include "rws/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "rws/constructions.hpp"
#include "rws/error.hpp"
#include "rws/estimators.hpp"
#include "rws/random_laws.hpp"
#include "rws/synthesis.hpp"
#include "rws/wavelet.hpp"

namespace rws::lab {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- config access

const Config& member(const Config& c, const std::string& key) {
  auto it = c.find(key);
  require(it != c.end(), ErrorKind::InvalidParameter, "missing config key '" + key + "'");
  return *it;
}

int get_int(const Config& c, const std::string& key) {
  const auto& v = member(c, key);
  require(v.is_number(), ErrorKind::InvalidParameter, "config key '" + key + "' must be a number");
  const double d = v.get<double>();
  require(std::floor(d) == d && std::abs(d) < 2e9, ErrorKind::InvalidParameter,
          "config key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

double get_double(const Config& c, const std::string& key) {
  const auto& v = member(c, key);
  require(v.is_number(), ErrorKind::InvalidParameter, "config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_seed(const Config& c) {
  const auto& v = member(c, "seed");
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), ErrorKind::InvalidParameter,
          "seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const Config& c, const std::string& key) {
  const auto& v = member(c, key);
  require(v.is_string(), ErrorKind::InvalidParameter, "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const Config& c, const std::string& key) {
  const auto& v = member(c, key);
  require(v.is_boolean(), ErrorKind::InvalidParameter, "config key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<int> get_int_list(const Config& c, const std::string& key) {
  const auto& v = member(c, key);
  require(v.is_array(), ErrorKind::InvalidParameter, "config key '" + key + "' must be an array");
  std::vector<int> out;
  for (const auto& e : v) {
    require(e.is_number_integer(), ErrorKind::InvalidParameter, "config key '" + key + "' must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

MotherWaveletTable table_from(const Config& c) {
  const auto family = parse_family(get_string(c, "wavelet"));
  const int N = family == WaveletFamily::Haar ? 1 : get_int(c, "N");
  return cascade_evaluate(build_filter(family, N), get_int(c, "R_psi"));
}

double median(std::vector<double> v) {
  require(!v.empty(), ErrorKind::InsufficientData, "median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_abs_diff(const SamplePath& a, const SamplePath& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

// ---------------------------------------------------------------- run context

struct Context {
  std::string name;
  Config cfg;
  std::string digest;
  fs::path dir;
  std::vector<OutputFile> outputs;
  Config summary = Config::object();

  std::string header() const { return "rws-lab " + name + " config-sha256=" + digest; }

  void write(const std::string& rel, const std::function<void(std::ostream&)>& fn) {
    std::ostringstream os;
    fn(os);
    const std::string data = os.str();
    std::ofstream out(dir / rel, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidParameter, "cannot write " + (dir / rel).string());
    out << data;
    out.close();
    require(static_cast<bool>(out), ErrorKind::InvalidParameter, "failed writing " + (dir / rel).string());
    outputs.push_back({rel, sha256_hex(data)});
  }

  void write_csv(const std::string& rel, const std::string& columns,
                 const std::function<void(std::ostream&)>& rows) {
    write(rel, [&](std::ostream& os) {
      os << "# " << header() << '\n' << columns << '\n';
      rows(os);
    });
  }
};

struct Row {
  std::ostringstream os;
  Row() { os.precision(12); }
  template <typename T>
  Row& operator<<(const T& v) {
    if (!first) os << ',';
    first = false;
    os << v;
    return *this;
  }
  bool first = true;
};

void emit(std::ostream& out, Row& row) { out << row.os.str() << '\n'; }

Config common_defaults() {
  return Config{{"wavelet", "daubechies"}, {"N", 10}, {"R_psi", 12}, {"R", 17}, {"seed", 1}};
}

// ---------------------------------------------------------------- experiments

void run_figure1(Context& ctx) {
  const auto& c = ctx.cfg;
  const int R = get_int(c, "R"), M = get_int(c, "M");
  const int J_lo = get_int(c, "J_lo"), J_hi = get_int(c, "J_hi"), depth = get_int(c, "depth");
  const auto seed = get_seed(c);
  const auto law = RandomLaw::parse(get_string(c, "law"));
  require(J_lo <= J_hi, ErrorKind::InvalidParameter, "J_lo must not exceed J_hi");
  const auto table = table_from(c);

  const auto saw = fourier_sawtooth(M, R);
  ctx.write("sawtooth_fourier.csv", [&](std::ostream& os) { write_path_csv(saw, os, ctx.header()); });
  const auto wiener = wiener_brownian(M, R, seed);
  ctx.write("wiener_path.csv", [&](std::ostream& os) { write_path_csv(wiener, os, ctx.header()); });

  const auto field = step_function_coefficients(table, StepKind::Sawtooth, J_hi);
  std::vector<int> J_list(static_cast<std::size_t>(J_hi - J_lo + 1));
  std::iota(J_list.begin(), J_list.end(), J_lo);
  const auto partials = synthesize_partials(randomize(field, law, seed), table, J_list, R, "sawtooth");
  std::string cols = "x";
  for (int J : J_list) cols += ",J" + std::to_string(J);
  ctx.write_csv("wavelet_randomized_sawtooth.csv", cols, [&](std::ostream& os) {
    char buf[32];
    for (std::size_t m = 0; m < partials.front().size(); ++m) {
      std::snprintf(buf, sizeof buf, "%.12g", partials.front().x(m));
      os << buf;
      for (const auto& p : partials) {
        std::snprintf(buf, sizeof buf, ",%.12g", p.values[m]);
        os << buf;
      }
      os << '\n';
    }
  });
  const auto prof = sup_profile(partials, J_list, depth);
  ctx.write("local_sup_map.csv", [&](std::ostream& os) { write_profile_csv(prof, os, ctx.header()); });

  const auto& top = partials.back();
  const double near = interval_sup(top, {-1.0 / 64, 1.0 / 64});
  const double mid = interval_sup(top, {0.25, 0.75});
  ctx.summary["sup_near_jump"] = near;
  ctx.summary["sup_quarter_to_three_quarters"] = mid;
  ctx.summary["near_to_mid_ratio"] = mid > 0 ? near / mid : 0.0;
}

void run_prop22(Context& ctx) {
  const auto& c = ctx.cfg;
  const int J = get_int(c, "J"), R = get_int(c, "R"), depth = get_int(c, "depth");
  const auto seed = get_seed(c);
  const auto table = table_from(c);
  const auto env = ScaleEnvelope::from_rate(parse_rate(get_string(c, "rate")), J);
  const auto candidates = lemma_subsequence(env, J);
  const auto scales = feasible_subsequence(table, candidates);
  require(!scales.empty(), ErrorKind::PlacementInfeasible, "no placeable scale up to J");
  const auto placement = nested_placement(table, scales);
  UnboundedOptions opt;
  opt.everywhere = get_bool(c, "everywhere");
  const auto field = unbounded_series_field(env, placement, J, opt);

  std::vector<int> J_list = scales;
  if (J_list.back() != J) J_list.push_back(J);
  const auto partials = synthesize_partials(field, table, J_list, R, "unbounded_series");
  const auto& full = partials.back();
  const double C = table.positivity_floor;
  ctx.write_csv("placement.csv", "n,j_n,k_n,K_lo,K_hi,average,bound,ratio", [&](std::ostream& os) {
    double acc = 0.0;
    for (std::size_t n = 0; n < scales.size(); ++n) {
      acc += env.values[static_cast<std::size_t>(scales[n])];
      const double avg = interval_average(full, placement.intervals[n]);
      Row r;
      r << n + 1 << scales[n] << placement.positions[n] << placement.intervals[n].lo << placement.intervals[n].hi
        << avg << C * acc << (acc > 0 ? avg / (C * acc) : 0.0);
      emit(os, r);
    }
  });
  const auto prof = sup_profile(partials, J_list, depth);
  ctx.write("sup_profile.csv", [&](std::ostream& os) { write_profile_csv(prof, os, ctx.header()); });

  // summable contrast: random signs on an l1 envelope, tail controlled by the envelope sum
  const auto l1_env = ScaleEnvelope::from_rate(parse_rate(get_string(c, "l1_rate")), J);
  const int J0 = get_int(c, "l1_J0"), trials = get_int(c, "l1_trials");
  require(J0 >= 0 && J0 < J, ErrorKind::InvalidParameter, "l1_J0 must lie below J");
  double tail = 0.0;
  for (int j = J0 + 1; j <= J; ++j) tail += l1_env.values[static_cast<std::size_t>(j)];
  const double bound = table.translate_abs_sum() * tail;
  const auto uni = RandomLaw::parse("bounded_uniform:1");
  int within = 0;
  ctx.write_csv("l1_tail.csv", "trial,sup_difference,bound", [&](std::ostream& os) {
    for (int t = 0; t < trials; ++t) {
      auto f = CoefficientField::zeros(J);
      for (int j = 0; j <= J; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
          f.set(j, k, l1_env.values[static_cast<std::size_t>(j)] *
                          draw(uni, seed + static_cast<std::uint64_t>(t), {Stream::Trial, j, k}));
      const auto p = synthesize_partials(f, table, {J0, J}, R, "l1_field");
      const double d = max_abs_diff(p[0], p[1]);
      within += d <= bound;
      Row r;
      r << t << d << bound;
      emit(os, r);
    }
  });
  ctx.summary["scales"] = scales;
  ctx.summary["positivity_floor"] = C;
  ctx.summary["l1_trials_within_bound"] = within;
}

void run_prop31(Context& ctx) {
  const auto& c = ctx.cfg;
  const int J_max = get_int(c, "J_max"), n_max = get_int(c, "n_max"), R = get_int(c, "R");
  const int depth = get_int(c, "depth");
  const auto seed = get_seed(c);
  const auto table = table_from(c);
  const auto field_law = RandomLaw::parse(get_string(c, "field_law"));
  const auto law = RandomLaw::parse(get_string(c, "law"));
  const auto scales = contreex_scales(field_law, J_max, n_max);
  const auto field = contreex_field(field_law, J_max, n_max);
  const auto randomized = randomize(field, law, seed);

  std::int64_t events = 0;
  ctx.write_csv("events.csv", "n,j_n,coefficients,exceedances,max_abs_chi", [&](std::ostream& os) {
    for (std::size_t i = 0; i < scales.size(); ++i) {
      const double n = static_cast<double>(i + 1);
      const int j = scales[i];
      std::int64_t count = 0;
      double mx = 0.0;
      for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
        const double chi = std::abs(draw(law, seed, {Stream::Coefficient, j, k}));
        mx = std::max(mx, chi);
        if (chi >= n * n * n) ++count;
      }
      events += count;
      Row r;
      r << i + 1 << j << (std::int64_t{1} << j) << count << mx;
      emit(os, r);
    }
  });
  std::vector<int> J_list(static_cast<std::size_t>(J_max + 1));
  std::iota(J_list.begin(), J_list.end(), 0);
  const auto prof = sup_profile(synthesize_partials(randomized, table, J_list, R, "contreex"), J_list, depth);
  ctx.write("sup_profile.csv", [&](std::ostream& os) { write_profile_csv(prof, os, ctx.header()); });

  std::string flag;
  if (law.bounded()) {
    flag = "bounded-regime";
    double s = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) s += 1.0 / static_cast<double>((i + 1) * (i + 1));
    const double bound = s * law.bound() * table.translate_abs_sum();
    ctx.summary["sup_bound"] = bound;
    ctx.summary["sup_within_bound"] = *std::max_element(prof.global_sup.begin(), prof.global_sup.end()) <= bound;
  } else {
    flag = events > 0 ? "exceedance events logged" : "no exceedance observed";
  }
  ctx.summary["regime"] = flag;
  ctx.summary["exceedance_events"] = events;
  ctx.summary["scales"] = scales;
}

void run_prevalence(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto law = RandomLaw::parse(get_string(c, "law"));
  const auto seed = get_seed(c);
  PrevalenceOptions opt;
  opt.n_max = get_int(c, "n_max");
  opt.j_cap = get_int(c, "j_cap");
  const std::string mode = get_string(c, "f");
  std::optional<CoefficientField> f;
  if (mode == "adversarial") {
    // cancels eps/n^2 on a random half of the positions
    const int J_max = std::min(get_int(c, "J_max"), kMaxDenseScale);
    const auto seq = divergence_sequence(law, DivergenceVariant::Strengthened, opt.n_max);
    const auto signs = RandomLaw::parse("rademacher");
    f = CoefficientField::zeros(J_max);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const int j = seq[i];
      if (j > J_max) break;
      const double inv = 1.0 / static_cast<double>((i + 1) * (i + 1));
      for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
        if (draw(signs, seed, {Stream::Adversary, j, k}) > 0) {
          f->set(j, k, -draw(signs, seed, {Stream::Sign, j, k}) * inv);
        }
      }
    }
  } else {
    require(mode == "zero", ErrorKind::InvalidParameter, "f must be 'zero' or 'adversarial'");
  }
  const auto rec = prevalence_process(f ? &*f : nullptr, law, seed, opt);
  ctx.write("prevalence.json", [&](std::ostream& os) { os << prevalence_json(rec) << '\n'; });
  ctx.write_csv("prevalence.csv", "n,j_n,blocks,witnesses,exceedances,chi_exceedances,complete",
                [&](std::ostream& os) {
                  for (const auto& s : rec.scales) {
                    Row r;
                    r << s.n << s.j << s.blocks << s.witnesses << s.exceedances << s.chi_exceedances
                      << (s.complete ? 1 : 0);
                    emit(os, r);
                  }
                });
  ctx.summary["scales_with_exceedance"] = rec.scales_with_exceedance;
}

void run_prop43(Context& ctx) {
  const auto& c = ctx.cfg;
  const int R = get_int(c, "R"), J1 = get_int(c, "J1"), J2 = get_int(c, "J2"), trials = get_int(c, "trials");
  const double a = get_double(c, "decay_power");
  const auto seed = get_seed(c);
  const auto table = table_from(c);
  require(J1 < J2, ErrorKind::InvalidParameter, "J1 must be below J2");

  RateDescriptor rate;
  rate.a = a;
  const auto env = ScaleEnvelope::from_rate(rate, J2);
  const auto verdict = check_criterion(env, CriterionKind::SqrtJ);
  double bound = 0.0;
  for (int j = J1 + 1; j <= J2; ++j) bound += std::sqrt(2.0 * j) * env.values[static_cast<std::size_t>(j)];
  bound *= table.overlap_count() * table.sup_norm;
  auto field = CoefficientField::zeros(J2);
  for (int j = 0; j <= J2; ++j) {
    auto& lvl = field.levels[static_cast<std::size_t>(j)];
    std::fill(lvl.begin(), lvl.end(), env.values[static_cast<std::size_t>(j)]);
  }
  const auto gauss = RandomLaw::parse("gaussian");
  int within = 0;
  ctx.write_csv("positive.csv", "trial,sup_difference,bound", [&](std::ostream& os) {
    for (int t = 0; t < trials; ++t) {
      const auto p = synthesize_partials(randomize(field, gauss, seed + static_cast<std::uint64_t>(t)), table,
                                         {J1, J2}, R, "sqrtj_field");
      const double d = max_abs_diff(p[0], p[1]);
      within += d <= bound;
      Row r;
      r << t << d << bound;
      emit(os, r);
    }
  });

  const auto tree_env = ScaleEnvelope::from_rate(parse_rate(get_string(c, "tree_rate")), kMaxDenseScale);
  const auto tree_scales = get_int_list(c, "tree_scales");
  require(!tree_scales.empty(), ErrorKind::InvalidParameter, "tree_scales must not be empty");
  const int tree_J = tree_scales.back();
  const auto tree = antimarpis_field(tree_env, table, tree_scales, tree_J);
  ctx.write_csv("tree.csv", "depth,j,k,sign,parent,lo,hi", [&](std::ostream& os) {
    for (std::size_t d = 0; d < tree.levels.size(); ++d)
      for (const auto& node : tree.levels[d]) {
        Row r;
        r << d << node.j << node.k << (node.positive ? "+" : "-") << node.parent << node.interval.lo
          << node.interval.hi;
        emit(os, r);
      }
  });
  std::vector<int> J_list(static_cast<std::size_t>(tree_J + 1));
  std::iota(J_list.begin(), J_list.end(), 0);
  const auto prof = sup_growth(tree.field, table, gauss, seed, J_list, get_int(c, "depth"), R);
  ctx.write("tree_profile.csv", [&](std::ostream& os) { write_profile_csv(prof, os, ctx.header()); });

  const auto rows = gaussian_max_check(get_int(c, "gauss_j_lo"), get_int(c, "gauss_j_hi"),
                                       get_int(c, "gauss_trials"), seed);
  ctx.write_csv("gaussian_max.csv", "j,trials,exceedances,rate,union_bound", [&](std::ostream& os) {
    for (const auto& g : rows) {
      Row r;
      r << g.j << g.trials << g.exceedances << g.rate << g.union_bound;
      emit(os, r);
    }
  });
  ctx.summary["sqrtj_verdict"] = to_string(verdict.verdict);
  ctx.summary["positive_trials_within_bound"] = within;
  ctx.summary["tree_leaves"] = tree.levels.back().size();
}

void run_prop46(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto table = table_from(c);
  const int n_max = get_int(c, "n_max"), J_max = get_int(c, "J_max");
  const auto rate = prop46_rate();
  const auto env = ScaleEnvelope::from_rate(rate, get_int(c, "criteria_J"));
  ctx.write_csv("criteria.csv", "criterion,verdict,rule", [&](std::ostream& os) {
    for (auto kind : {CriterionKind::L1, CriterionKind::SqrtJ, CriterionKind::LogLog, CriterionKind::C0}) {
      const auto d = check_criterion(env, kind);
      Row r;
      r << to_string(kind) << to_string(d.verdict) << ('"' + d.rule + '"');
      emit(os, r);
    }
  });
  const auto field = prop46_field(table, n_max, J_max);
  const auto fenv = scale_envelope(field);
  ctx.write_csv("envelope.csv", "j,omega_j", [&](std::ostream& os) {
    for (std::size_t j = 0; j < fenv.values.size(); ++j) {
      Row r;
      r << j << fenv.values[j];
      emit(os, r);
    }
  });
  ctx.summary["multiplier"] = prop46_multiplier();
  ctx.summary["spacing_k0"] = prop46_spacing(table);
}

void run_modulus(Context& ctx) {
  const auto& c = ctx.cfg;
  const int R = get_int(c, "R"), J = get_int(c, "J"), seeds = get_int(c, "seeds");
  const int m_lo = get_int(c, "m_lo"), m_hi = get_int(c, "m_hi");
  const double alpha = get_double(c, "alpha"), gamma = get_double(c, "gamma");
  const auto seed = get_seed(c);
  const auto law = RandomLaw::parse(get_string(c, "law"));
  const auto table = table_from(c);
  auto field = CoefficientField::zeros(J);
  for (int j = 0; j <= J; ++j) {
    auto& lvl = field.levels[static_cast<std::size_t>(j)];
    std::fill(lvl.begin(), lvl.end(), std::exp2(-alpha * j));
  }
  std::vector<double> spreads;
  int increasing = 0;
  ctx.write_csv("modulus.csv", "seed,m,h,sup_increment,theta_log,ratio_log,theta_plain,ratio_plain",
                [&](std::ostream& os) {
                  for (int s = 0; s < seeds; ++s) {
                    const auto sd = seed + static_cast<std::uint64_t>(s);
                    const auto path = randomized_synthesize(field, table, law, sd, J, R, "power_field");
                    const auto with_log = modulus_ratio(path, {alpha, gamma}, m_lo, m_hi);
                    const auto plain = modulus_ratio(path, {alpha, 0.0}, m_lo, m_hi);
                    spreads.push_back(with_log.spread());
                    increasing += plain.strictly_increasing();
                    for (std::size_t i = 0; i < with_log.m.size(); ++i) {
                      Row r;
                      r << sd << with_log.m[i] << with_log.lags[i] << with_log.sup_increments[i]
                        << with_log.theta_values[i] << with_log.ratios[i] << plain.theta_values[i]
                        << plain.ratios[i];
                      emit(os, r);
                    }
                  }
                });
  ctx.write_csv("regular_modulus.csv", "alpha,kappa,N,regular,first_holds,second_holds", [&](std::ostream& os) {
    const double kappa = gamma > 0 ? 1.0 / gamma : 0.0;
    for (const auto& th : {PowerLogModulus{alpha, 0.0}, PowerLogModulus{alpha, kappa}, PowerLogModulus{0.0, 0.0}}) {
      const auto res = regular_modulus_check(th, 1, 10);
      Row r;
      r << th.alpha << th.kappa << 1 << res.regular << res.first_holds << res.second_holds;
      emit(os, r);
    }
  });
  ctx.summary["median_spread"] = median(spreads);
  ctx.summary["plain_ratio_increasing_seeds"] = increasing;
}

void run_hmin(Context& ctx) {
  const auto& c = ctx.cfg;
  const double alpha = get_double(c, "alpha");
  const int seeds = get_int(c, "seeds"), j_lo = get_int(c, "j_lo"), j_hi = get_int(c, "j_hi");
  const auto seed = get_seed(c);
  const auto law = RandomLaw::parse(get_string(c, "law"));
  const auto rad = RandomLaw::parse("rademacher");
  RateDescriptor det_rate;
  det_rate.s = alpha;
  det_rate.j_min = 0;
  const double det = hmin_estimate(ScaleEnvelope::from_rate(det_rate, j_hi), j_lo, j_hi);
  std::vector<double> est;
  ctx.write_csv("hmin.csv", "seed,randomized_estimate,rademacher_estimate,deterministic", [&](std::ostream& os) {
    for (int s = 0; s < seeds; ++s) {
      const auto sd = seed + static_cast<std::uint64_t>(s);
      const double e = hmin_estimate(randomized_power_envelope(alpha, law, sd, j_hi), j_lo, j_hi);
      const double r = hmin_estimate(randomized_power_envelope(alpha, rad, sd, j_hi), j_lo, j_hi);
      est.push_back(e);
      Row row;
      row << sd << e << r << det;
      emit(os, row);
    }
  });
  ctx.summary["mean_estimate"] = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
  ctx.summary["deterministic"] = det;
}

void run_wiener(Context& ctx) {
  const auto& c = ctx.cfg;
  const int M = get_int(c, "M"), R = get_int(c, "R"), seeds = get_int(c, "seeds");
  const int m_lo = get_int(c, "m_lo"), m_hi = get_int(c, "m_hi");
  const auto seed = get_seed(c);
  require(seeds >= 1, ErrorKind::InvalidParameter, "seeds must be >= 1");
  require(m_lo >= 1 && m_lo <= m_hi && m_hi < R, ErrorKind::InvalidParameter, "lag range must lie in [1, R)");
  std::vector<double> acc(static_cast<std::size_t>(m_hi - m_lo + 1), 0.0);
  double half_var = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto path = wiener_brownian(M, R, seed + static_cast<std::uint64_t>(s));
    if (s == 0) ctx.write("wiener_path.csv", [&](std::ostream& os) { write_path_csv(path, os, ctx.header()); });
    const std::size_t n = path.size();
    for (int m = m_lo; m <= m_hi; ++m) {
      const std::size_t shift = n >> m;
      double sq = 0.0;
      for (std::size_t i = 0; i + shift < n; ++i) {
        const double d = path.values[i + shift] - path.values[i];
        sq += d * d;
      }
      acc[static_cast<std::size_t>(m - m_lo)] += sq / static_cast<double>(n - shift) * std::ldexp(1.0, m);
    }
    half_var += path.values[n / 2] * path.values[n / 2];
  }
  double mean_ratio = 0.0;
  ctx.write_csv("increments.csv", "m,h,mean_square_increment_over_h", [&](std::ostream& os) {
    for (int m = m_lo; m <= m_hi; ++m) {
      const double v = acc[static_cast<std::size_t>(m - m_lo)] / seeds;
      mean_ratio += v;
      Row r;
      r << m << std::ldexp(1.0, -m) << v;
      emit(os, r);
    }
  });
  std::vector<double> a(2 * static_cast<std::size_t>(M) + 1, 0.0);
  for (int m = 1; m <= M; ++m) {
    a[static_cast<std::size_t>(M + m)] = a[static_cast<std::size_t>(M - m)] = 1.0 / (2.0 * M_PI * m);
  }
  const auto blocks = dyadic_block_energies(a);
  ctx.write_csv("block_energies.csv", "j,s_j", [&](std::ostream& os) {
    for (std::size_t j = 0; j < blocks.s.size(); ++j) {
      Row r;
      r << j << blocks.s[j];
      emit(os, r);
    }
  });
  ctx.summary["mean_increment_ratio"] = mean_ratio / (m_hi - m_lo + 1);
  ctx.summary["variance_at_half"] = half_var / seeds;
  ctx.summary["sawtooth_blocks_decreasing"] = blocks.decreasing;
  ctx.summary["sawtooth_blocks_l1_partial_sum"] = blocks.l1_partial_sum;
}

void run_criteria(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto rate = parse_rate(get_string(c, "rate"));
  const auto env = ScaleEnvelope::from_rate(rate, get_int(c, "J_max"));
  const double gamma = get_double(c, "gamma");
  ctx.write_csv("verdicts.csv", "criterion,verdict,partial_sum,rule", [&](std::ostream& os) {
    for (auto kind : {CriterionKind::Linfty, CriterionKind::C0, CriterionKind::L1, CriterionKind::SqrtJ,
                      CriterionKind::Gamma, CriterionKind::LogLog}) {
      const auto d = check_criterion(env, kind, kind == CriterionKind::Gamma ? std::optional<double>(gamma)
                                                                             : std::nullopt);
      ctx.summary[to_string(kind)] = to_string(d.verdict);
      Row r;
      r << to_string(kind) << to_string(d.verdict) << d.partial_sums.back() << ('"' + d.rule + '"');
      emit(os, r);
    }
  });
}

struct Entry {
  std::function<Config()> defaults;
  std::function<void(Context&)> run;
};

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> reg = [] {
    std::map<std::string, Entry> r;
    auto with = [](Config extra) {
      Config c = common_defaults();
      for (auto it = extra.begin(); it != extra.end(); ++it) c[it.key()] = it.value();
      return c;
    };
    r["figure1"] = {[=] { return with({{"M", 16384}, {"law", "gaussian"}, {"J_lo", 8}, {"J_hi", 16}, {"depth", 6}}); },
                    run_figure1};
    r["prop22"] = {[=] {
                     return with({{"wavelet", "haar"},
                                  {"N", 1},
                                  {"rate", "power:0:-1:0:0"},
                                  {"J", 16},
                                  {"depth", 6},
                                  {"everywhere", false},
                                  {"l1_rate", "geometric:0.5"},
                                  {"l1_J0", 10},
                                  {"l1_trials", 10}});
                   },
                   run_prop22};
    r["prop31"] = {[=] {
                     return with({{"wavelet", "haar"},
                                  {"N", 1},
                                  {"field_law", "heavy_tail:1"},
                                  {"law", "heavy_tail:1"},
                                  {"J_max", 16},
                                  {"n_max", 12},
                                  {"depth", 4}});
                   },
                   run_prop31};
    r["prevalence"] = {[=] {
                         return with({{"law", "heavy_tail:1"}, {"n_max", 10}, {"f", "zero"}, {"J_max", 16}, {"j_cap", 22}});
                       },
                       run_prevalence};
    r["prop43"] = {[=] {
                     return with({{"wavelet", "haar"},
                                  {"N", 1},
                                  {"J1", 12},
                                  {"J2", 16},
                                  {"trials", 20},
                                  {"decay_power", -2.0},
                                  {"tree_rate", "power:0:-1:0:0"},
                                  {"tree_scales", {2, 4, 6, 8}},
                                  {"depth", 6},
                                  {"gauss_j_lo", 10},
                                  {"gauss_j_hi", 14},
                                  {"gauss_trials", 20}});
                   },
                   run_prop43};
    r["prop46"] = {[=] {
                     return with({{"wavelet", "haar"}, {"N", 1}, {"n_max", 1}, {"J_max", 20}, {"criteria_J", 625}});
                   },
                   run_prop46};
    r["modulus"] = {[=] {
                      return with({{"alpha", 0.5},
                                   {"gamma", 2.0},
                                   {"m_lo", 4},
                                   {"m_hi", 12},
                                   {"seeds", 20},
                                   {"J", 16},
                                   {"law", "gaussian"}});
                    },
                    run_modulus};
    r["hmin"] = {[=] {
                   return with({{"alpha", 0.4}, {"seeds", 20}, {"j_lo", 16}, {"j_hi", 24}, {"law", "gaussian"}});
                 },
                 run_hmin};
    r["wiener"] = {[=] { return with({{"M", 16384}, {"seeds", 200}, {"m_lo", 4}, {"m_hi", 10}}); }, run_wiener};
    r["criteria"] = {[=] { return with({{"rate", "loglog-prop46"}, {"gamma", 1.0}, {"J_max", 625}}); },
                     run_criteria};
    return r;
  }();
  return reg;
}

bool same_kind(const Config& a, const Config& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

bool is_experiment(const std::string& name) { return registry().count(name) > 0; }

Config default_config(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string list;
    for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
    fail(ErrorKind::InvalidParameter, "unknown experiment '" + name + "' (known: " + list + ")");
  }
  return it->second.defaults();
}

Config resolve_config(const std::string& name, const std::optional<Config>& file,
                      const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed) {
  Config cfg = default_config(name);
  auto assign = [&](const std::string& key, const Config& value, const std::string& origin) {
    auto it = cfg.find(key);
    require(it != cfg.end(), ErrorKind::InvalidParameter, "unknown config key '" + key + "' (" + origin + ")");
    require(same_kind(*it, value), ErrorKind::InvalidParameter,
            "config key '" + key + "' expects " + std::string(it->type_name()) + ", got " + value.type_name() +
                " (" + origin + ")");
    *it = value;
  };
  if (file) {
    const Config* src = &*file;
    if (file->is_object() && file->contains("config") && file->contains("experiment")) {
      require((*file)["experiment"] == name, ErrorKind::InvalidParameter,
              "manifest belongs to experiment '" + (*file)["experiment"].get<std::string>() + "'");
      src = &(*file)["config"];
    }
    require(src->is_object(), ErrorKind::InvalidParameter, "config file must hold a flat JSON object");
    for (auto it = src->begin(); it != src->end(); ++it) assign(it.key(), it.value(), "config file");
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::InvalidParameter, "override must read key=value: '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    Config value = Config::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    assign(key, value, "--set");
  }
  if (seed) cfg["seed"] = *seed;
  return cfg;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorKind::NumericalFailure,
          "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RateDescriptor parse_rate(const std::string& text) {
  if (text == "loglog-prop46") return prop46_rate();
  std::vector<std::string> parts;
  {
    std::istringstream in(text);
    std::string p;
    while (std::getline(in, p, ':')) parts.push_back(p);
  }
  auto num = [&](std::size_t i) {
    char* end = nullptr;
    const double v = std::strtod(parts[i].c_str(), &end);
    require(!parts[i].empty() && *end == '\0' && std::isfinite(v), ErrorKind::InvalidParameter,
            "bad number in rate '" + text + "'");
    return v;
  };
  RateDescriptor r;
  require(!parts.empty(), ErrorKind::InvalidParameter, "empty rate");
  std::size_t base = 1;
  if (parts[0] == "geometric") {
    require(parts.size() == 2, ErrorKind::InvalidParameter, "rate 'geometric:s' expects one parameter");
    r.s = num(1);
    r.j_min = 0;
    r.validate();
    return r;
  } else if (parts[0] == "sparse") {
    require(parts.size() == 6, ErrorKind::InvalidParameter, "rate 'sparse:q:s:a:b:c' expects five parameters");
    r.support = RateDescriptor::Support::Geometric;
    r.q = static_cast<int>(num(1));
    base = 2;
  } else {
    require(parts[0] == "power" && parts.size() == 5, ErrorKind::InvalidParameter,
            "unknown rate '" + text + "' (use loglog-prop46, geometric:s, power:s:a:b:c, sparse:q:s:a:b:c)");
  }
  r.s = num(base);
  r.a = num(base + 1);
  r.b = num(base + 2);
  r.c = num(base + 3);
  r.j_min = r.c != 0.0 ? 3 : (r.b != 0.0 ? 2 : 1);
  r.validate();
  return r;
}

RunResult run_experiment(const std::string& name, const Config& resolved, const fs::path& out_dir) {
  auto it = registry().find(name);
  require(it != registry().end(), ErrorKind::InvalidParameter, "unknown experiment '" + name + "'");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorKind::InvalidParameter, "cannot create output directory " + out_dir.string());
  Context ctx;
  ctx.name = name;
  ctx.cfg = resolved;
  ctx.digest = sha256_hex(resolved.dump());
  ctx.dir = out_dir;
  const std::string started = utc_now();
  it->second.run(ctx);

  Config manifest;
  manifest["tool"] = "rws-lab";
  manifest["experiment"] = name;
  manifest["config"] = resolved;
  manifest["config_digest"] = ctx.digest;
  manifest["outputs"] = Config::array();
  for (const auto& o : ctx.outputs) manifest["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}});
  manifest["summary"] = ctx.summary;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  require(static_cast<bool>(mf), ErrorKind::InvalidParameter, "failed writing manifest.json");

  return RunResult{name, resolved, ctx.digest, ctx.outputs, ctx.summary};
}

}  // namespace rws::lab
