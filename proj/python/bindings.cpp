#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rws/coefficients.hpp"
#include "rws/constructions.hpp"
#include "rws/error.hpp"
#include "rws/estimators.hpp"
#include "rws/experiments.hpp"
#include "rws/random_laws.hpp"
#include "rws/synthesis.hpp"
#include "rws/wavelet.hpp"

namespace py = pybind11;
using namespace rws;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  require(a.ndim() == 1, ErrorKind::InvalidParameter, "expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

SamplePath path_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  SamplePath p;
  p.values = from_array(a);
  int R = 0;
  while ((std::size_t{1} << R) < p.values.size()) ++R;
  require((std::size_t{1} << R) == p.values.size(), ErrorKind::InvalidParameter,
          "path length must be a power of two");
  p.resolution = R;
  return p;
}

Stream parse_stream(const std::string& name) {
  if (name == "coefficient") return Stream::Coefficient;
  if (name == "sign") return Stream::Sign;
  if (name == "fourier") return Stream::Fourier;
  if (name == "trial") return Stream::Trial;
  if (name == "adversary") return Stream::Adversary;
  fail(ErrorKind::InvalidParameter, "unknown stream '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_rwslab, m) {
  m.doc() = "Random wavelet series numerical lab";

  static py::exception<Error> error(m, "RwsError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<MotherWaveletTable>(m, "Table")
      .def_readonly("refinement", &MotherWaveletTable::refinement)
      .def_readonly("support", &MotherWaveletTable::support)
      .def_readonly("sup_norm", &MotherWaveletTable::sup_norm)
      .def_readonly("positivity_floor", &MotherWaveletTable::positivity_floor)
      .def_property_readonly("positivity", [](const MotherWaveletTable& t) {
        return py::make_tuple(t.positivity.lo, t.positivity.hi);
      })
      .def_property_readonly("phi", [](const MotherWaveletTable& t) { return to_array(t.phi); })
      .def_property_readonly("psi", [](const MotherWaveletTable& t) { return to_array(t.psi); })
      .def_property_readonly("taps", [](const MotherWaveletTable& t) { return to_array(t.filter.taps); })
      .def("psi_at", &MotherWaveletTable::psi_at, py::arg("u"))
      .def("psi_at_level", [](const MotherWaveletTable& t, int level) { return to_array(t.psi_at_level(level)); },
           py::arg("level"))
      .def("translate_abs_sum", &MotherWaveletTable::translate_abs_sum);

  m.def(
      "cascade",
      [](const std::string& family, int N, int refinement) {
        return cascade_evaluate(build_filter(parse_family(family), N), refinement);
      },
      py::arg("family") = "daubechies", py::arg("N") = 10, py::arg("refinement") = 12,
      "Mother wavelet table by the cascade algorithm.");

  py::class_<CoefficientField>(m, "Field")
      .def(py::init([](int J_max) { return CoefficientField::zeros(J_max); }), py::arg("J_max"))
      .def_readonly("J_max", &CoefficientField::J_max)
      .def_readwrite("coarse", &CoefficientField::coarse)
      .def("at", &CoefficientField::at, py::arg("j"), py::arg("k"))
      .def("set", &CoefficientField::set, py::arg("j"), py::arg("k"), py::arg("value"))
      .def("level", [](const CoefficientField& f, int j) {
        require(j >= 0 && j <= f.J_max, ErrorKind::InvalidParameter, "scale out of range");
        return to_array(f.levels[static_cast<std::size_t>(j)]);
      })
      .def("envelope", [](const CoefficientField& f) { return to_array(scale_envelope(f).values); });

  m.def(
      "power_field",
      [](double alpha, int J_max) {
        auto f = CoefficientField::zeros(J_max);
        for (int j = 0; j <= J_max; ++j) {
          auto& lvl = f.levels[static_cast<std::size_t>(j)];
          std::fill(lvl.begin(), lvl.end(), std::exp2(-alpha * j));
        }
        return f;
      },
      py::arg("alpha"), py::arg("J_max"), "c_{j,k} = 2^{-alpha j} at every k.");
  m.def(
      "step_coefficients",
      [](const MotherWaveletTable& t, const std::string& kind, int J_max) {
        return step_function_coefficients(t, parse_step_kind(kind), J_max);
      },
      py::arg("table"), py::arg("kind"), py::arg("J_max"));
  m.def(
      "randomize", [](const CoefficientField& f, const std::string& law, std::uint64_t seed) {
        return randomize(f, RandomLaw::parse(law), seed);
      },
      py::arg("field"), py::arg("law"), py::arg("seed"));

  m.def(
      "synthesize",
      [](const CoefficientField& f, const MotherWaveletTable& t, int J, int R) {
        std::vector<double> values;
        {
          py::gil_scoped_release release;
          values = synthesize(f, t, J, R).values;
        }
        return to_array(values);
      },
      py::arg("field"), py::arg("table"), py::arg("J"), py::arg("R"));
  m.def(
      "analyze",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values, const MotherWaveletTable& t,
         int J) { return analyze(path_from(values), t, J); },
      py::arg("values"), py::arg("table"), py::arg("J"));
  m.def(
      "fourier_sawtooth", [](int M, int R) { return to_array(fourier_sawtooth(M, R).values); }, py::arg("M"),
      py::arg("R"));
  m.def(
      "wiener_brownian",
      [](int M, int R, std::uint64_t seed) { return to_array(wiener_brownian(M, R, seed).values); }, py::arg("M"),
      py::arg("R"), py::arg("seed"));

  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def(
      "draw",
      [](const std::string& law, std::uint64_t seed, const std::string& stream, std::int64_t j, std::int64_t k) {
        return draw(RandomLaw::parse(law), seed, {parse_stream(stream), j, k});
      },
      py::arg("law"), py::arg("seed"), py::arg("stream") = "coefficient", py::arg("j") = 0, py::arg("k") = 0);
  m.def(
      "tail_probability", [](const std::string& law, double x) { return tail_probability(RandomLaw::parse(law), x); },
      py::arg("law"), py::arg("x"));
  m.def(
      "divergence_sequence",
      [](const std::string& law, bool strengthened, int n_max) {
        return divergence_sequence(RandomLaw::parse(law),
                                   strengthened ? DivergenceVariant::Strengthened : DivergenceVariant::Plain, n_max);
      },
      py::arg("law"), py::arg("strengthened") = false, py::arg("n_max") = 10);

  m.def(
      "check_criterion",
      [](const std::string& rate, int J_max, const std::string& kind, std::optional<double> gamma) {
        const auto d = check_criterion(ScaleEnvelope::from_rate(lab::parse_rate(rate), J_max), parse_criterion(kind),
                                       gamma);
        return py::make_tuple(to_string(d.verdict), d.rule);
      },
      py::arg("rate"), py::arg("J_max"), py::arg("kind"), py::arg("gamma") = py::none(),
      "(verdict, rule) for a symbolic rate.");
  m.def(
      "hmin_estimate",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& envelope, int j_lo, int j_hi) {
        ScaleEnvelope env;
        env.values = from_array(envelope);
        return hmin_estimate(env, j_lo, j_hi);
      },
      py::arg("envelope"), py::arg("j_lo"), py::arg("j_hi"));
  m.def("prop46_multiplier", &prop46_multiplier);

  m.def("experiment_names", &lab::experiment_names);
  m.def(
      "default_config_json", [](const std::string& name) { return lab::default_config(name).dump(); },
      py::arg("name"));
  m.def(
      "run_experiment_json",
      [](const std::string& name, const std::vector<std::string>& overrides, const std::string& out_dir,
         std::optional<std::uint64_t> seed) {
        const auto cfg = lab::resolve_config(name, std::nullopt, overrides, seed);
        lab::RunResult r;
        {
          py::gil_scoped_release release;
          r = lab::run_experiment(name, cfg, out_dir);
        }
        nlohmann::json j;
        j["experiment"] = r.experiment;
        j["config"] = r.config;
        j["config_digest"] = r.config_digest;
        j["outputs"] = nlohmann::json::array();
        for (const auto& o : r.outputs) j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}});
        j["summary"] = r.summary;
        return j.dump();
      },
      py::arg("name"), py::arg("overrides"), py::arg("out_dir"), py::arg("seed") = py::none());
}
