#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "quantrack/bench.hpp"
#include "quantrack/detect.hpp"
#include "quantrack/error.hpp"
#include "quantrack/estimators.hpp"
#include "quantrack/joint.hpp"
#include "quantrack/streams.hpp"

namespace py = pybind11;
using namespace quantrack;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

StreamConfig make_stream(const std::string& family, const std::string& variant, double a,
                         double b, std::int64_t period, std::uint64_t seed) {
  StreamConfig c;
  c.family = parse_family(family);
  c.variant = parse_variant(variant);
  c.a = a;
  c.b = b;
  c.period = period;
  c.seed = seed;
  c.validate();
  return c;
}

std::vector<double> to_vector(const Array& values) {
  if (values.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return {values.data(), values.data() + values.size()};
}

Array to_array(std::span<const double> values) {
  Array out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::dict score_dict(const ScoreReport& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["mean_delay"] = r.mean_delay;
  d["detections"] = r.detections;
  d["correct"] = r.correct;
  d["true_changes"] = r.true_changes;
  return d;
}

class PyTracker {
 public:
  PyTracker(const std::string& kind, std::vector<double> probs, const Array& init, double lambda,
            double gamma, double rho_ratio, double offset)
      : grid_(std::move(probs)) {
    TrackerParams p;
    p.lambda = lambda;
    p.gamma = gamma;
    p.rho_ratio = rho_ratio;
    p.offset = offset;
    const auto samples = to_vector(init);
    tracker_ = warmup_init(samples, grid_, parse_tracker_kind(kind), p);
  }

  Array step(double x) { return to_array(tracker_->step(x)); }

  Array track(const Array& xs) {
    const auto values = to_vector(xs);
    const auto K = static_cast<py::ssize_t>(grid_.size());
    Array out({static_cast<py::ssize_t>(values.size()), K});
    double* row = out.mutable_data();
    for (double x : values) {
      const auto est = tracker_->step(x);
      std::copy(est.begin(), est.end(), row);
      row += K;
    }
    return out;
  }

  Array estimates() const { return to_array(tracker_->estimates()); }
  std::vector<double> probs() const {
    return {grid_.probs().begin(), grid_.probs().end()};
  }

 private:
  QuantileGrid grid_;
  std::unique_ptr<JointTracker> tracker_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Streaming multi-quantile tracking and change detection";

  py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<Dumiqe>(m, "Dumiqe")
      .def(py::init<double, double, double>(), py::arg("q"), py::arg("lam"),
           py::arg("initial"))
      .def("update", &Dumiqe::update, py::arg("x"))
      .def_property_readonly("estimate", &Dumiqe::estimate);

  py::class_<Qewa>(m, "Qewa")
      .def(py::init<double, double, double, double, double, double>(), py::arg("q"),
           py::arg("lam"), py::arg("rho"), py::arg("initial"), py::arg("mu_minus"),
           py::arg("mu_plus"))
      .def("update", &Qewa::update, py::arg("x"))
      .def_property_readonly("estimate", &Qewa::estimate)
      .def_property_readonly("weight", &Qewa::weight)
      .def_property_readonly("mu_minus", &Qewa::mu_minus)
      .def_property_readonly("mu_plus", &Qewa::mu_plus);

  py::class_<PyTracker>(m, "Tracker", R"pbdoc(
        Joint quantile tracker ("shiftq", "condq", "mdumiqe" or "parallel")
        initialised from the quantiles of `init`.
    )pbdoc")
      .def(py::init<const std::string&, std::vector<double>, const Array&, double, double,
                    double, double>(),
           py::arg("kind"), py::arg("probs"), py::arg("init"), py::arg("lam") = 0.01,
           py::arg("gamma") = 0.01, py::arg("rho_ratio") = 0.01, py::arg("offset") = 0.0)
      .def("step", &PyTracker::step, py::arg("x"))
      .def("track", &PyTracker::track, py::arg("xs"),
           "Steps through `xs` and returns one row of estimates per sample.")
      .def_property_readonly("estimates", &PyTracker::estimates)
      .def_property_readonly("probs", &PyTracker::probs);

  m.def(
      "generate",
      [](std::int64_t count, const std::string& family, const std::string& variant, double a,
         double b, std::int64_t period, std::uint64_t seed) {
        StreamGenerator g(make_stream(family, variant, a, b, period, seed));
        Array out(static_cast<py::ssize_t>(count));
        double* p = out.mutable_data();
        for (std::int64_t i = 0; i < count; ++i) p[i] = g.next();
        return out;
      },
      py::arg("count"), py::arg("family") = "normal", py::arg("variant") = "periodic",
      py::arg("a") = 2.0, py::arg("b") = 6.0, py::arg("T") = 100, py::arg("seed") = 1);

  m.def(
      "true_quantile",
      [](std::int64_t n, double q, const std::string& family, const std::string& variant,
         double a, double b, std::int64_t period) {
        return TrueQuantileOracle(make_stream(family, variant, a, b, period, 1)).quantile(n, q);
      },
      py::arg("n"), py::arg("q"), py::arg("family") = "normal", py::arg("variant") = "periodic",
      py::arg("a") = 2.0, py::arg("b") = 6.0, py::arg("T") = 100);

  m.def("log_lambda_grid", &log_lambda_grid, py::arg("lo") = 1e-3, py::arg("hi") = 0.5,
        py::arg("per_decade") = 20);

  m.def(
      "sweep",
      [](const std::string& tracker, std::vector<double> probs, std::vector<double> lambdas,
         const std::string& family, const std::string& variant, std::int64_t period,
         std::uint64_t seed, double gamma, std::int64_t samples, std::int64_t warmup,
         unsigned threads) {
        ExperimentSpec spec;
        spec.stream = make_stream(family, variant, 2.0, 6.0, period, seed);
        spec.tracker = parse_tracker_kind(tracker);
        spec.grid = QuantileGrid(std::move(probs));
        spec.lambdas = std::move(lambdas);
        spec.gamma = gamma;
        spec.samples = samples;
        spec.warmup = warmup;
        spec.threads = threads;
        RmseReport report;
        {
          py::gil_scoped_release release;
          report = sweep(spec);
        }
        py::list rows;
        for (const auto& e : report.entries) {
          rows.append(py::make_tuple(e.lambda, e.rmse, e.violations));
        }
        return rows;
      },
      py::arg("tracker"), py::arg("probs"), py::arg("lambdas"), py::arg("family") = "normal",
      py::arg("variant") = "periodic", py::arg("T") = 100, py::arg("seed") = 1,
      py::arg("gamma") = 0.01, py::arg("samples") = 1'000'000, py::arg("warmup") = 10'000,
      py::arg("threads") = 0,
      "Optimal-step study: a list of (lambda, rmse, violations) tuples.");

  m.def(
      "detect",
      [](const Array& samples, const Array& times, const std::string& method, double lambda,
         double gamma, double nu, double xi, double horizon, double eta, double rate) {
        if (samples.ndim() != 2 || samples.shape(1) != static_cast<py::ssize_t>(kAxes)) {
          throw py::value_error("samples must have shape (n, 3)");
        }
        std::vector<AxisSample> rows(static_cast<std::size_t>(samples.shape(0)));
        const double* p = samples.data();
        for (auto& r : rows) {
          std::copy(p, p + kAxes, r.begin());
          p += kAxes;
        }
        DetectorConfig c;
        c.method = parse_detector_method(method);
        c.lambda = lambda;
        c.gamma = gamma;
        c.nu = nu;
        c.xi = xi;
        c.horizon = horizon;
        c.eta = eta;
        c.sample_rate = rate;
        const auto t = to_vector(times);
        py::list out;
        for (const auto& d : run_detector(c, rows, t)) {
          py::dict e;
          e["index"] = d.index;
          e["time"] = d.time;
          e["dimension"] = d.dimension;
          e["statistic"] = d.statistic;
          e["score"] = d.score;
          out.append(e);
        }
        return out;
      },
      py::arg("samples"), py::arg("times"), py::arg("method") = "ed-condq",
      py::arg("lam") = 0.01, py::arg("gamma") = 0.1, py::arg("nu") = 0.01, py::arg("xi") = 0.05,
      py::arg("horizon") = 10.0, py::arg("eta") = 25.0, py::arg("rate") = 20.0);

  m.def(
      "score",
      [](std::vector<double> detections, std::vector<double> truth, double tolerance) {
        return score_dict(score(detections, truth, tolerance));
      },
      py::arg("detections"), py::arg("truth"),
      py::arg("tolerance") = std::numeric_limits<double>::infinity());
}
