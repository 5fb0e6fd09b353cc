#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "l1kpca/detect.hpp"
#include "l1kpca/error.hpp"
#include "l1kpca/experiments.hpp"
#include "l1kpca/io.hpp"
#include "l1kpca/kernel.hpp"
#include "l1kpca/l1.hpp"
#include "l1kpca/l2.hpp"
#include "l1kpca/oracle.hpp"
#include "l1kpca/version.hpp"

namespace py = pybind11;
using namespace l1kpca;

namespace {

using DatasetPtr = std::shared_ptr<Dataset>;

py::array_t<std::int8_t> signs_to_numpy(const SignVector& c) {
  py::array_t<std::int8_t> out(static_cast<py::ssize_t>(c.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < c.size(); ++i) view(static_cast<py::ssize_t>(i)) = static_cast<std::int8_t>(c[i]);
  return out;
}

SignVector signs_from_numpy(const py::array_t<double, py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InvalidData("sign vector must be one-dimensional");
  auto view = a.unchecked<1>();
  std::vector<std::int8_t> entries(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const double v = view(i);
    if (v != 1.0 && v != -1.0) throw InvalidData("sign vector entries must be -1 or +1");
    entries[static_cast<std::size_t>(i)] = v > 0 ? 1 : -1;
  }
  return SignVector(std::move(entries));
}

std::shared_ptr<const Dataset> as_const(const DatasetPtr& d) { return d; }

py::object model_to_python(AnyModel model) {
  return std::visit([](auto&& m) -> py::object { return py::cast(std::move(m)); }, std::move(model));
}

}  // namespace

PYBIND11_MODULE(_l1kpca, m) {
  m.doc() = "L1-norm kernel PCA with the sign-vector fixed-point solver.";
  m.attr("__version__") = kVersion;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto invalid = py::register_exception<InvalidData>(m, "InvalidData", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", invalid.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", invalid.ptr());
  py::register_exception<InstanceTooLarge>(m, "InstanceTooLarge", invalid.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", numerical.ptr());
  py::register_exception<DegenerateComponent>(m, "DegenerateComponent", numerical.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", numerical.ptr());

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("linear", KernelFamily::kLinear)
      .value("gaussian", KernelFamily::kGaussian)
      .value("polynomial", KernelFamily::kPolynomial);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("linear", &KernelSpec::linear)
      .def_static("gaussian", &KernelSpec::gaussian, py::arg("sigma"))
      .def_static("polynomial", &KernelSpec::polynomial, py::arg("degree") = 2, py::arg("offset") = 1.0)
      .def_readonly("family", &KernelSpec::family)
      .def_readonly("sigma", &KernelSpec::sigma)
      .def_readonly("degree", &KernelSpec::degree)
      .def_readonly("offset", &KernelSpec::offset)
      .def("__eq__", [](const KernelSpec& a, const KernelSpec& b) { return a == b; })
      .def("__repr__", [](const KernelSpec& s) { return "KernelSpec(" + s.describe() + ")"; });

  py::class_<Dataset, DatasetPtr>(m, "Dataset")
      .def_readonly("values", &Dataset::values)
      .def_readwrite("labels", &Dataset::labels)
      .def_readonly("column_means", &Dataset::column_means)
      .def_readonly("column_stds", &Dataset::column_stds)
      .def_property_readonly("shape", [](const Dataset& d) { return py::make_tuple(d.rows(), d.cols()); });

  m.def("standardize", [](const Eigen::MatrixXd& x) { return std::make_shared<Dataset>(standardize(x)); },
        py::arg("values"), "Zero mean, unit sample std per column; constant columns become zeros.");
  m.def("standardize_like",
        [](const Dataset& train, const Eigen::MatrixXd& x) { return std::make_shared<Dataset>(standardize_like(train, x)); },
        py::arg("train"), py::arg("values"));
  m.def("as_is", [](const Eigen::MatrixXd& x) { return std::make_shared<Dataset>(as_is(x)); }, py::arg("values"));

  py::class_<GramMatrix>(m, "GramMatrix")
      .def(py::init<Eigen::MatrixXd, KernelSpec>(), py::arg("entries"), py::arg("spec") = KernelSpec::linear())
      .def_property_readonly("entries", &GramMatrix::entries)
      .def_property_readonly("spec", &GramMatrix::spec)
      .def_property_readonly("size", &GramMatrix::size)
      .def_property_readonly("max_abs", &GramMatrix::max_abs);

  m.def("kernel_eval", [](const KernelSpec& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return kernel_eval(s, a, b);
  });
  m.def("gram",
        [](const KernelSpec& s, const Dataset& d, unsigned threads) {
          py::gil_scoped_release release;
          return gram(s, d, {.max_samples = 20000, .threads = threads});
        },
        py::arg("spec"), py::arg("data"), py::arg("threads") = 0);
  m.def("cross_gram",
        [](const KernelSpec& s, const Dataset& train, const Dataset& query) { return cross_gram(s, train, query); },
        py::arg("spec"), py::arg("train"), py::arg("query"));

  py::enum_<Termination>(m, "Termination")
      .value("sign_fixed", Termination::kSignFixed)
      .value("quadratic_form_zero", Termination::kQuadraticFormZero)
      .value("max_iter", Termination::kMaxIter);

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("iterations", &ConvergenceReport::iterations)
      .def_readonly("norm_trace", &ConvergenceReport::norm_trace)
      .def_readonly("terminated_by", &ConvergenceReport::terminated_by)
      .def_readonly("rate_estimates", &ConvergenceReport::rate_estimates)
      .def_readonly("lagrange_multiplier", &ConvergenceReport::lagrange_multiplier)
      .def_readonly("zero_band_hits", &ConvergenceReport::zero_band_hits);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tol_zero", &SolverOptions::tol_zero)
      .def_readwrite("eps_term", &SolverOptions::eps_term)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("starts", &SolverOptions::starts)
      .def_readwrite("seed", &SolverOptions::seed)
      .def_readwrite("threads", &SolverOptions::threads)
      .def_readwrite("keep_kernel_chain", &SolverOptions::keep_kernel_chain);

  py::class_<ComponentModel>(m, "ComponentModel")
      .def_property_readonly("sign_vector", [](const ComponentModel& c) { return signs_to_numpy(c.sign_vector); })
      .def_readonly("objective", &ComponentModel::objective)
      .def_readonly("report", &ComponentModel::report)
      .def_readonly("train_scores", &ComponentModel::train_scores);

  py::class_<KpcaModel>(m, "KpcaModel")
      .def_readonly("components", &KpcaModel::components)
      .def_readonly("spec", &KpcaModel::spec)
      .def_property_readonly("num_components", &KpcaModel::num_components)
      .def_property_readonly("kernel_chain",
                             [](const KpcaModel& model) {
                               std::vector<Eigen::MatrixXd> out;
                               for (const auto& k : model.kernel_chain) out.push_back(k.entries());
                               return out;
                             })
      .def("scores", &score_matrix, "Training scores, n x p.")
      .def("transform",
           [](const KpcaModel& model, const Dataset& query) {
             py::gil_scoped_release release;
             return transform(model, query);
           },
           py::arg("query"), "Scores of query rows; standardize them with the training statistics first.")
      .def("rebuild_kernel_chain", [](KpcaModel& model) { rebuild_kernel_chain(model); });

  m.def("sign_update",
        [](const GramMatrix& k, const py::array_t<double, py::array::forcecast>& c, double tol) {
          return signs_to_numpy(sign_update(k, signs_from_numpy(c), tol));
        },
        py::arg("k"), py::arg("c"), py::arg("tol_zero"));
  m.def("fit_component",
        [](const GramMatrix& k, const py::array_t<double, py::array::forcecast>& start, const SolverOptions& o) {
          return fit_component(k, signs_from_numpy(start), o);
        },
        py::arg("k"), py::arg("start"), py::arg("options") = SolverOptions{});
  m.def("fit",
        [](const GramMatrix& k, std::size_t p, const SolverOptions& o, const DatasetPtr& train) {
          py::gil_scoped_release release;
          return fit(k, p, o, as_const(train));
        },
        py::arg("k"), py::arg("components"), py::arg("options") = SolverOptions{}, py::arg("train") = nullptr);
  m.def("fit_up_to",
        [](const GramMatrix& k, std::size_t p, const SolverOptions& o, const DatasetPtr& train) {
          py::gil_scoped_release release;
          return fit_up_to(k, p, o, as_const(train));
        },
        py::arg("k"), py::arg("max_components"), py::arg("options") = SolverOptions{}, py::arg("train") = nullptr);
  m.def("deflate",
        [](const GramMatrix& k, const py::array_t<double, py::array::forcecast>& c) {
          return deflate(k, signs_from_numpy(c));
        },
        py::arg("k"), py::arg("c"));

  py::class_<EigenModel>(m, "EigenModel")
      .def_readonly("eigenvalues", &EigenModel::eigenvalues)
      .def_readonly("vectors", &EigenModel::vectors)
      .def_readonly("spec", &EigenModel::spec)
      .def_property_readonly("effective_rank", &effective_rank);
  m.def("l2_fit",
        [](const GramMatrix& k, Eigen::Index p, const DatasetPtr& train) { return l2_fit(k, p, as_const(train)); },
        py::arg("k"), py::arg("components"), py::arg("train") = nullptr);
  m.def("l2_scores", &l2_scores, py::arg("model"), py::arg("gram_or_cross"));

  py::class_<OracleResult>(m, "OracleResult")
      .def_property_readonly("best_sign", [](const OracleResult& r) { return signs_to_numpy(r.best_sign); })
      .def_readonly("best_objective", &OracleResult::best_objective)
      .def_readonly("objective_histogram", &OracleResult::objective_histogram);
  m.def("enumerate", &enumerate, py::arg("k"), py::arg("limit") = 20, py::arg("keep_histogram") = false);
  m.def("maxcut_objective",
        [](const GramMatrix& k, const py::array_t<double, py::array::forcecast>& c) {
          return maxcut_objective(k, signs_from_numpy(c));
        });

  py::class_<DetectionModel>(m, "DetectionModel")
      .def_readonly("scores", &DetectionModel::scores)
      .def_readonly("variances", &DetectionModel::variances)
      .def_readonly("alpha", &DetectionModel::alpha)
      .def_readonly("retained", &DetectionModel::retained)
      .def_readwrite("threshold", &DetectionModel::threshold)
      .def("outlier_scores", &outlier_scores);
  m.def("build_detector", py::overload_cast<const Eigen::MatrixXd&>(&build_detector), py::arg("scores"));
  m.def("build_detector", py::overload_cast<const KpcaModel&>(&build_detector), py::arg("model"));
  m.def("build_detector", py::overload_cast<const EigenModel&, const GramMatrix&>(&build_detector),
        py::arg("model"), py::arg("k"));
  m.def("select_alpha", [](const std::vector<double>& v) { return select_alpha(v); });
  m.def("classify", &classify, py::arg("scores"), py::arg("threshold"));
  m.def("pr_auc",
        [](const Eigen::VectorXd& scores, const std::vector<int>& labels) {
          const PRCurve c = pr_auc(scores, labels);
          py::list points;
          for (const auto& p : c.points) points.append(py::make_tuple(p.cutoff, p.recall, p.precision));
          return py::make_tuple(c.auc, points);
        },
        py::arg("scores"), py::arg("labels"), "Returns (average precision, [(cutoff, recall, precision)]).");

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n", &SynthConfig::n)
      .def_readwrite("d", &SynthConfig::d)
      .def_readwrite("rank", &SynthConfig::rank)
      .def_readwrite("r_percent", &SynthConfig::r_percent)
      .def_readwrite("noise_scale", &SynthConfig::noise_scale)
      .def_readwrite("dense_noise_std", &SynthConfig::dense_noise_std)
      .def_readwrite("seed", &SynthConfig::seed);
  py::class_<SynthData>(m, "SynthData")
      .def_readonly("noisy_raw", &SynthData::noisy_raw)
      .def_readonly("normal_raw", &SynthData::normal_raw)
      .def_property_readonly("noisy", [](const SynthData& s) { return std::make_shared<Dataset>(s.noisy); })
      .def_property_readonly("normal", [](const SynthData& s) { return std::make_shared<Dataset>(s.normal); })
      .def_readonly("outlier_mask", &SynthData::outlier_mask)
      .def_readonly("corrupted_rows", &SynthData::corrupted_rows);
  m.def("synth_generate", &synth_generate, py::arg("config"));
  m.def("total_explained_variation",
        py::overload_cast<const GramMatrix&, const KpcaModel&, const Dataset&>(&total_explained_variation),
        py::arg("k_normal"), py::arg("model"), py::arg("normal"));
  m.def("total_explained_variation",
        py::overload_cast<const GramMatrix&, const EigenModel&, const Dataset&>(&total_explained_variation),
        py::arg("k_normal"), py::arg("model"), py::arg("normal"));

  m.def("serialize_model", py::overload_cast<const KpcaModel&>(&serialize_model));
  m.def("serialize_model", py::overload_cast<const EigenModel&>(&serialize_model));
  m.def("serialize_model", py::overload_cast<const DetectionModel&>(&serialize_model));
  m.def("deserialize_model", [](const std::string& text) { return model_to_python(deserialize_model(text)); });
  m.def("read_model", [](const std::filesystem::path& p) { return model_to_python(read_model(p)); });
}
