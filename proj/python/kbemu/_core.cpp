#include <memory>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kbemu/design.hpp"
#include "kbemu/diagnostics.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/errors.hpp"
#include "kbemu/io.hpp"
#include "kbemu/kernel.hpp"
#include "kbemu/models.hpp"
#include "kbemu/study.hpp"

namespace py = pybind11;
using namespace kbemu;

namespace {

Box make_box(const std::optional<Eigen::VectorXd>& lower, const std::optional<Eigen::VectorXd>& upper,
             std::size_t dim) {
  if (!lower && !upper) return Box::unit(dim);
  if (!lower || !upper) throw InvalidParameter("give both lower and upper, or neither");
  Box b{*lower, *upper};
  b.validate();
  return b;
}

Design as_design(const Eigen::MatrixXd& points, const Box& box) {
  Design d;
  d.points = points;
  d.box = box;
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayes-linear emulators that use known simulator boundaries";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto invalid = py::register_exception<InvalidParameter>(m, "InvalidParameter", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", invalid.ptr());
  py::register_exception<DomainError>(m, "DomainError", invalid.ptr());
  py::register_exception<MisuseError>(m, "MisuseError", invalid.ptr());
  py::register_exception<DegenerateConfiguration>(m, "DegenerateConfiguration", invalid.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", invalid.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<ConditioningError>(m, "ConditioningError", numerical.ptr());
  py::register_exception<NumericalConsistencyError>(m, "NumericalConsistencyError",
                                                    numerical.ptr());
  py::register_exception<EmulatorInconsistency>(m, "EmulatorInconsistency", numerical.ptr());
  py::register_exception<ModelEvaluationError>(m, "ModelEvaluationError", numerical.ptr());
  py::register_exception<StiffnessError>(m, "StiffnessError", numerical.ptr());

  m.attr("DEFAULT_JITTER") = kDefaultJitter;

  // kernel
  m.def("corr_1d", [](double a, double theta) { return corr_1d(a, theta); }, py::arg("a"),
        py::arg("theta"));
  m.def(
      "updated_corr_component",
      [](double a, double a2, double theta) { return updated_corr_component(a, a2, theta); },
      py::arg("a"), py::arg("a2"), py::arg("theta"));
  m.def("warp_integral", [](double a, double theta) { return warp_integral(a, theta); },
        py::arg("a"), py::arg("theta"));

  py::class_<PriorSpec>(m, "Prior")
      .def(py::init([](double beta, double sigma2, std::vector<double> thetas) {
             PriorSpec p{beta, sigma2, KernelSpec::gaussian(std::move(thetas))};
             p.validate();
             return p;
           }),
           py::arg("beta"), py::arg("sigma2"), py::arg("thetas"))
      .def_readonly("beta", &PriorSpec::beta)
      .def_readonly("sigma2", &PriorSpec::sigma2)
      .def_property_readonly("thetas", [](const PriorSpec& p) { return p.kernel.thetas; })
      .def_property_readonly("dim", &PriorSpec::dim);

  py::class_<AxisBoundary>(m, "Boundary")
      .def(py::init<std::size_t, double, BoundaryFunction, std::string>(), py::arg("axis"),
           py::arg("location"), py::arg("evaluator"), py::arg("name") = "")
      .def_property_readonly("axis", &AxisBoundary::axis)
      .def_property_readonly("location", &AxisBoundary::location)
      .def_property_readonly("name", &AxisBoundary::name)
      .def("project", &AxisBoundary::project, py::arg("x"))
      .def("evaluate", &AxisBoundary::evaluate, py::arg("x"));

  py::class_<BoundaryConfig>(m, "BoundaryConfig")
      .def_static("none", &BoundaryConfig::none)
      .def_static("single", &BoundaryConfig::single, py::arg("k"))
      .def_static("perpendicular", &BoundaryConfig::perpendicular, py::arg("k"), py::arg("l"))
      .def_static("parallel", &BoundaryConfig::parallel, py::arg("k"), py::arg("l"))
      .def("swapped", &BoundaryConfig::swapped)
      .def_property_readonly("kind", [](const BoundaryConfig& b) {
        switch (b.kind()) {
          case BoundaryKind::kNone: return "none";
          case BoundaryKind::kSingle: return "single";
          case BoundaryKind::kTwoPerpendicular: return "two-perpendicular";
          case BoundaryKind::kTwoParallel: return "two-parallel";
        }
        return "";
      })
      .def_property_readonly("boundaries", &BoundaryConfig::boundaries);

  py::class_<AdjustedEmulator>(m, "Emulator")
      .def(py::init([](const PriorSpec& prior, const BoundaryConfig& boundaries,
                       std::optional<Eigen::MatrixXd> points, std::optional<Eigen::VectorXd> values,
                       double jitter) {
             TrainingSet t(prior.dim());
             if (points || values) {
               if (!points || !values) throw InvalidParameter("give both points and values");
               t = TrainingSet(*points, *values);
             }
             return AdjustedEmulator(prior, boundaries, std::move(t), jitter);
           }),
           py::arg("prior"), py::arg("boundaries") = BoundaryConfig::none(),
           py::arg("points") = py::none(), py::arg("values") = py::none(),
           py::arg("jitter") = kDefaultJitter)
      .def("mean", &AdjustedEmulator::mean, py::arg("x"))
      .def("variance", &AdjustedEmulator::variance, py::arg("x"))
      .def("covariance", &AdjustedEmulator::covariance, py::arg("x"), py::arg("x2"))
      .def(
          "predict",
          [](const AdjustedEmulator& em, const Eigen::MatrixXd& xs) {
            Eigen::VectorXd mean(xs.rows()), var(xs.rows());
            for (Eigen::Index i = 0; i < xs.rows(); ++i) {
              const Eigen::VectorXd x = xs.row(i).transpose();
              mean[i] = em.mean(x);
              var[i] = em.variance(x);
            }
            return py::make_tuple(mean, var);
          },
          py::arg("xs"), "means and variances for each row of xs")
      .def_property_readonly("jitter", &AdjustedEmulator::jitter)
      .def_property_readonly("prior", &AdjustedEmulator::prior);

  m.def(
      "augmented_points",
      [](const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
         const std::vector<Eigen::VectorXd>& queries, const BoundaryConfig& boundaries) {
        const TrainingSet t = points.rows() ? TrainingSet(points, values)
                                            : TrainingSet(static_cast<std::size_t>(points.cols()));
        const AugmentedSet a = blackbox_augmented_points(t, queries, boundaries);
        return py::make_tuple(a.points, a.values);
      },
      py::arg("points"), py::arg("values"), py::arg("queries"), py::arg("boundaries"));

  m.def(
      "brute_force_update",
      [](const Eigen::MatrixXd& points, const Eigen::VectorXd& values, const PriorSpec& prior,
         const Eigen::VectorXd& x, const Eigen::VectorXd& x2, double jitter, Eigen::Index rows) {
        const BruteForceResult r = brute_force_update(points, values, prior, x, x2, jitter, rows);
        return py::dict(py::arg("mean") = r.mean, py::arg("variance") = r.variance,
                        py::arg("covariance") = r.covariance);
      },
      py::arg("points"), py::arg("values"), py::arg("prior"), py::arg("x"), py::arg("x2"),
      py::arg("jitter") = 0.0, py::arg("jittered_rows") = -1);

  // design
  m.def(
      "latin_hypercube",
      [](std::size_t n, std::size_t d, std::uint64_t seed) { return latin_hypercube(n, d, seed).points; },
      py::arg("n"), py::arg("d"), py::arg("seed"));
  m.def(
      "maximin_lhc",
      [](std::size_t n, std::size_t d, std::uint64_t seed, std::size_t candidates) {
        return maximin_lhc(n, d, seed, candidates).points;
      },
      py::arg("n"), py::arg("d"), py::arg("seed"), py::arg("candidates") = 1000);
  m.def("min_pairwise_distance", &min_pairwise_distance, py::arg("points"));
  m.def(
      "sobol_pool",
      [](std::size_t size, std::size_t dim, std::uint64_t seed, std::optional<Eigen::VectorXd> lower,
         std::optional<Eigen::VectorXd> upper) {
        return sobol_pool(size, make_box(lower, upper, dim), seed);
      },
      py::arg("size"), py::arg("dim"), py::arg("seed"), py::arg("lower") = py::none(),
      py::arg("upper") = py::none());
  m.def(
      "warp_design",
      [](const Eigen::MatrixXd& points, const BoundaryConfig& boundaries,
         const std::vector<double>& thetas, std::optional<Eigen::VectorXd> lower,
         std::optional<Eigen::VectorXd> upper) {
        const Box box = make_box(lower, upper, static_cast<std::size_t>(points.cols()));
        return warp_design(as_design(points, box), boundaries, KernelSpec::gaussian(thetas)).points;
      },
      py::arg("points"), py::arg("boundaries"), py::arg("thetas"), py::arg("lower") = py::none(),
      py::arg("upper") = py::none());
  m.def(
      "criterion_grid",
      [](std::size_t dim, std::size_t resolution, std::optional<Eigen::VectorXd> lower,
         std::optional<Eigen::VectorXd> upper) {
        return CriterionGrid::tensor(make_box(lower, upper, dim), resolution).points;
      },
      py::arg("dim"), py::arg("resolution"), py::arg("lower") = py::none(),
      py::arg("upper") = py::none());
  m.def(
      "v_criterion",
      [](const Eigen::MatrixXd& design, const Eigen::MatrixXd& grid, const PriorSpec& prior,
         const BoundaryConfig& boundaries) {
        return v_criterion(design, CriterionGrid{grid}, prior, boundaries);
      },
      py::arg("design"), py::arg("grid"), py::arg("prior"), py::arg("boundaries"));
  m.def(
      "greedy_v_optimal",
      [](std::size_t n, const Eigen::MatrixXd& grid, const Eigen::MatrixXd& pool,
         const PriorSpec& prior, const BoundaryConfig& boundaries, std::uint64_t seed,
         std::size_t refine_sweeps, std::optional<Eigen::VectorXd> lower,
         std::optional<Eigen::VectorXd> upper) {
        const Box box = make_box(lower, upper, prior.dim());
        GreedyOptions o;
        o.refine_sweeps = refine_sweeps;
        return greedy_v_optimal(n, CriterionGrid{grid}, pool, prior, boundaries, box, seed, o)
            .points;
      },
      py::arg("n"), py::arg("grid"), py::arg("pool"), py::arg("prior"), py::arg("boundaries"),
      py::arg("seed") = 0, py::arg("refine_sweeps") = 0, py::arg("lower") = py::none(),
      py::arg("upper") = py::none());

  // diagnostics
  m.def(
      "standardized_errors",
      [](const AdjustedEmulator& em, const Eigen::MatrixXd& points, const Eigen::VectorXd& truth) {
        const DiagnosticReport r = standardized_errors(em, points, truth);
        Eigen::VectorXd s(static_cast<Eigen::Index>(r.records.size()));
        for (std::size_t i = 0; i < r.records.size(); ++i) {
          s[static_cast<Eigen::Index>(i)] = r.records[i].standardized.value_or(std::nan(""));
        }
        py::dict summary(py::arg("count") = r.summary.count, py::arg("exact") = r.summary.exact,
                         py::arg("rmse") = r.summary.rmse,
                         py::arg("max_abs_s") = r.summary.max_abs_s,
                         py::arg("over_threshold") = r.summary.over_threshold);
        return py::make_tuple(s, summary);
      },
      py::arg("emulator"), py::arg("points"), py::arg("truth"),
      "standardized errors (NaN where the emulator is exact) and a summary");
  m.def("rmse", &rmse, py::arg("emulator"), py::arg("points"), py::arg("truth"));

  // models
  auto toy = m.def_submodule("toy", "two-input toy simulator");
  toy.def("f", &models::toy_f, py::arg("x"));
  toy.def("boundary_k", &models::toy_boundary_k);
  toy.def("boundary_l", &models::toy_boundary_l);
  toy.def("boundary_k_far", &models::toy_boundary_k_far);

  auto ara = m.def_submodule("arabidopsis", "Arabidopsis root hormone network");
  ara.attr("VARIED_RATES") = std::vector<std::string>{"k4", "k6", "k6a", "k7", "k8", "k9"};
  ara.def("input_transform", [](const std::array<double, models::kNumVaried>& raw) {
    return models::input_transform(raw);
  });
  ara.def("input_transform_inverse", &models::input_transform_inverse, py::arg("scaled"));
  py::class_<models::ArabidopsisModel, std::shared_ptr<models::ArabidopsisModel>>(ara, "Model")
      .def(py::init([](std::optional<std::string> path) {
             return std::make_shared<models::ArabidopsisModel>(
                 io::load_arabidopsis_spec(path.value_or(io::default_arabidopsis_path())));
           }),
           py::arg("spec_path") = py::none())
      .def("__call__", &models::ArabidopsisModel::operator(), py::arg("scaled"))
      .def("boundary_k6", &models::ArabidopsisModel::boundary_k6)
      .def("boundary_k8", &models::ArabidopsisModel::boundary_k8);

  // studies
  m.def(
      "run_study",
      [](const std::string& model, std::size_t n_train, double theta, std::size_t n_diag,
         std::uint64_t seed, std::vector<std::string> designs,
         std::vector<std::string> boundary_sets, std::size_t maximin_candidates) {
        study::Simulator sim;
        if (model == "toy2d") {
          sim = study::toy_simulator();
        } else if (model == "arabidopsis") {
          sim = study::arabidopsis_simulator(std::make_shared<models::ArabidopsisModel>(
              io::load_arabidopsis_spec(io::default_arabidopsis_path())));
        } else {
          throw ConfigError("model: expected toy2d or arabidopsis");
        }
        study::StudyOptions o;
        o.n_train = n_train;
        o.thetas = {theta};
        o.n_diag = n_diag;
        o.seed = seed;
        o.maximin_candidates = maximin_candidates;
        o.designs.clear();
        for (const auto& d : designs) o.designs.push_back(design_method_from_string(d));
        o.boundary_sets = std::move(boundary_sets);
        o.include_untrained = false;
        const study::StudyResult r = study::run_study(sim, o);
        py::list rows;
        for (const auto& row : r.rows) {
          rows.append(py::dict(py::arg("design") = row.design,
                               py::arg("boundaries") = row.boundaries,
                               py::arg("n_train") = row.n_train, py::arg("rmse") = row.summary.rmse,
                               py::arg("max_abs_s") = row.summary.max_abs_s,
                               py::arg("v_criterion") = row.criterion));
        }
        return rows;
      },
      py::arg("model"), py::arg("n_train"), py::arg("theta"), py::arg("n_diag") = 500,
      py::arg("seed") = 0, py::arg("designs") = std::vector<std::string>{"maximin"},
      py::arg("boundary_sets") = std::vector<std::string>{"none", "K"},
      py::arg("maximin_candidates") = 1000);
}
