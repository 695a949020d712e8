#include "kbemu/study.hpp"

#include <utility>

#include "kbemu/errors.hpp"

namespace kbemu::study {

BoundaryConfig Simulator::boundaries(const std::string& which) const {
  auto need = [&](const std::optional<AxisBoundary>& b, const char* what) -> const AxisBoundary& {
    if (!b) throw ConfigError("model '" + name + "' has no " + what + " boundary");
    return *b;
  };
  if (which == "none") return BoundaryConfig::none();
  if (which == "K") return BoundaryConfig::single(need(k, "K"));
  if (which == "KL-perp") {
    return BoundaryConfig::perpendicular(need(k, "K"), need(l, "perpendicular L"));
  }
  if (which == "KL-par") {
    return BoundaryConfig::parallel(need(k, "K"), need(k_parallel, "parallel L"));
  }
  throw ConfigError("unknown boundary selection '" + which +
                    "' (expected none, K, KL-perp or KL-par)");
}

Simulator toy_simulator() {
  Simulator sim;
  sim.name = "toy2d";
  sim.box = Box::unit(2);
  sim.axis_names = {"x1", "x2"};
  sim.f = [](const Eigen::VectorXd& x) { return models::toy_f(x); };
  sim.k = models::toy_boundary_k();
  sim.l = models::toy_boundary_l();
  sim.k_parallel = models::toy_boundary_k_far();
  return sim;
}

Simulator arabidopsis_simulator(std::shared_ptr<const models::ArabidopsisModel> model) {
  Simulator sim;
  sim.name = "arabidopsis";
  sim.box = models::ArabidopsisModel::input_box();
  for (auto r : models::kVariedRates) sim.axis_names.emplace_back(models::kRateNames[r]);
  sim.f = [model](const Eigen::VectorXd& x) { return (*model)(x); };
  sim.k = model->boundary_k6();
  sim.l = model->boundary_k8();
  return sim;
}

Eigen::VectorXd evaluate(const Simulator& sim, const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = sim.f(points.row(i).transpose());
  return out;
}

CriterionGrid criterion_grid(const DesignRequest& request, const Box& box) {
  const std::size_t res = request.grid_resolution ? request.grid_resolution
                                                  : CriterionGrid::default_resolution(box.dim());
  return CriterionGrid::tensor(box, res);
}

Design generate_design(const DesignRequest& request, const Simulator& sim, const PriorSpec& prior,
                       const BoundaryConfig& boundaries) {
  if (request.n == 0) throw InvalidParameter("design size n must be at least 1");
  const std::size_t d = sim.dim();
  if (prior.dim() != d) throw ShapeError("prior and simulator differ in dimension");
  boundaries.check_dimension(d);

  auto greedy = [&](const BoundaryConfig& b) {
    const CriterionGrid grid = criterion_grid(request, sim.box);
    const Eigen::MatrixXd pool =
        sobol_pool(request.pool_size, sim.box, derive_seed(request.seed, kStreamPool));
    GreedyOptions opts;
    opts.refine_sweeps = request.refine_sweeps;
    return greedy_v_optimal(request.n, grid, pool, prior, b, sim.box, request.seed, opts);
  };

  switch (request.method) {
    case DesignMethod::kLhc:
      return latin_hypercube(request.n, d, request.seed).rescaled(sim.box);
    case DesignMethod::kMaximinLhc:
      return maximin_lhc(request.n, d, request.seed, request.maximin_candidates).rescaled(sim.box);
    case DesignMethod::kWarpedLhc: {
      Design base =
          maximin_lhc(request.n, d, request.seed, request.maximin_candidates).rescaled(sim.box);
      Design out = warp_design(base, boundaries, prior.kernel);
      out.provenance = DesignMethod::kWarpedLhc;
      return out;
    }
    case DesignMethod::kGreedyVOpt:
      return greedy(boundaries);
    case DesignMethod::kWarpedGreedyVOpt: {
      Design out = warp_design(greedy(BoundaryConfig::none()), boundaries, prior.kernel);
      out.provenance = DesignMethod::kWarpedGreedyVOpt;
      return out;
    }
  }
  throw InvalidParameter("unhandled design method");
}

PriorSpec scoping_prior(const Simulator& sim, double theta, std::size_t runs, std::uint64_t seed) {
  if (runs < 2) throw InvalidParameter("need at least two scoping runs");
  const Design scoping =
      maximin_lhc(runs, sim.dim(), derive_seed(seed, kStreamScoping), 100).rescaled(sim.box);
  const Eigen::VectorXd y = evaluate(sim, scoping.points);
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / static_cast<double>(runs - 1);
  if (!(var > 0.0)) throw DegenerateConfiguration("scoping runs have zero variance");
  PriorSpec prior;
  prior.beta = mean;
  prior.sigma2 = var;
  prior.kernel = KernelSpec::isotropic(theta, sim.dim());
  return prior;
}

namespace {

KernelSpec study_kernel(const std::vector<double>& thetas, std::size_t dim) {
  if (thetas.size() == 1) return KernelSpec::isotropic(thetas[0], dim);
  if (thetas.size() != dim) {
    throw ConfigError("theta list has " + std::to_string(thetas.size()) + " entries, model has " +
                      std::to_string(dim) + " inputs");
  }
  return KernelSpec::gaussian(thetas);
}

}  // namespace

StudyResult run_study(const Simulator& sim, const StudyOptions& options) {
  if (options.n_train == 0) throw InvalidParameter("study needs n_train >= 1");
  if (options.n_diag == 0) throw InvalidParameter("study needs n_diag >= 1");
  if (options.boundary_sets.empty()) throw InvalidParameter("study needs a boundary set");
  const std::size_t d = sim.dim();

  StudyResult result;
  const KernelSpec kernel = study_kernel(options.thetas, d);
  if (options.beta && options.sigma2) {
    result.prior.beta = *options.beta;
    result.prior.sigma2 = *options.sigma2;
  } else {
    const PriorSpec scoped = scoping_prior(sim, 1.0, options.scoping_runs, options.seed);
    result.prior.beta = options.beta.value_or(scoped.beta);
    result.prior.sigma2 = options.sigma2.value_or(scoped.sigma2);
  }
  result.prior.kernel = kernel;
  result.prior.validate();

  const Design diag = maximin_lhc(options.n_diag, d, derive_seed(options.seed, kStreamDiagnostic),
                                  options.diag_candidates)
                          .rescaled(sim.box);
  result.diag_points = diag.points;
  result.diag_values = evaluate(sim, diag.points);

  std::vector<BoundaryConfig> configs;
  for (const auto& which : options.boundary_sets) configs.push_back(sim.boundaries(which));
  const BoundaryConfig& richest = configs.back();

  auto summarize = [&](const TrainingSet& training, const BoundaryConfig& b) {
    const AdjustedEmulator em(result.prior, b, training);
    return standardized_errors(em, result.diag_points, result.diag_values).summary;
  };

  if (options.include_untrained) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      StudyRow row{"none", options.boundary_sets[i], 0, summarize(TrainingSet(d), configs[i]), 0.0};
      result.rows.push_back(std::move(row));
    }
  }

  const CriterionGrid grid = criterion_grid(
      DesignRequest{.grid_resolution = options.grid_resolution}, sim.box);
  for (DesignMethod method : options.designs) {
    DesignRequest req;
    req.method = method;
    req.n = options.n_train;
    req.seed = derive_seed(options.seed, kStreamTraining);
    req.maximin_candidates = options.maximin_candidates;
    req.pool_size = options.pool_size;
    req.grid_resolution = options.grid_resolution;
    req.refine_sweeps = options.refine_sweeps;
    Design design = generate_design(req, sim, result.prior, richest);
    const TrainingSet training(design.points, evaluate(sim, design.points));
    for (std::size_t i = 0; i < configs.size(); ++i) {
      StudyRow row{to_string(method), options.boundary_sets[i], options.n_train,
                   summarize(training, configs[i]),
                   v_criterion(design.points, grid, result.prior, configs[i])};
      result.rows.push_back(std::move(row));
    }
    result.designs.push_back(std::move(design));
  }
  return result;
}

const StudyRow& find_row(const StudyResult& result, const std::string& design,
                         const std::string& boundaries) {
  for (const auto& r : result.rows) {
    if (r.design == design && r.boundaries == boundaries) return r;
  }
  throw InvalidParameter("study has no row (" + design + ", " + boundaries + ")");
}

}  // namespace kbemu::study
