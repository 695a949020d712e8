#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kbemu/design.hpp"
#include "kbemu/diagnostics.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/errors.hpp"
#include "kbemu/io.hpp"
#include "kbemu/models.hpp"
#include "kbemu/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace kbemu;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Settings {
  std::string model = "toy2d";
  std::uint64_t seed = 0;
  std::string out = "kbemu_out";
  std::optional<std::string> boundaries;
  std::optional<std::size_t> n;
  std::optional<std::string> method;
  std::vector<double> thetas;
  std::optional<std::size_t> grid;
  std::optional<double> beta;
  std::optional<double> sigma2;
  double jitter = kDefaultJitter;
  std::string spec_path;
  std::string table_path;
  std::string test_table_path;
  std::size_t n_diag = 500;
  std::size_t maximin_candidates = 100000;
  std::size_t diag_candidates = 1000;
  std::size_t pool_size = 4096;
  std::size_t refine_sweeps = 0;
  std::size_t criterion_grid = 0;
  std::vector<std::string> designs;
  std::optional<bool> untrained;
  std::optional<io::EmulatorConfig> emulator;
};

// Model-dependent defaults, applied after the config file and flags.
std::string boundaries_of(const Settings& s) {
  if (s.boundaries) return *s.boundaries;
  return s.model == "external-table" ? "none" : "K";
}

std::vector<double> thetas_of(const Settings& s) {
  if (!s.thetas.empty()) return s.thetas;
  if (s.emulator) return s.emulator->thetas;
  return {s.model == "arabidopsis" ? 0.7 : 0.4};
}

ordered_json canonical(const Settings& s, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["model"] = s.model;
  j["seed"] = s.seed;
  j["boundaries"] = boundaries_of(s);
  j["n"] = s.n ? json(*s.n) : json(nullptr);
  j["method"] = s.method ? json(*s.method) : json(nullptr);
  j["thetas"] = thetas_of(s);
  j["grid"] = s.grid ? json(*s.grid) : json(nullptr);
  j["beta"] = s.beta ? json(*s.beta) : json(nullptr);
  j["sigma2"] = s.sigma2 ? json(*s.sigma2) : json(nullptr);
  j["jitter"] = s.jitter;
  j["spec"] = s.spec_path;
  j["table"] = s.table_path;
  j["test_table"] = s.test_table_path;
  j["n_diag"] = s.n_diag;
  j["maximin_candidates"] = s.maximin_candidates;
  j["diag_candidates"] = s.diag_candidates;
  j["pool_size"] = s.pool_size;
  j["refine_sweeps"] = s.refine_sweeps;
  j["criterion_grid"] = s.criterion_grid;
  j["designs"] = s.designs;
  j["untrained"] = s.untrained ? json(*s.untrained) : json(nullptr);
  if (s.emulator) j["emulator"] = json::parse(io::to_json(*s.emulator));
  return j;
}

// --- config file ----------------------------------------------------------------

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

void apply_config_file(Settings& s, const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  static const std::set<std::string> known = {
      "model", "seed", "out", "boundaries", "n", "method", "theta", "grid", "beta", "sigma2",
      "jitter", "spec", "table", "test_table", "n_diag", "maximin_candidates",
      "diag_candidates", "pool_size", "refine_sweeps", "criterion_grid", "designs",
      "untrained", "emulator"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(path + ": unknown field '" + key + "'");
  }
  const fs::path base = fs::path(path).parent_path();
  auto rel = [&](const std::string& p) { return (base / p).lexically_normal().string(); };
  if (j.contains("model")) s.model = get_field<std::string>(j, "model");
  if (j.contains("seed")) s.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("out")) s.out = get_field<std::string>(j, "out");
  if (j.contains("boundaries")) s.boundaries = get_field<std::string>(j, "boundaries");
  if (j.contains("n")) s.n = get_field<std::size_t>(j, "n");
  if (j.contains("method")) s.method = get_field<std::string>(j, "method");
  if (j.contains("theta")) {
    s.thetas = j["theta"].is_array() ? get_field<std::vector<double>>(j, "theta")
                                     : std::vector<double>{get_field<double>(j, "theta")};
  }
  if (j.contains("grid")) s.grid = get_field<std::size_t>(j, "grid");
  if (j.contains("beta")) s.beta = get_field<double>(j, "beta");
  if (j.contains("sigma2")) s.sigma2 = get_field<double>(j, "sigma2");
  if (j.contains("jitter")) s.jitter = get_field<double>(j, "jitter");
  if (j.contains("spec")) s.spec_path = rel(get_field<std::string>(j, "spec"));
  if (j.contains("table")) s.table_path = rel(get_field<std::string>(j, "table"));
  if (j.contains("test_table")) s.test_table_path = rel(get_field<std::string>(j, "test_table"));
  if (j.contains("n_diag")) s.n_diag = get_field<std::size_t>(j, "n_diag");
  if (j.contains("maximin_candidates")) {
    s.maximin_candidates = get_field<std::size_t>(j, "maximin_candidates");
  }
  if (j.contains("diag_candidates")) s.diag_candidates = get_field<std::size_t>(j, "diag_candidates");
  if (j.contains("pool_size")) s.pool_size = get_field<std::size_t>(j, "pool_size");
  if (j.contains("refine_sweeps")) s.refine_sweeps = get_field<std::size_t>(j, "refine_sweeps");
  if (j.contains("criterion_grid")) s.criterion_grid = get_field<std::size_t>(j, "criterion_grid");
  if (j.contains("designs")) s.designs = get_field<std::vector<std::string>>(j, "designs");
  if (j.contains("untrained")) s.untrained = get_field<bool>(j, "untrained");
  if (j.contains("emulator")) {
    try {
      s.emulator = io::parse_emulator_config(j["emulator"].dump());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("emulator.") + e.what());
    }
  }
}

void validate(const Settings& s) {
  if (s.model != "toy2d" && s.model != "arabidopsis" && s.model != "external-table") {
    throw ConfigError("model: '" + s.model + "' is not toy2d, arabidopsis or external-table");
  }
  const std::string b = boundaries_of(s);
  if (b != "none" && b != "K" && b != "KL-perp" && b != "KL-par") {
    throw ConfigError("boundaries: '" + b + "' is not none, K, KL-perp or KL-par");
  }
  if (s.method) design_method_from_string(*s.method);
  for (const auto& d : s.designs) design_method_from_string(d);
  for (double t : s.thetas) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("theta: values must be positive");
  }
  if (s.grid && *s.grid < 2) throw ConfigError("grid: must be at least 2");
  if (s.sigma2 && !(*s.sigma2 > 0.0)) throw ConfigError("sigma2: must be positive");
  if (s.jitter < 0.0) throw ConfigError("jitter: must be nonnegative");
  if (s.n_diag == 0) throw ConfigError("n_diag: must be at least 1");
  if (s.maximin_candidates == 0) throw ConfigError("maximin_candidates: must be at least 1");
  if (s.diag_candidates == 0) throw ConfigError("diag_candidates: must be at least 1");
  if (s.pool_size == 0) throw ConfigError("pool_size: must be at least 1");
  if (s.model == "external-table" && s.table_path.empty()) {
    throw ConfigError("table: external-table model needs --table");
  }
}

// --- model plumbing ----------------------------------------------------------------

struct Context {
  study::Simulator sim;
  std::optional<io::Table> table;  // external-table training data
  std::shared_ptr<const models::ArabidopsisModel> arabidopsis;
  std::string hash;
  std::string command;
};

Context make_context(const Settings& s, const std::string& command) {
  Context ctx;
  ctx.command = command;
  ctx.hash = io::hex64(io::fnv1a64(canonical(s, command).dump()));
  if (s.model == "toy2d") {
    ctx.sim = study::toy_simulator();
  } else if (s.model == "arabidopsis") {
    const std::string path = s.spec_path.empty() ? io::default_arabidopsis_path() : s.spec_path;
    ctx.arabidopsis = std::make_shared<const models::ArabidopsisModel>(io::load_arabidopsis_spec(path));
    ctx.sim = study::arabidopsis_simulator(ctx.arabidopsis);
  } else {
    io::Table t = io::parse_table_csv(io::read_file(s.table_path));
    if (t.points.rows() == 0) throw ConfigError("table: no rows");
    ctx.sim.name = "external-table";
    ctx.sim.axis_names = t.names;
    ctx.sim.box.lower = t.points.colwise().minCoeff().transpose();
    ctx.sim.box.upper = t.points.colwise().maxCoeff().transpose();
    for (Eigen::Index j = 0; j < ctx.sim.box.lower.size(); ++j) {
      if (!(ctx.sim.box.upper[j] > ctx.sim.box.lower[j])) {
        ctx.sim.box.upper[j] = ctx.sim.box.lower[j] + 1.0;
      }
    }
    ctx.table = std::move(t);
  }
  return ctx;
}

std::string header(const Context& ctx, const Settings& s) {
  return io::comment_header({{"kbemu", ctx.command},
                             {"model", s.model},
                             {"config_hash", ctx.hash},
                             {"seed", std::to_string(s.seed)}});
}

models::EvaluatorRegistry registry(const Context& ctx) {
  return models::EvaluatorRegistry::builtin(ctx.arabidopsis.get());
}

BoundaryConfig boundaries_for(const Context& ctx, const Settings& s) {
  if (s.emulator && !s.boundaries) return s.emulator->resolve(registry(ctx));
  return ctx.sim.boundaries(boundaries_of(s));
}

PriorSpec prior_for(const Context& ctx, const Settings& s) {
  const std::vector<double> thetas = thetas_of(s);
  const std::size_t d = ctx.sim.dim();
  PriorSpec prior;
  if (thetas.size() == 1) {
    prior.kernel = KernelSpec::isotropic(thetas[0], d);
  } else if (thetas.size() == d) {
    prior.kernel = KernelSpec::gaussian(thetas);
  } else {
    throw ConfigError("theta: " + std::to_string(thetas.size()) + " values for a " +
                      std::to_string(d) + "-input model");
  }
  std::optional<double> beta = s.beta, sigma2 = s.sigma2;
  if (s.emulator) {
    if (!beta) beta = s.emulator->beta;
    if (!sigma2) sigma2 = s.emulator->sigma2;
  }
  if (!beta || !sigma2) {
    if (ctx.sim.name == "toy2d") {
      beta = beta.value_or(0.0);
      sigma2 = sigma2.value_or(1.0);
    } else if (ctx.table) {
      const Eigen::VectorXd& y = ctx.table->values;
      const double m = y.mean();
      const double v = y.size() > 1 ? (y.array() - m).square().sum() / double(y.size() - 1) : 1.0;
      beta = beta.value_or(m);
      sigma2 = sigma2.value_or(v > 0.0 ? v : 1.0);
    } else {
      const PriorSpec scoped = study::scoping_prior(ctx.sim, thetas[0], 20, s.seed);
      beta = beta.value_or(scoped.beta);
      sigma2 = sigma2.value_or(scoped.sigma2);
    }
  }
  prior.beta = *beta;
  prior.sigma2 = *sigma2;
  prior.validate();
  return prior;
}

study::DesignRequest design_request(const Settings& s, std::size_t n) {
  study::DesignRequest req;
  req.method = design_method_from_string(s.method.value_or("maximin"));
  req.n = n;
  req.seed = derive_seed(s.seed, study::kStreamTraining);
  req.maximin_candidates = s.maximin_candidates;
  req.pool_size = s.pool_size;
  req.grid_resolution = s.criterion_grid;
  req.refine_sweeps = s.refine_sweeps;
  return req;
}

TrainingSet training_for(const Context& ctx, const Settings& s, const PriorSpec& prior,
                         const BoundaryConfig& b, std::optional<Design>* design_out = nullptr) {
  if (ctx.table) return TrainingSet(ctx.table->points, ctx.table->values);
  const std::size_t n = s.n.value_or(0);
  if (n == 0) return TrainingSet(ctx.sim.dim());
  Design d = study::generate_design(design_request(s, n), ctx.sim, prior, b);
  if (design_out) *design_out = d;
  return TrainingSet(d.points, study::evaluate(ctx.sim, d.points));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("out: cannot create '" + dir + "': " + ec.message());
}

std::string path_in(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// --- commands ------------------------------------------------------------------------

int cmd_design(const Settings& s) {
  const Context ctx = make_context(s, "design");
  if (ctx.table) throw ConfigError("model: design needs toy2d or arabidopsis");
  if (!s.n || *s.n == 0) throw ConfigError("n: design size must be at least 1");
  const PriorSpec prior = prior_for(ctx, s);
  const BoundaryConfig b = boundaries_for(ctx, s);
  const study::DesignRequest req = design_request(s, *s.n);
  const Design design = study::generate_design(req, ctx.sim, prior, b);
  const CriterionGrid grid = study::criterion_grid(req, ctx.sim.box);
  const double with_b = v_criterion(design.points, grid, prior, b, s.jitter);
  const double without_b = v_criterion(design.points, grid, prior, BoundaryConfig::none(), s.jitter);

  ensure_dir(s.out);
  io::write_file(path_in(s.out, "design.csv"), io::design_csv(design, ctx.sim.axis_names, header(ctx, s)));
  io::write_file(path_in(s.out, "design.json"),
                 io::design_json(design, ctx.sim.axis_names,
                                 {{"v_criterion_with_boundaries", with_b},
                                  {"v_criterion_without_boundaries", without_b},
                                  {"grid_points", static_cast<double>(grid.points.rows())}},
                                 ctx.hash, s.seed));
  std::cout << "design " << to_string(design.provenance) << " n=" << design.size()
            << " boundaries=" << to_string(b.kind()) << "\n"
            << "v_criterion (with boundaries)    " << io::format_double(with_b) << "\n"
            << "v_criterion (without boundaries) " << io::format_double(without_b) << "\n";
  return 0;
}

struct Slice {
  SliceSpec spec;
  std::vector<std::string> names;
};

Slice default_slice(const Context& ctx, const Settings& s) {
  Slice out;
  const std::size_t d = ctx.sim.dim();
  if (d < 2) throw ConfigError("model: a grid sweep needs at least two inputs");
  out.spec.box = ctx.sim.box;
  out.spec.base = 0.5 * (ctx.sim.box.lower + ctx.sim.box.upper);
  if (ctx.sim.name == "arabidopsis") {
    out.spec.axis_x = models::kAxisK6;
    out.spec.axis_y = models::kAxisK8;
  }
  out.spec.res_x = out.spec.res_y = s.grid.value_or(41);
  out.names = ctx.sim.axis_names;
  return out;
}

void write_surfaces(const std::string& dir, const std::vector<SweepRow>& rows, const Slice& slice,
                    const std::string& head) {
  const std::string nx = slice.names[slice.spec.axis_x];
  const std::string ny = slice.names[slice.spec.axis_y];
  const auto ax = static_cast<Eigen::Index>(slice.spec.axis_x);
  const auto ay = static_cast<Eigen::Index>(slice.spec.axis_y);
  auto surface = [&](const char* what, auto get) {
    std::ostringstream out;
    out << head << nx << "," << ny << "," << what << "\n";
    for (const auto& r : rows) {
      out << io::format_double(r.x[ax]) << "," << io::format_double(r.x[ay]) << "," << get(r)
          << "\n";
    }
    io::write_file(path_in(dir, std::string("surface_") + what + ".csv"), out.str());
  };
  surface("mean", [](const SweepRow& r) { return io::format_double(r.mean); });
  surface("sd", [](const SweepRow& r) { return io::format_double(r.sd); });
  if (!rows.empty() && rows.front().f_true) {
    surface("truth", [](const SweepRow& r) { return io::format_double(*r.f_true); });
    surface("S", [](const SweepRow& r) {
      return r.standardized ? io::format_double(*r.standardized) : std::string();
    });
  }
  io::write_file(path_in(dir, "sweep.csv"), io::sweep_csv(rows, slice.names, head));
}

int cmd_emulate(const Settings& s) {
  const Context ctx = make_context(s, "emulate");
  const PriorSpec prior = prior_for(ctx, s);
  const BoundaryConfig b = boundaries_for(ctx, s);
  std::optional<Design> design;
  const TrainingSet training = training_for(ctx, s, prior, b, &design);
  const AdjustedEmulator em(prior, b, training, s.jitter);
  const Slice slice = default_slice(ctx, s);
  const auto rows = grid_sweep(em, slice.spec, ctx.sim.f);

  ensure_dir(s.out);
  const std::string head = header(ctx, s);
  write_surfaces(s.out, rows, slice, head);
  if (design) {
    io::write_file(path_in(s.out, "design.csv"), io::design_csv(*design, ctx.sim.axis_names, head));
  }
  std::cout << "emulate " << ctx.sim.name << " boundaries=" << to_string(b.kind())
            << " n_train=" << training.size() << " grid=" << slice.spec.res_x << "x"
            << slice.spec.res_y << " -> " << s.out << "\n";
  return 0;
}

std::vector<std::string> study_boundary_sets(const std::string& richest) {
  if (richest == "none") return {"none"};
  if (richest == "K") return {"none", "K"};
  return {"none", "K", richest};
}

int cmd_study(const Settings& s) {
  const Context ctx = make_context(s, "study");
  if (ctx.table) throw ConfigError("model: study needs toy2d or arabidopsis");
  const bool arab = ctx.sim.name == "arabidopsis";
  study::StudyOptions o;
  o.n_train = s.n.value_or(arab ? 60 : 20);
  o.thetas = thetas_of(s);
  o.n_diag = s.n_diag;
  o.seed = s.seed;
  o.maximin_candidates = s.maximin_candidates;
  o.diag_candidates = s.diag_candidates;
  if (s.beta) o.beta = s.beta;
  if (s.sigma2) o.sigma2 = s.sigma2;
  if (!arab) {
    o.beta = o.beta.value_or(0.0);
    o.sigma2 = o.sigma2.value_or(1.0);
  }
  std::vector<std::string> designs = s.designs;
  if (designs.empty()) {
    if (s.method) {
      designs = {*s.method};
    } else if (arab) {
      designs = {"maximin"};
    } else {
      designs = {"maximin", "warped-maximin"};
    }
  }
  o.designs.clear();
  for (const auto& d : designs) o.designs.push_back(design_method_from_string(d));
  o.boundary_sets = study_boundary_sets(s.boundaries.value_or(arab ? "KL-perp" : "K"));
  o.include_untrained = s.untrained.value_or(arab);
  o.pool_size = s.pool_size;
  o.grid_resolution = s.criterion_grid;
  o.refine_sweeps = s.refine_sweeps;

  const study::StudyResult r = study::run_study(ctx.sim, o);
  ensure_dir(s.out);
  io::write_file(path_in(s.out, "study.csv"), io::study_csv(r, header(ctx, s)));
  io::write_file(path_in(s.out, "study.json"), io::study_json(r, s.model, s.seed, ctx.hash));
  std::vector<SummaryRow> table;
  for (const auto& row : r.rows) table.push_back({row.design, row.n_train, row.boundaries, row.summary});
  std::cout << "# config_hash " << ctx.hash << " seed " << s.seed << "\n"
            << format_summary_table(table);
  return 0;
}

int cmd_diagnose(const Settings& s) {
  const Context ctx = make_context(s, "diagnose");
  const PriorSpec prior = prior_for(ctx, s);
  const BoundaryConfig b = boundaries_for(ctx, s);
  const TrainingSet training = training_for(ctx, s, prior, b);
  const AdjustedEmulator em(prior, b, training, s.jitter);

  Eigen::MatrixXd points;
  Eigen::VectorXd truth;
  if (ctx.table) {
    if (s.test_table_path.empty()) throw ConfigError("test_table: external-table diagnose needs --test-table");
    io::Table test = io::parse_table_csv(io::read_file(s.test_table_path));
    if (test.names.size() != ctx.sim.dim()) throw ConfigError("test_table: wrong number of inputs");
    points = test.points;
    truth = test.values;
  } else {
    points = maximin_lhc(s.n_diag, ctx.sim.dim(), derive_seed(s.seed, study::kStreamDiagnostic),
                         s.diag_candidates)
                 .rescaled(ctx.sim.box)
                 .points;
    truth = study::evaluate(ctx.sim, points);
  }
  const DiagnosticReport report = standardized_errors(em, points, truth);
  ensure_dir(s.out);
  io::write_file(path_in(s.out, "report.csv"), io::report_csv(report, ctx.sim.axis_names, header(ctx, s)));
  ordered_json j = ordered_json::parse(io::summary_json(report.summary));
  j["config_hash"] = ctx.hash;
  j["seed"] = s.seed;
  j["boundaries"] = to_string(b.kind());
  j["n_train"] = training.size();
  io::write_file(path_in(s.out, "summary.json"), j.dump(2) + "\n");
  std::cout << format_summary_table(
      {{ctx.sim.name, static_cast<std::size_t>(training.size()), to_string(b.kind()), report.summary}});
  return 0;
}

int paper_figure(Settings s, int figure) {
  if (s.model != "toy2d") throw ConfigError("paper-figure: canned figures use the toy2d model");
  const std::string root = s.out;
  auto run = [&](const std::string& sub, auto&& fn) {
    s.out = path_in(root, sub);
    return fn(s);
  };
  s.thetas = {0.4};
  switch (figure) {
    case 2:
      s.boundaries = "K";
      s.n = 0;
      return run("fig2", cmd_emulate);
    case 4:
      s.n = 0;
      s.boundaries = "KL-perp";
      run("fig4_perp", cmd_emulate);
      s.boundaries = "KL-par";
      return run("fig4_par", cmd_emulate);
    case 5:
      s.n = 10;
      s.method = "greedy-vopt";
      s.criterion_grid = 30;
      for (const char* b : {"K", "KL-perp", "KL-par"}) {
        s.boundaries = b;
        run(std::string("fig5_") + b + "/design", cmd_design);
        run(std::string("fig5_") + b, cmd_emulate);
      }
      return 0;
    case 6:
      s.n = 20;
      s.boundaries = "KL-perp";
      s.method = "maximin";
      run("fig6/maximin", cmd_design);
      s.method = "warped-maximin";
      run("fig6/warped", cmd_design);
      return run("fig6", cmd_emulate);
    default:
      throw ConfigError("paper-figure: expected 2, 4, 5 or 6");
  }
}

void add_common(CLI::App& app, Settings& s, std::string& config_path,
                std::vector<std::function<void()>>& overrides) {
  app.add_option("--config", config_path, "JSON run configuration");
  auto opt = [&](const char* name, auto& target, const char* help) {
    using T = std::decay_t<decltype(target)>;
    auto holder = std::make_shared<T>();
    CLI::Option* o = app.add_option(name, *holder, help);
    overrides.push_back([o, holder, &target] {
      if (o->count()) target = *holder;
    });
    return o;
  };
  auto opt_as = [&](const char* name, auto& target, auto tag, const char* help) {
    using T = decltype(tag);
    auto holder = std::make_shared<T>();
    CLI::Option* o = app.add_option(name, *holder, help);
    overrides.push_back([o, holder, &target] {
      if (o->count()) target = *holder;
    });
    return o;
  };
  opt("--seed", s.seed, "global seed");
  opt("--out", s.out, "output directory");
  opt("--model", s.model, "toy2d | arabidopsis | external-table");
  opt_as("--boundaries", s.boundaries, std::string(), "none | K | KL-perp | KL-par");
  opt_as("--n", s.n, std::size_t(), "number of training runs");
  opt_as("--method", s.method, std::string(),
         "lhc | maximin | warped-maximin | greedy-vopt | warped-greedy-vopt");
  opt("--theta", s.thetas, "correlation length(s), comma separated")->delimiter(',');
  opt_as("--grid", s.grid, std::size_t(), "grid resolution per axis for sweeps");
  opt_as("--beta", s.beta, double(), "prior mean");
  opt_as("--sigma2", s.sigma2, double(), "prior variance");
  opt("--jitter", s.jitter, "relative diagonal jitter");
  opt("--spec", s.spec_path, "Arabidopsis parameter JSON");
  opt("--table", s.table_path, "CSV of training runs for external-table");
  opt("--test-table", s.test_table_path, "CSV of test runs for external-table diagnose");
  opt("--n-diag", s.n_diag, "diagnostic set size");
  opt("--maximin-candidates", s.maximin_candidates, "Latin hypercubes tried by maximin");
  opt("--diag-candidates", s.diag_candidates, "Latin hypercubes tried for the diagnostic set");
  opt("--pool-size", s.pool_size, "greedy candidate pool size");
  opt("--refine-sweeps", s.refine_sweeps, "coordinate-descent sweeps after greedy");
  opt("--criterion-grid", s.criterion_grid, "criterion grid points per axis (0: automatic)");
  opt("--designs", s.designs, "study designs, comma separated")->delimiter(',');
  opt_as("--untrained", s.untrained, bool(), "study: include rows without training runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emulation with known boundaries"};
  app.require_subcommand(0, 1);
  Settings settings;
  std::string config_path;
  std::vector<std::function<void()>> overrides;
  int figure = 0;
  add_common(app, settings, config_path, overrides);
  app.add_option("--paper-figure", figure, "canned toy2d runs: 2, 4, 5 or 6");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Settings&);
  };
  const Sub subs[] = {{"design", "generate a design and its V-criterion", cmd_design},
                      {"emulate", "grid sweep of an emulator", cmd_emulate},
                      {"study", "RMSE comparison across designs and boundaries", cmd_study},
                      {"diagnose", "standardized errors on a diagnostic set", cmd_diagnose}};
  std::vector<CLI::App*> apps;
  for (const auto& sub : subs) {
    CLI::App* a = app.add_subcommand(sub.name, sub.help);
    add_common(*a, settings, config_path, overrides);
    apps.push_back(a);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!config_path.empty()) apply_config_file(settings, config_path);
    for (auto& f : overrides) f();
    validate(settings);
    if (figure) return paper_figure(settings, figure);
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (apps[i]->parsed()) return subs[i].fn(settings);
    }
    std::cerr << app.help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
