#include "kbemu/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "kbemu/errors.hpp"

namespace kbemu::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
  return v;
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError((path.empty() ? "" : path + ".") + key + ": missing");
  return *it;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

}  // namespace

// --- emulator configuration ----------------------------------------------------

PriorSpec EmulatorConfig::prior() const {
  PriorSpec p;
  p.beta = beta;
  p.sigma2 = sigma2;
  p.kernel = KernelSpec::gaussian(thetas);
  p.validate();
  return p;
}

BoundaryConfig EmulatorConfig::resolve(const models::EvaluatorRegistry& registry) const {
  std::vector<AxisBoundary> list;
  for (const auto& b : boundaries) list.push_back(registry.boundary(b.evaluator, b.axis, b.location));
  BoundaryConfig out = BoundaryConfig::from_list(std::move(list));
  out.check_dimension(thetas.size());
  return out;
}

EmulatorConfig parse_emulator_config(const std::string& json_text) {
  const json j = parse_json(json_text, "emulator config");
  EmulatorConfig c;
  c.beta = number_at(field(j, "beta", ""), "beta");
  c.sigma2 = number_at(field(j, "sigma2", ""), "sigma2");
  if (!(c.sigma2 > 0.0)) throw ConfigError("sigma2: must be positive");
  const json& thetas = field(j, "thetas", "");
  if (!thetas.is_array() || thetas.empty()) throw ConfigError("thetas: expected a nonempty array");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const std::string path = "thetas[" + std::to_string(i) + "]";
    const double t = number_at(thetas[i], path);
    if (!(t > 0.0)) throw ConfigError(path + ": must be positive");
    c.thetas.push_back(t);
  }
  if (j.contains("boundaries")) {
    const json& list = j["boundaries"];
    if (!list.is_array()) throw ConfigError("boundaries: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "boundaries[" + std::to_string(i) + "]";
      BoundaryEntry e;
      const json& axis = field(list[i], "axis", path);
      if (!axis.is_number_integer() || axis.get<long long>() < 0) {
        throw ConfigError(path + ".axis: expected a nonnegative integer");
      }
      e.axis = axis.get<std::size_t>();
      if (e.axis >= c.thetas.size()) {
        throw ConfigError(path + ".axis: " + std::to_string(e.axis) + " is not below the " +
                          std::to_string(c.thetas.size()) + " inputs");
      }
      e.location = number_at(field(list[i], "location", path), path + ".location");
      const json& name = field(list[i], "builtin_evaluator_name", path);
      if (!name.is_string()) throw ConfigError(path + ".builtin_evaluator_name: expected a string");
      e.evaluator = name.get<std::string>();
      c.boundaries.push_back(std::move(e));
    }
  }
  if (j.contains("jitter")) {
    c.jitter = number_at(j["jitter"], "jitter");
    if (c.jitter < 0.0) throw ConfigError("jitter: must be nonnegative");
  }
  return c;
}

std::string to_json(const EmulatorConfig& config) {
  ordered_json j;
  j["beta"] = config.beta;
  j["sigma2"] = config.sigma2;
  j["thetas"] = config.thetas;
  j["boundaries"] = ordered_json::array();
  for (const auto& b : config.boundaries) {
    j["boundaries"].push_back(
        {{"axis", b.axis}, {"location", b.location}, {"builtin_evaluator_name", b.evaluator}});
  }
  j["jitter"] = config.jitter;
  return j.dump(2) + "\n";
}

// --- Arabidopsis parameters ------------------------------------------------------

models::ArabidopsisSpec parse_arabidopsis_spec(const std::string& json_text) {
  const json j = parse_json(json_text, "arabidopsis spec");
  models::ArabidopsisSpec spec;

  auto read_map = [&](const char* key, auto names, auto lookup, auto& target) {
    const json& m = field(j, key, "");
    if (!m.is_object()) throw ConfigError(std::string(key) + ": expected an object");
    std::vector<std::string> unknown;
    std::set<std::size_t> seen;
    for (const auto& [name, value] : m.items()) {
      const auto idx = lookup(name);
      if (!idx) {
        unknown.push_back(name);
        continue;
      }
      target[*idx] = number_at(value, std::string(key) + "." + name);
      seen.insert(*idx);
    }
    if (!unknown.empty()) throw ConfigError(std::string(key) + ": unknown names " + join(unknown));
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!seen.count(i)) missing.emplace_back(names[i]);
    }
    if (!missing.empty()) throw ConfigError(std::string(key) + ": missing " + join(missing));
  };

  read_map("rates", models::kRateNames, models::rate_from_name, spec.rates);
  read_map("initial_state", models::kSpeciesNames, models::species_from_name,
           spec.initial_state);
  spec.t_end = number_at(field(j, "t_end", ""), "t_end");
  try {
    spec.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("arabidopsis spec: ") + e.what());
  }
  return spec;
}

std::string to_json(const models::ArabidopsisSpec& spec) {
  ordered_json j;
  ordered_json rates = ordered_json::object();
  for (std::size_t i = 0; i < models::kNumRates; ++i) {
    rates[std::string(models::kRateNames[i])] = spec.rates[i];
  }
  ordered_json init = ordered_json::object();
  for (std::size_t i = 0; i < models::kNumSpecies; ++i) {
    init[std::string(models::kSpeciesNames[i])] = spec.initial_state[i];
  }
  j["rates"] = rates;
  j["initial_state"] = init;
  j["t_end"] = spec.t_end;
  return j.dump(2) + "\n";
}

std::string default_arabidopsis_path() {
  return std::string(KBEMU_DATA_DIR) + "/arabidopsis_default.json";
}

models::ArabidopsisSpec load_arabidopsis_spec(const std::string& path) {
  try {
    return parse_arabidopsis_spec(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// --- tables ------------------------------------------------------------------------

std::string comment_header(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out;
  for (const auto& [k, v] : fields) out += "# " + k + ": " + v + "\n";
  return out;
}

namespace {

void write_row(std::ostringstream& out, const Eigen::VectorXd& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) out << (j ? "," : "") << format_double(x[j]);
}

std::string header_row(const std::vector<std::string>& names, std::size_t dim) {
  if (names.size() != dim) throw ShapeError("column names do not match the point dimension");
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
  return s;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string design_csv(const Design& design, const std::vector<std::string>& names,
                       const std::string& header) {
  std::ostringstream out;
  out << header << header_row(names, design.dim()) << "\n";
  for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
    write_row(out, design.points.row(i).transpose());
    out << "\n";
  }
  return out.str();
}

std::string design_json(const Design& design, const std::vector<std::string>& names,
                        const std::vector<std::pair<std::string, double>>& criteria,
                        const std::string& config_hash, std::uint64_t run_seed) {
  ordered_json j;
  j["provenance"] = to_string(design.provenance);
  j["seed"] = run_seed;
  j["design_seed"] = design.seed;
  j["config_hash"] = config_hash;
  j["names"] = names;
  j["box"] = {{"lower", std::vector<double>(design.box.lower.begin(), design.box.lower.end())},
              {"upper", std::vector<double>(design.box.upper.begin(), design.box.upper.end())}};
  ordered_json pts = ordered_json::array();
  for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
    pts.push_back(std::vector<double>(design.points.row(i).begin(), design.points.row(i).end()));
  }
  j["points"] = pts;
  ordered_json crit = ordered_json::object();
  for (const auto& [k, v] : criteria) crit[k] = v;
  j["criteria"] = crit;
  return j.dump(2) + "\n";
}

Table parse_table_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      if (cells.size() < 2) throw ConfigError("table header needs inputs and an output column");
      t.names.assign(cells.begin(), cells.end() - 1);
      have_header = true;
      continue;
    }
    if (cells.size() != t.names.size() + 1) {
      throw ConfigError("table line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.names.size() + 1) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError("table line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError("table is empty");
  const auto d = static_cast<Eigen::Index>(t.names.size());
  t.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  t.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) t.points(static_cast<Eigen::Index>(i), j) = rows[i][j];
    t.values[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return t;
}

std::string report_csv(const DiagnosticReport& report, const std::vector<std::string>& names,
                       const std::string& header) {
  std::ostringstream out;
  out << header;
  for (const auto& n : names) out << n << ",";
  out << "f_true,mean,sd,S,exact\n";
  for (const auto& r : report.records) {
    if (static_cast<std::size_t>(r.x.size()) != names.size()) {
      throw ShapeError("report names do not match the point dimension");
    }
    write_row(out, r.x);
    out << "," << format_double(r.f_true) << "," << format_double(r.mean) << ","
        << format_double(r.sd) << "," << opt(r.standardized) << "," << (r.exact() ? 1 : 0)
        << "\n";
  }
  return out.str();
}

namespace {

ordered_json summary_object(const DiagnosticSummary& s) {
  ordered_json j;
  j["count"] = s.count;
  j["exact"] = s.exact;
  j["rmse"] = s.rmse;
  j["max_abs_s"] = s.max_abs_s;
  j["over_threshold"] = s.over_threshold;
  j["fraction_over"] = s.fraction_over();
  return j;
}

}  // namespace

std::string summary_json(const DiagnosticSummary& summary) {
  return summary_object(summary).dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::vector<std::string>& names,
                      const std::string& header) {
  std::ostringstream out;
  out << header;
  for (const auto& n : names) out << n << ",";
  out << "mean,sd,f_true,S\n";
  for (const auto& r : rows) {
    if (static_cast<std::size_t>(r.x.size()) != names.size()) {
      throw ShapeError("sweep names do not match the point dimension");
    }
    write_row(out, r.x);
    out << "," << format_double(r.mean) << "," << format_double(r.sd) << "," << opt(r.f_true)
        << "," << opt(r.standardized) << "\n";
  }
  return out.str();
}

std::string study_csv(const study::StudyResult& result, const std::string& header) {
  std::ostringstream out;
  out << header << "design,boundaries,n_train,rmse,max_abs_s,frac_over_3,v_criterion\n";
  for (const auto& r : result.rows) {
    out << r.design << "," << r.boundaries << "," << r.n_train << ","
        << format_double(r.summary.rmse) << "," << format_double(r.summary.max_abs_s) << ","
        << format_double(r.summary.fraction_over()) << "," << format_double(r.criterion) << "\n";
  }
  return out.str();
}

std::string study_json(const study::StudyResult& result, const std::string& model,
                       std::uint64_t seed, const std::string& config_hash) {
  ordered_json j;
  j["model"] = model;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["prior"] = {{"beta", result.prior.beta},
                {"sigma2", result.prior.sigma2},
                {"thetas", result.prior.kernel.thetas}};
  j["n_diag"] = result.diag_points.rows();
  ordered_json rows = ordered_json::array();
  for (const auto& r : result.rows) {
    ordered_json row;
    row["design"] = r.design;
    row["boundaries"] = r.boundaries;
    row["n_train"] = r.n_train;
    row["summary"] = summary_object(r.summary);
    row["v_criterion"] = r.criterion;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace kbemu::io
