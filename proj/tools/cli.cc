#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "l1kpca/detect.hpp"
#include "l1kpca/error.hpp"
#include "l1kpca/experiments.hpp"
#include "l1kpca/io.hpp"
#include "l1kpca/l1.hpp"
#include "l1kpca/l2.hpp"
#include "l1kpca/oracle.hpp"
#include "l1kpca/version.hpp"
#include "nlohmann/json.hpp"

namespace l1kpca::cli {
namespace {

using json = nlohmann::ordered_json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output;
  std::string format = "json";
};

struct DataOptions {
  std::string path;
  bool no_header = false;
  std::string label_column;
  bool no_standardize = false;
};

struct KernelOptions {
  std::string family = "linear";
  std::optional<double> sigma;
  bool auto_sigma_d = false;
  int degree = 2;
  double offset = 1.0;
};

// One result table plus trailing summary records. JSON output writes a
// header line, one line per row and one per summary; CSV writes the table
// with the header and summaries as '#' comment lines.
struct Report {
  std::string command;
  json config;
  std::string row_kind;
  std::vector<std::string> columns;
  std::vector<json> rows;
  std::vector<json> summaries;
};

void add_data_flags(CLI::App* app, DataOptions& d, bool required = true) {
  auto* opt = app->add_option("--data", d.path, "CSV file with one sample per row");
  if (required) opt->required();
  app->add_flag("--no-header", d.no_header, "The first row holds data, not column names");
  app->add_option("--label-column", d.label_column,
                  "Outlier label column (name, or zero-based index); values 0/1 or normal/outlier");
  app->add_flag("--no-standardize", d.no_standardize, "Use the feature values as given");
}

void add_kernel_flags(CLI::App* app, KernelOptions& k) {
  app->add_option("--kernel", k.family, "linear, gaussian or poly")
      ->check(CLI::IsMember({"linear", "gaussian", "rbf", "poly", "polynomial"}));
  auto* sigma = app->add_option("--sigma", k.sigma, "Gaussian width: exp(-|a-b|^2 / (2 sigma^2))");
  app->add_flag("--auto-sigma-d", k.auto_sigma_d, "Set sigma to the number of features")->excludes(sigma);
  app->add_option("--degree", k.degree, "Polynomial degree");
  app->add_option("--offset", k.offset, "Polynomial offset");
}

DatasetFile dataset_file(const DataOptions& d) {
  DatasetFile f;
  f.path = d.path;
  f.has_header = !d.no_header;
  if (!d.label_column.empty()) f.label_column = d.label_column;
  return f;
}

json data_config(const DataOptions& d) {
  return {{"path", d.path},
          {"has_header", !d.no_header},
          {"label_column", d.label_column.empty() ? json(nullptr) : json(d.label_column)},
          {"standardize", !d.no_standardize}};
}

Dataset load(const DataOptions& d) {
  RawTable raw = read_csv_raw(dataset_file(d));
  Dataset out = d.no_standardize ? as_is(raw.values) : standardize(raw.values);
  out.labels = std::move(raw.labels);
  return out;
}

KernelSpec resolve_kernel(const KernelOptions& k, Eigen::Index features) {
  switch (kernel_family_from_string(k.family)) {
    case KernelFamily::kLinear:
      return KernelSpec::linear();
    case KernelFamily::kGaussian:
      if (k.auto_sigma_d) return KernelSpec::gaussian(static_cast<double>(features));
      return KernelSpec::gaussian(k.sigma.value_or(1.0));
    case KernelFamily::kPolynomial:
      return KernelSpec::polynomial(k.degree, k.offset);
  }
  throw InvalidData("unknown kernel family");
}

// "linear", "gaussian:15", "poly:3:1" for commands that take several kernels.
KernelSpec parse_kernel_token(const std::string& token, Eigen::Index features) {
  std::vector<std::string> parts;
  std::stringstream ss(token);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty()) throw InvalidData("empty kernel spec");
  const auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::exception&) {
      throw InvalidData("bad number '" + parts[i] + "' in kernel spec '" + token + "'");
    }
  };
  switch (kernel_family_from_string(parts[0])) {
    case KernelFamily::kLinear:
      if (parts.size() != 1) break;
      return KernelSpec::linear();
    case KernelFamily::kGaussian:
      if (parts.size() == 1) return KernelSpec::gaussian(static_cast<double>(features));
      if (parts.size() != 2) break;
      if (parts[1] == "d") return KernelSpec::gaussian(static_cast<double>(features));
      return KernelSpec::gaussian(number(1));
    case KernelFamily::kPolynomial: {
      if (parts.size() > 3) break;
      const double degree = parts.size() > 1 ? number(1) : 2.0;
      if (degree != std::floor(degree)) throw InvalidData("polynomial degree must be an integer");
      return KernelSpec::polynomial(static_cast<int>(degree), parts.size() > 2 ? number(2) : 1.0);
    }
  }
  throw InvalidData("malformed kernel spec '" + token + "'");
}

json kernel_json(const KernelSpec& spec) {
  return {{"family", to_string(spec.family)},
          {"sigma", spec.sigma},
          {"degree", spec.degree},
          {"offset", spec.offset}};
}

json solver_json(const SolverOptions& s) {
  return {{"starts", s.starts},
          {"max_iter", s.max_iter},
          {"seed", s.seed},
          {"tol_zero", s.tol_zero ? json(*s.tol_zero) : json("auto")},
          {"eps_term", s.eps_term ? json(*s.eps_term) : json("auto")}};
}

json signs_json(const SignVector& c) {
  json out = json::array();
  for (const auto v : c.entries()) out.push_back(static_cast<int>(v));
  return out;
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char ch : s) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    return quoted + "\"";
  }
  if (v.is_null()) return "";
  if (v.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? " " : "") + csv_cell(v[i]);
    return joined;
  }
  return v.dump();
}

void emit(const Report& r, const GlobalOptions& g, std::ostream& out) {
  const json header = {{"record", "header"},
                       {"tool", "l1kpca"},
                       {"version", kVersion},
                       {"command", r.command},
                       {"config", r.config}};
  if (g.format == "json") {
    out << header.dump() << '\n';
    for (const auto& row : r.rows) {
      json line = {{"record", r.row_kind}};
      line.update(row);
      out << line.dump() << '\n';
    }
    for (const auto& s : r.summaries) out << s.dump() << '\n';
    return;
  }
  out << "# " << header.dump() << '\n';
  for (std::size_t j = 0; j < r.columns.size(); ++j) out << (j ? "," : "") << r.columns[j];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t j = 0; j < r.columns.size(); ++j) {
      out << (j ? "," : "") << (row.contains(r.columns[j]) ? csv_cell(row.at(r.columns[j])) : "");
    }
    out << '\n';
  }
  for (const auto& s : r.summaries) out << "# " << s.dump() << '\n';
}

// Scores emitted as score_0 .. score_{p-1} columns.
void add_score_rows(Report& r, const Eigen::MatrixXd& scores) {
  r.row_kind = "scores";
  r.columns = {"row"};
  for (Eigen::Index j = 0; j < scores.cols(); ++j) r.columns.push_back("score_" + std::to_string(j));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    json row = {{"row", i}};
    for (Eigen::Index j = 0; j < scores.cols(); ++j) row["score_" + std::to_string(j)] = scores(i, j);
    r.rows.push_back(std::move(row));
  }
}

SolverOptions solver_options(const GlobalOptions& g, std::size_t starts, std::size_t max_iter) {
  SolverOptions s;
  s.starts = starts;
  s.max_iter = max_iter;
  s.seed = g.seed;
  s.threads = g.threads;
  return s;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidData("bad value '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw InvalidData(what + " is empty");
  return out;
}

struct FitCommand {
  DataOptions data;
  KernelOptions kernel;
  std::size_t components = 1;
  std::size_t starts = 8;
  std::size_t max_iter = 1000;
  std::string model;
};

Report run_fit(const FitCommand& c, const GlobalOptions& g, bool l2) {
  auto train = std::make_shared<const Dataset>(load(c.data));
  const KernelSpec spec = resolve_kernel(c.kernel, train->cols());
  const GramMatrix k = gram(spec, *train, {.max_samples = 20000, .threads = g.threads});
  Report r;
  r.command = l2 ? "fit-l2" : "fit";
  r.config = {{"data", data_config(c.data)},
              {"kernel", kernel_json(spec)},
              {"components", c.components},
              {"model", c.model},
              {"seed", g.seed},
              {"threads", g.threads}};
  if (l2) {
    const EigenModel m = l2_fit(k, static_cast<Eigen::Index>(c.components), train);
    write_model(m, c.model);
    r.row_kind = "component";
    r.columns = {"component", "eigenvalue"};
    for (Eigen::Index j = 0; j < m.num_components(); ++j) {
      r.rows.push_back({{"component", j}, {"eigenvalue", m.eigenvalues(j)}});
    }
    return r;
  }
  const SolverOptions solver = solver_options(g, c.starts, c.max_iter);
  r.config["solver"] = solver_json(solver);
  SolverOptions lean = solver;
  lean.keep_kernel_chain = false;
  const KpcaModel m = fit(k, c.components, lean, train);
  write_model(m, c.model);
  r.row_kind = "component";
  r.columns = {"component", "objective", "iterations", "terminated_by", "lagrange_multiplier",
               "zero_band_hits"};
  for (std::size_t j = 0; j < m.num_components(); ++j) {
    const auto& comp = m.components[j];
    r.rows.push_back({{"component", j},
                      {"objective", comp.objective},
                      {"iterations", comp.report.iterations},
                      {"terminated_by", to_string(comp.report.terminated_by)},
                      {"lagrange_multiplier", comp.report.lagrange_multiplier},
                      {"zero_band_hits", comp.report.zero_band_hits}});
  }
  return r;
}

struct TransformCommand {
  std::string model;
  DataOptions data;
};

Report run_transform(const TransformCommand& c, const GlobalOptions& g) {
  AnyModel any = read_model(c.model);
  Report r;
  r.command = "transform";
  r.config = {{"model", c.model}, {"data", data_config(c.data)}, {"threads", g.threads}};
  const RawTable raw = read_csv_raw(dataset_file(c.data));
  const GramOptions opts{.max_samples = 20000, .threads = g.threads};
  if (auto* l1 = std::get_if<KpcaModel>(&any)) {
    // The model stores its own training statistics; --no-standardize is moot here.
    const Dataset query = standardize_like(*l1->train, raw.values);
    add_score_rows(r, transform(*l1, query, opts));
  } else if (auto* l2 = std::get_if<EigenModel>(&any)) {
    const Dataset query = standardize_like(*l2->train, raw.values);
    add_score_rows(r, l2_scores(*l2, cross_gram(l2->spec, *l2->train, query, opts)));
  } else {
    throw InvalidData("transform needs an l1 or l2 model; '" + c.model + "' is a detector");
  }
  return r;
}

struct DetectCommand {
  DataOptions data;
  KernelOptions kernel;
  std::string method = "l1";
  std::optional<std::size_t> components;
  std::size_t starts = 8;
  std::size_t max_iter = 1000;
  std::optional<double> threshold;
  std::string model;
  bool curve = false;
};

Report run_detect(const DetectCommand& c, const GlobalOptions& g) {
  auto train = std::make_shared<const Dataset>(load(c.data));
  const KernelSpec spec = resolve_kernel(c.kernel, train->cols());
  const GramMatrix k = gram(spec, *train, {.max_samples = 20000, .threads = g.threads});
  const std::size_t p = c.components.value_or(
      default_components(static_cast<std::size_t>(train->rows()), static_cast<std::size_t>(train->cols())));

  Report r;
  r.command = "detect";
  r.config = {{"data", data_config(c.data)},
              {"kernel", kernel_json(spec)},
              {"method", c.method},
              {"components", p},
              {"threshold", c.threshold ? json(*c.threshold) : json(nullptr)},
              {"seed", g.seed},
              {"threads", g.threads}};

  DetectionModel det;
  std::size_t fitted = 0;
  if (c.method == "l1") {
    SolverOptions solver = solver_options(g, c.starts, c.max_iter);
    r.config["solver"] = solver_json(solver);
    solver.keep_kernel_chain = false;
    const KpcaModel m = fit_up_to(k, p, solver, train);
    fitted = m.num_components();
    det = build_detector(m);
  } else {
    const EigenModel m = l2_fit(k, static_cast<Eigen::Index>(p), train);
    fitted = static_cast<std::size_t>(effective_rank(m));
    det = build_detector(m, k);
  }
  det.threshold = c.threshold;
  if (!c.model.empty()) write_model(det, c.model);

  const Eigen::VectorXd scores = outlier_scores(det);
  const std::optional<std::vector<int>> flags =
      c.threshold ? std::optional(classify(scores, *c.threshold)) : std::nullopt;
  r.row_kind = "sample";
  r.columns = {"row", "score"};
  if (flags) r.columns.push_back("flag");
  if (train->labels) r.columns.push_back("label");
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    json row = {{"row", i}, {"score", scores(i)}};
    const auto ui = static_cast<std::size_t>(i);
    if (flags) row["flag"] = (*flags)[ui];
    if (train->labels) row["label"] = (*train->labels)[ui];
    r.rows.push_back(std::move(row));
  }

  json retained = json::array();
  for (const auto j : det.retained) retained.push_back(j);
  json variances = json::array();
  for (Eigen::Index j = 0; j < det.variances.size(); ++j) variances.push_back(det.variances(j));
  json summary = {{"record", "detector"},
                  {"components_fitted", fitted},
                  {"variances", variances},
                  {"alpha", det.alpha},
                  {"retained", retained}};
  if (train->labels) {
    const PRCurve pr = pr_auc(scores, *train->labels);
    summary["auc"] = pr.auc;
    if (c.curve) {
      json points = json::array();
      for (const auto& pt : pr.points) {
        points.push_back({{"cutoff", pt.cutoff}, {"recall", pt.recall}, {"precision", pt.precision}});
      }
      r.summaries.push_back({{"record", "pr_curve"}, {"points", points}});
    }
  }
  r.summaries.insert(r.summaries.begin(), std::move(summary));
  return r;
}

struct SynthCommand {
  SynthConfig config;
  std::string out_noisy;
  std::string out_normal;
};

std::vector<std::string> feature_names(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

json synth_json(const SynthConfig& s) {
  return {{"n", s.n},
          {"d", s.d},
          {"rank", s.rank},
          {"r_percent", s.r_percent},
          {"noise_scale", s.noise_scale},
          {"dense_noise_std", s.dense_noise_std},
          {"seed", s.seed}};
}

Report run_synth(SynthCommand c, const GlobalOptions& g) {
  c.config.seed = g.seed;
  const SynthData data = synth_generate(c.config);
  const auto names = feature_names(c.config.d);
  write_csv(c.out_noisy, data.noisy_raw, names, data.outlier_mask);
  if (!c.out_normal.empty()) write_csv(c.out_normal, data.normal_raw, names);
  Report r;
  r.command = "synth";
  r.config = {{"synth", synth_json(c.config)},
              {"out_noisy", c.out_noisy},
              {"out_normal", c.out_normal.empty() ? json(nullptr) : json(c.out_normal)}};
  r.row_kind = "dataset";
  r.columns = {"file", "rows", "columns", "outliers"};
  r.rows.push_back({{"file", c.out_noisy},
                    {"rows", data.noisy_raw.rows()},
                    {"columns", data.noisy_raw.cols()},
                    {"outliers", data.corrupted_rows.size()}});
  if (!c.out_normal.empty()) {
    r.rows.push_back({{"file", c.out_normal},
                      {"rows", data.normal_raw.rows()},
                      {"columns", data.normal_raw.cols()},
                      {"outliers", 0}});
  }
  return r;
}

struct RobustnessCommand {
  SynthConfig base;
  std::string grid = "5,10,15,20,25,30";
  std::size_t seeds = 10;
  std::vector<std::string> kernels{"linear"};
  std::size_t components = 4;
  std::size_t starts = 8;
};

Report run_robustness(const RobustnessCommand& c, const GlobalOptions& g) {
  SweepConfig cfg;
  cfg.base = c.base;
  cfg.r_grid = parse_number_list(c.grid, "--grid");
  cfg.components = c.components;
  cfg.threads = g.threads;
  cfg.solver = solver_options(g, c.starts, 1000);
  cfg.kernels.clear();
  for (const auto& token : c.kernels) {
    cfg.kernels.push_back(parse_kernel_token(token, static_cast<Eigen::Index>(c.base.d)));
  }
  cfg.seeds.clear();
  if (c.seeds == 0) throw InvalidData("--seeds must be at least 1");
  for (std::size_t s = 0; s < c.seeds; ++s) cfg.seeds.push_back(g.seed + s);

  Report r;
  r.command = "robustness";
  json kernels = json::array();
  for (const auto& k : cfg.kernels) kernels.push_back(kernel_json(k));
  r.config = {{"synth", synth_json(cfg.base)},
              {"grid", cfg.r_grid},
              {"seeds", cfg.seeds},
              {"kernels", kernels},
              {"components", cfg.components},
              {"solver", solver_json(cfg.solver)},
              {"threads", g.threads}};
  r.config["synth"].erase("r_percent");
  r.config["synth"].erase("seed");
  r.row_kind = "robustness";
  r.columns = {"r_percent", "kernel", "tev_l1", "tev_l2", "p", "noise_scale", "n", "d", "rank"};
  for (const auto& res : robustness_sweep(cfg)) {
    r.rows.push_back({{"r_percent", res.r_percent},
                      {"kernel", res.kernel.describe()},
                      {"tev_l1", res.tev_l1},
                      {"tev_l2", res.tev_l2},
                      {"tev_l1_per_seed", res.tev_l1_per_seed},
                      {"tev_l2_per_seed", res.tev_l2_per_seed},
                      {"seeds", res.seeds},
                      {"p", res.p},
                      {"noise_scale", res.noise_scale},
                      {"n", res.n},
                      {"d", res.d},
                      {"rank", res.rank}});
  }
  return r;
}

struct BenchCommand {
  std::vector<std::string> data;
  bool no_header = false;
  std::string label_column;
  bool no_standardize = false;
  std::vector<std::string> kernels{"linear", "gaussian"};
  std::size_t component_cap = 50;
  std::size_t starts = 8;
};

Report run_bench(const BenchCommand& c, const GlobalOptions& g) {
  Report r;
  r.command = "bench";
  r.config = {{"data", c.data},
              {"kernels", c.kernels},
              {"component_cap", c.component_cap},
              {"standardize", !c.no_standardize},
              {"seed", g.seed},
              {"threads", g.threads}};
  r.row_kind = "timing";
  r.columns = {"dataset", "kernel", "method", "seconds", "n", "d", "components"};
  BenchOptions opts;
  opts.component_cap = c.component_cap;
  opts.solver = solver_options(g, c.starts, 1000);
  for (const auto& path : c.data) {
    DataOptions d{path, c.no_header, c.label_column, c.no_standardize};
    std::vector<BenchInput> input{{path, load(d)}};
    std::vector<KernelSpec> specs;
    for (const auto& token : c.kernels) specs.push_back(parse_kernel_token(token, input[0].data.cols()));
    for (const auto& row : runtime_bench(input, specs, opts)) {
      r.rows.push_back({{"dataset", row.dataset},
                        {"kernel", row.kernel},
                        {"method", row.method},
                        {"seconds", row.seconds},
                        {"n", row.n},
                        {"d", row.d},
                        {"components", row.components}});
    }
  }
  return r;
}

struct OracleCommand {
  DataOptions data;
  KernelOptions kernel;
  std::size_t limit = 20;
  std::size_t starts = 64;
};

Report run_oracle(const OracleCommand& c, const GlobalOptions& g) {
  const Dataset data = load(c.data);
  const KernelSpec spec = resolve_kernel(c.kernel, data.cols());
  const GramMatrix k = gram(spec, data, {.max_samples = 20000, .threads = g.threads});
  const OracleResult best = enumerate(k, c.limit);
  SolverOptions solver = solver_options(g, c.starts, 1000);
  const KpcaModel m = fit(k, 1, solver);
  const ComponentModel& comp = m.components[0];

  Report r;
  r.command = "oracle";
  r.config = {{"data", data_config(c.data)},
              {"kernel", kernel_json(spec)},
              {"limit", c.limit},
              {"solver", solver_json(solver)},
              {"threads", g.threads}};
  r.row_kind = "oracle";
  r.columns = {"n", "oracle_objective", "solver_objective", "gap", "oracle_sign", "solver_sign"};
  r.rows.push_back({{"n", k.size()},
                    {"oracle_objective", best.best_objective},
                    {"solver_objective", comp.objective},
                    {"gap", best.best_objective - comp.objective},
                    {"oracle_sign", signs_json(best.best_sign)},
                    {"solver_sign", signs_json(comp.sign_vector)}});
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"L1-norm kernel PCA: fitting, scoring, outlier detection and experiments", "l1kpca"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for random starts and synthetic data");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores); results do not depend on it");
  app.add_option("--output", g.output, "Write results here instead of standard output");
  app.add_option("--format", g.format, "Result format")->check(CLI::IsMember({"json", "csv"}));

  std::function<Report()> action;

  FitCommand fit_cmd;
  auto* fit_app = app.add_subcommand("fit", "Fit an L1-norm kernel PCA model");
  add_data_flags(fit_app, fit_cmd.data);
  add_kernel_flags(fit_app, fit_cmd.kernel);
  fit_app->add_option("--components", fit_cmd.components, "Number of components");
  fit_app->add_option("--starts", fit_cmd.starts, "Starts per component (row-sum start plus random)");
  fit_app->add_option("--max-iter", fit_cmd.max_iter, "Sign updates allowed per start");
  fit_app->add_option("--model", fit_cmd.model, "Model file to write")->required();
  fit_app->callback([&] { action = [&] { return run_fit(fit_cmd, g, false); }; });

  FitCommand l2_cmd;
  auto* l2_app = app.add_subcommand("fit-l2", "Fit the standard eigendecomposition baseline");
  add_data_flags(l2_app, l2_cmd.data);
  add_kernel_flags(l2_app, l2_cmd.kernel);
  l2_app->add_option("--components", l2_cmd.components, "Number of components");
  l2_app->add_option("--model", l2_cmd.model, "Model file to write")->required();
  l2_app->callback([&] { action = [&] { return run_fit(l2_cmd, g, true); }; });

  TransformCommand tr_cmd;
  auto* tr_app = app.add_subcommand("transform", "Score new samples with a fitted model");
  tr_app->add_option("--model", tr_cmd.model, "Model file from fit or fit-l2")->required();
  tr_app->add_option("--data", tr_cmd.data.path, "CSV file of query samples")->required();
  tr_app->add_flag("--no-header", tr_cmd.data.no_header, "The first row holds data");
  tr_app->add_option("--label-column", tr_cmd.data.label_column, "Column to drop before scoring");
  tr_app->callback([&] { action = [&] { return run_transform(tr_cmd, g); }; });

  DetectCommand det_cmd;
  auto* det_app = app.add_subcommand("detect", "Score every sample for outlyingness");
  add_data_flags(det_app, det_cmd.data);
  add_kernel_flags(det_app, det_cmd.kernel);
  det_app->add_option("--method", det_cmd.method, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
  det_app->add_option("--components", det_cmd.components, "Components to fit (default min(n, d, 50))");
  det_app->add_option("--starts", det_cmd.starts, "Starts per component for l1");
  det_app->add_option("--max-iter", det_cmd.max_iter, "Sign updates allowed per start");
  det_app->add_option("--threshold", det_cmd.threshold, "Flag samples whose score exceeds this");
  det_app->add_option("--model", det_cmd.model, "Also write the detector to this file");
  det_app->add_flag("--curve", det_cmd.curve, "Emit the precision-recall points when labels are present");
  det_app->callback([&] { action = [&] { return run_detect(det_cmd, g); }; });

  SynthCommand syn_cmd;
  auto* syn_app = app.add_subcommand("synth", "Generate a corrupted low-rank dataset");
  syn_app->add_option("--n", syn_cmd.config.n, "Samples");
  syn_app->add_option("--d", syn_cmd.config.d, "Features");
  syn_app->add_option("--rank", syn_cmd.config.rank, "Rank of the clean factor model");
  syn_app->add_option("--r", syn_cmd.config.r_percent, "Percentage of corrupted rows");
  syn_app->add_option("--noise-scale", syn_cmd.config.noise_scale, "Std of the corruption noise");
  syn_app->add_option("--dense-noise", syn_cmd.config.dense_noise_std, "Std of the noise on every entry");
  syn_app->add_option("--out-noisy", syn_cmd.out_noisy, "CSV for all rows, with a label column")->required();
  syn_app->add_option("--out-normal", syn_cmd.out_normal, "CSV for the uncorrupted rows only");
  syn_app->callback([&] { action = [&] { return run_synth(syn_cmd, g); }; });

  RobustnessCommand rob_cmd;
  auto* rob_app = app.add_subcommand("robustness", "Explained variation of L1 and L2 under corruption");
  rob_app->add_option("--grid", rob_cmd.grid, "Comma-separated corruption percentages");
  rob_app->add_option("--seeds", rob_cmd.seeds, "Datasets per grid point (seeds seed .. seed+S-1)");
  rob_app->add_option("--kernel", rob_cmd.kernels, "Kernels: linear, gaussian[:sigma|:d], poly[:degree[:offset]]");
  rob_app->add_option("--components", rob_cmd.components, "Components p");
  rob_app->add_option("--starts", rob_cmd.starts, "Starts per component");
  rob_app->add_option("--n", rob_cmd.base.n, "Samples");
  rob_app->add_option("--d", rob_cmd.base.d, "Features");
  rob_app->add_option("--rank", rob_cmd.base.rank, "Rank of the clean factor model");
  rob_app->add_option("--noise-scale", rob_cmd.base.noise_scale, "Std of the corruption noise");
  rob_app->add_option("--dense-noise", rob_cmd.base.dense_noise_std, "Std of the noise on every entry");
  rob_app->callback([&] { action = [&] { return run_robustness(rob_cmd, g); }; });

  BenchCommand bench_cmd;
  auto* bench_app = app.add_subcommand("bench", "Wall-clock time of full L1 and L2 fits");
  bench_app->add_option("--data", bench_cmd.data, "One or more CSV files")->required();
  bench_app->add_flag("--no-header", bench_cmd.no_header, "The first row holds data");
  bench_app->add_option("--label-column", bench_cmd.label_column, "Column to drop before timing");
  bench_app->add_flag("--no-standardize", bench_cmd.no_standardize, "Use the feature values as given");
  bench_app->add_option("--kernel", bench_cmd.kernels, "Kernels: linear, gaussian[:sigma|:d], poly[:degree[:offset]]");
  bench_app->add_option("--component-cap", bench_cmd.component_cap, "At most this many components");
  bench_app->add_option("--starts", bench_cmd.starts, "Starts per component");
  bench_app->callback([&] { action = [&] { return run_bench(bench_cmd, g); }; });

  OracleCommand or_cmd;
  auto* or_app = app.add_subcommand("oracle", "Compare the solver with exhaustive search (n <= 20)");
  add_data_flags(or_app, or_cmd.data);
  add_kernel_flags(or_app, or_cmd.kernel);
  or_app->add_option("--limit", or_cmd.limit, "Largest n to enumerate");
  or_app->add_option("--starts", or_cmd.starts, "Starts for the solver");
  or_app->callback([&] { action = [&] { return run_oracle(or_cmd, g); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream os_out;
    std::ostringstream os_err;
    const int code = app.exit(e, os_out, os_err);
    out << os_out.str();
    err << os_err.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Report report = action();
    if (g.output.empty()) {
      emit(report, g, out);
    } else {
      std::ofstream file(g.output, std::ios::binary);
      if (!file) throw InvalidData("cannot open '" + g.output + "' for writing");
      emit(report, g, file);
      if (!file) throw InvalidData("failed writing '" + g.output + "'");
    }
    return kOk;
  } catch (const NumericalError& e) {
    err << "l1kpca: numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const InvalidData& e) {
    err << "l1kpca: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "l1kpca: internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace l1kpca::cli
