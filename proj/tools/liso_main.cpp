#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "liso/backfit.hpp"
#include "liso/csv.hpp"
#include "liso/modelsel.hpp"
#include "liso/serialize.hpp"
#include "liso/sim.hpp"
#include "liso/variants.hpp"

namespace {

using namespace liso;

// Failure with a stable machine-parsable code; main renders it as
// "error[CODE]: message" on stderr and exits nonzero.
struct CliFailure : std::runtime_error {
  std::string code;
  CliFailure(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure("E_IO", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw CliFailure("E_IO", "cannot read " + path);
  return std::move(buf).str();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliFailure("E_IO", "cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw CliFailure("E_IO", "cannot write " + path);
}

Table load_table(const std::string& path) {
  try {
    return read_csv(slurp(path));
  } catch (const CsvError& e) {
    throw CliFailure("E_PARSE", path + ": " + e.what());
  }
}

// Response column by name; every other column is a covariate, in header order.
struct Frame {
  std::vector<std::string> columns;  // covariate names
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

Frame split_frame(Table&& t, const std::string& response) {
  for (std::size_t j = 0; j < t.header.size(); ++j)
    for (std::size_t k = j + 1; k < t.header.size(); ++k)
      if (t.header[j] == t.header[k])
        throw CliFailure("E_COLUMN", "duplicate column name '" + t.header[j] + "'");
  std::size_t r = t.find(response);
  if (r == t.header.size())
    throw CliFailure("E_COLUMN", "response column '" + response + "' not in the header");
  Frame f;
  f.y = std::move(t.columns[r]);
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j == r) continue;
    f.columns.push_back(t.header[j]);
    f.x.push_back(std::move(t.columns[j]));
  }
  if (f.x.empty()) throw CliFailure("E_COLUMN", "no covariate columns besides the response");
  return f;
}

Dataset dataset_from(const Frame& f) {
  try {
    return Dataset::make(f.y, f.x);
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
}

Direction parse_direction(const std::string& v) {
  if (v == "inc" || v == "increasing") return Direction::increasing;
  if (v == "dec" || v == "decreasing") return Direction::decreasing;
  if (v == "auto" || v == "unconstrained") return Direction::unconstrained;
  throw CliFailure("E_ARGS", "direction must be inc, dec, or auto, got '" + v + "'");
}

std::vector<Direction> parse_direction_map(const std::vector<std::string>& specs,
                                           const std::vector<std::string>& columns) {
  std::vector<Direction> dirs(columns.size(), Direction::increasing);
  for (const std::string& spec : specs) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
      throw CliFailure("E_ARGS", "--direction expects col=inc|dec|auto, got '" + spec + "'");
    std::string name = spec.substr(0, eq);
    Direction d = parse_direction(spec.substr(eq + 1));
    bool found = false;
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k] == name) {
        dirs[k] = d;
        found = true;
      }
    if (!found) throw CliFailure("E_COLUMN", "direction for unknown column '" + name + "'");
  }
  return dirs;
}

// "max:min:count" with an optional ":log" suffix, descending and positive.
std::vector<double> parse_grid_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = spec.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() == 4) {
    if (parts[3] != "log")
      throw CliFailure("E_ARGS", "--grid spacing must be 'log', got '" + parts[3] + "'");
    parts.pop_back();
  }
  if (parts.size() != 3)
    throw CliFailure("E_ARGS", "--grid expects max:min:count[:log], got '" + spec + "'");
  double hi = 0.0, lo = 0.0;
  long count = 0;
  try {
    hi = std::stod(parts[0]);
    lo = std::stod(parts[1]);
    count = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw CliFailure("E_ARGS", "--grid has a non-numeric field: '" + spec + "'");
  }
  if (!(hi > 0.0) || !(lo > 0.0) || !std::isfinite(hi) || !std::isfinite(lo))
    throw CliFailure("E_ARGS", "--grid endpoints must be positive and finite");
  if (count < 1) throw CliFailure("E_ARGS", "--grid count must be >= 1");
  if (count > 1 && !(hi > lo))
    throw CliFailure("E_ARGS", "--grid needs max > min for more than one point");
  std::vector<double> grid(static_cast<std::size_t>(count));
  grid.front() = hi;
  if (count > 1) {
    double ratio = lo / hi;
    for (long j = 1; j < count; ++j)
      grid[static_cast<std::size_t>(j)] =
          hi * std::pow(ratio, static_cast<double>(j) / static_cast<double>(count - 1));
    grid.back() = lo;
  }
  return grid;
}

std::vector<double> grid_for(const Dataset& d, const std::string& spec) {
  if (!spec.empty()) return parse_grid_spec(spec);
  try {
    return default_lambda_grid(d);
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
}

std::string sibling_csv_path(const std::string& json_path) {
  if (json_path.empty() || json_path == "-") return {};
  if (json_path.size() > 5 && json_path.ends_with(".json"))
    return json_path.substr(0, json_path.size() - 5) + ".csv";
  return json_path + ".csv";
}

ReweightSpec spec_for_variant(const std::string& variant) {
  if (variant == "adaptive") return ReweightSpec::adaptive();
  if (variant == "scad") return ReweightSpec::scad();
  throw CliFailure("E_ARGS", "variant must be plain, adaptive, or scad, got '" + variant + "'");
}

struct FitArgs {
  std::string input, response, output, variant = "plain";
  std::vector<std::string> directions;
  double lambda = -1.0;
  double lambda0 = -1.0;  // variant pilot penalty; defaults to --lambda
};

void run_fit(const FitArgs& a) {
  Frame f = split_frame(load_table(a.input), a.response);
  Dataset d = dataset_from(f);
  if (!(a.lambda >= 0.0)) throw CliFailure("E_ARGS", "--lambda must be >= 0");
  LisoConfig c;
  c.lambda = a.lambda;
  c.directions = parse_direction_map(a.directions, f.columns);
  AdditiveModel m;
  try {
    if (a.variant == "plain") {
      m = liso_fit(d, c);
    } else {
      double l0 = a.lambda0 >= 0.0 ? a.lambda0 : a.lambda;
      m = adaptive_liso(d, l0, a.lambda, spec_for_variant(a.variant), c);
    }
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
  emit(a.output, model_to_json(m, f.columns, a.response));
}

struct PredictArgs {
  std::string model, input, output;
  bool interpolate = false;
};

void run_predict(const PredictArgs& a) {
  ModelEnvelope env;
  try {
    env = model_from_json(slurp(a.model));
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_MODEL", e.what());
  }
  Table t = load_table(a.input);
  std::vector<std::vector<double>> cols;
  if (!env.columns.empty()) {
    for (const std::string& name : env.columns) {
      std::size_t j = t.find(name);
      if (j == t.header.size())
        throw CliFailure("E_COLUMN", "model covariate '" + name + "' not in the input header");
      cols.push_back(std::move(t.columns[j]));
    }
  } else {
    if (t.header.size() < env.model.p())
      throw CliFailure("E_COLUMN", "input has fewer columns than the model has covariates");
    for (std::size_t k = 0; k < env.model.p(); ++k) cols.push_back(std::move(t.columns[k]));
  }
  if (!cols.empty() && cols.front().empty()) throw CliFailure("E_DATA", "input has no data rows");
  emit(a.output, predictions_csv(predict(env.model, cols, a.interpolate)));
}

struct CvArgs {
  std::string input, response, output, grid, variant = "plain";
  int folds = 10;
  std::uint64_t seed = 0;
};

void run_cv(const CvArgs& a) {
  Frame f = split_frame(load_table(a.input), a.response);
  Dataset d = dataset_from(f);
  std::vector<double> grid = grid_for(d, a.grid);
  try {
    if (a.variant == "plain") {
      CvReport rep = cross_validate(d, grid, a.folds, plain_path_fitter(), a.seed);
      emit(a.output, cv_report_to_json(rep));
      std::string csv_path = sibling_csv_path(a.output);
      if (!csv_path.empty()) emit(csv_path, cv_report_csv(rep));
    } else {
      TwoStageChoice choice =
          cross_validate_two_stage(d, grid, a.folds, spec_for_variant(a.variant), {}, a.seed);
      emit(a.output, two_stage_to_json(choice));
      std::string csv_path = sibling_csv_path(a.output);
      if (!csv_path.empty()) emit(csv_path, cv_report_csv(choice.stage2));
    }
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
}

struct PathArgs {
  std::string input, response, output, models, grid;
};

void run_path(const PathArgs& a) {
  Frame f = split_frame(load_table(a.input), a.response);
  Dataset d = dataset_from(f);
  std::vector<double> grid = grid_for(d, a.grid);
  std::vector<AdditiveModel> models;
  try {
    models = liso_path(d, grid, {});
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
  emit(a.output, path_summary_csv(grid, models, f.columns));
  if (!a.models.empty()) emit(a.models, models_to_json(models, f.columns, a.response));
}

struct SignArgs {
  std::string input, response, output;
  double lambda = -1.0;
  double lambda0 = -1.0;
};

void run_signfit(const SignArgs& a) {
  Frame f = split_frame(load_table(a.input), a.response);
  Dataset d = dataset_from(f);
  if (!(a.lambda >= 0.0)) throw CliFailure("E_ARGS", "--lambda must be >= 0");
  double l0 = a.lambda0 >= 0.0 ? a.lambda0 : a.lambda;
  SignedModel m;
  try {
    m = adaptive_sign_discovery(d, l0, a.lambda);
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_DATA", e.what());
  }
  emit(a.output, signed_model_to_json(m, f.columns, a.response));
}

struct SimArgs {
  std::string scenario = "mixed_powers", output;
  std::vector<std::string> methods{"plain", "adaptive", "scad"};
  std::size_t n = 200, p = 50, reps = 30, n_test = 1000;
  double snr = 7.0;
  bool correlated = false;
  std::uint64_t seed = 0;
};

void run_simulate(const SimArgs& a) {
  SimScenario sc;
  try {
    sc.kind = scenario_from_name(a.scenario);
    sc.n = a.n;
    sc.p = a.p;
    sc.snr = a.snr;
    sc.correlated = a.correlated;
    sc.seed = a.seed;
    sc.n_test = a.n_test;
    std::vector<Method> methods;
    for (const std::string& name : a.methods) methods.push_back(method_from_name(name));
    StudyResult res = comparison_study(sc, methods, a.reps);
    emit(a.output, study_csv(res.rows));
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_ARGS", e.what());
  }
}

struct RecoveryArgs {
  std::string output;
  std::vector<std::size_t> p_list{32, 128};
  std::vector<std::size_t> n_list{20, 60, 100, 140};
  std::size_t reps = 25;
  RecoveryConfig cfg;
  std::uint64_t seed = 0;
};

void run_recovery(const RecoveryArgs& a) {
  try {
    RecoveryResult res = recovery_study(a.p_list, a.n_list, a.reps, a.seed, a.cfg);
    emit(a.output, recovery_csv(res));
  } catch (const std::invalid_argument& e) {
    throw CliFailure("E_ARGS", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse additive isotonic regression (total-variation penalised)"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit an additive monotone model at one penalty");
  fit_cmd->add_option("--input,-i", fit_args.input, "input csv")->required();
  fit_cmd->add_option("--response,-r", fit_args.response, "response column name")->required();
  fit_cmd->add_option("--lambda,-l", fit_args.lambda, "penalty level (>= 0)")->required();
  fit_cmd->add_option("--lambda0", fit_args.lambda0,
                      "pilot penalty for adaptive/scad (defaults to --lambda)");
  fit_cmd->add_option("--direction", fit_args.directions,
                      "per-column monotonicity, col=inc|dec|auto (repeatable)");
  fit_cmd->add_option("--variant", fit_args.variant, "plain|adaptive|scad");
  fit_cmd->add_option("--output,-o", fit_args.output, "model json path (stdout when omitted)");
  fit_cmd->callback([&] { run_fit(fit_args); });

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "evaluate a stored model on new rows");
  predict_cmd->add_option("--model,-m", predict_args.model, "model json path")->required();
  predict_cmd->add_option("--input,-i", predict_args.input, "input csv")->required();
  predict_cmd->add_option("--output,-o", predict_args.output, "predictions csv path");
  predict_cmd->add_flag("--interpolate", predict_args.interpolate,
                        "interpolate linearly between knots");
  predict_cmd->callback([&] { run_predict(predict_args); });

  CvArgs cv_args;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation over a penalty grid");
  cv_cmd->add_option("--input,-i", cv_args.input, "input csv")->required();
  cv_cmd->add_option("--response,-r", cv_args.response, "response column name")->required();
  cv_cmd->add_option("--grid,-g", cv_args.grid,
                     "max:min:count[:log] (defaults to a data-driven grid)");
  cv_cmd->add_option("--folds,-k", cv_args.folds, "fold count (default 10)");
  cv_cmd->add_option("--variant", cv_args.variant, "plain|adaptive|scad");
  cv_cmd->add_option("--seed,-s", cv_args.seed, "fold assignment seed");
  cv_cmd->add_option("--output,-o", cv_args.output,
                     "report json path; a sibling .csv is written next to it");
  cv_cmd->callback([&] { run_cv(cv_args); });

  PathArgs path_args;
  auto* path_cmd = app.add_subcommand("path", "warm-started fits over a penalty grid");
  path_cmd->add_option("--input,-i", path_args.input, "input csv")->required();
  path_cmd->add_option("--response,-r", path_args.response, "response column name")->required();
  path_cmd->add_option("--grid,-g", path_args.grid,
                       "max:min:count[:log] (defaults to a data-driven grid)");
  path_cmd->add_option("--output,-o", path_args.output, "per-lambda summary csv path");
  path_cmd->add_option("--models", path_args.models, "optional json path for the fitted models");
  path_cmd->callback([&] { run_path(path_args); });

  SignArgs sign_args;
  auto* sign_cmd =
      app.add_subcommand("signfit", "two-stage sign discovery (no monotonicity assumed)");
  sign_cmd->add_option("--input,-i", sign_args.input, "input csv")->required();
  sign_cmd->add_option("--response,-r", sign_args.response, "response column name")->required();
  sign_cmd->add_option("--lambda,-l", sign_args.lambda, "stage-two penalty (>= 0)")->required();
  sign_cmd->add_option("--lambda0", sign_args.lambda0,
                       "stage-one penalty (defaults to --lambda)");
  sign_cmd->add_option("--output,-o", sign_args.output, "signed model json path");
  sign_cmd->callback([&] { run_signfit(sign_args); });

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "scenario comparison study");
  sim_cmd->add_option("--scenario", sim_args.scenario, "all_linear|mixed_powers|artificial_4var");
  sim_cmd->add_option("--n", sim_args.n, "training rows (default 200)");
  sim_cmd->add_option("--p", sim_args.p, "covariates (default 50)");
  sim_cmd->add_option("--n-test", sim_args.n_test, "noiseless test rows (default 1000)");
  sim_cmd->add_option("--snr", sim_args.snr, "signal-to-noise ratio (default 7)");
  sim_cmd->add_flag("--correlated", sim_args.correlated, "gaussian-copula design");
  sim_cmd->add_option("--methods", sim_args.methods, "subset of plain,adaptive,scad")
      ->delimiter(',');
  sim_cmd->add_option("--reps", sim_args.reps, "replications (default 30)");
  sim_cmd->add_option("--seed,-s", sim_args.seed, "master seed");
  sim_cmd->add_option("--output,-o", sim_args.output, "study csv path");
  sim_cmd->callback([&] { run_simulate(sim_args); });

  RecoveryArgs rec_args;
  auto* rec_cmd = app.add_subcommand("recovery", "sparsity recovery proportions");
  rec_cmd->add_option("--p-list", rec_args.p_list, "covariate counts")->delimiter(',');
  rec_cmd->add_option("--n-list", rec_args.n_list, "subsample sizes")->delimiter(',');
  rec_cmd->add_option("--reps", rec_args.reps, "replications per cell (default 25)");
  rec_cmd->add_option("--snr", rec_args.cfg.snr, "signal-to-noise ratio (default 4)");
  rec_cmd->add_option("--master-n", rec_args.cfg.master_n, "master sample size (default 1024)");
  rec_cmd->add_option("--grid-count", rec_args.cfg.grid_count, "grid points (default 100)");
  rec_cmd->add_option("--grid-min-ratio", rec_args.cfg.grid_min_ratio,
                      "grid floor as a fraction of lambda_max (default 1e-3)");
  rec_cmd->add_option("--seed,-s", rec_args.seed, "master seed");
  rec_cmd->add_option("--output,-o", rec_args.output, "recovery csv path");
  rec_cmd->callback([&] { run_recovery(rec_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error[E_ARGS]: " << e.what() << "\n";
    return 1;
  } catch (const CliFailure& e) {
    std::cerr << "error[" << e.code << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[E_INTERNAL]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
