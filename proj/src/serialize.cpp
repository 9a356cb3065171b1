#include "liso/serialize.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>
#include <utility>

#include "json.hpp"

namespace liso {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::increasing: return "increasing";
    case Direction::decreasing: return "decreasing";
    case Direction::unconstrained: return "unconstrained";
  }
  return "unknown";
}

Direction direction_from_name(const std::string& name) {
  if (name == "increasing") return Direction::increasing;
  if (name == "decreasing") return Direction::decreasing;
  if (name == "unconstrained") return Direction::unconstrained;
  throw std::invalid_argument("unknown direction: " + name);
}

namespace {

json step_to_node(const StepFunction& f) {
  return json{{"knots", f.knots()}, {"values", f.values()}};
}

StepFunction step_from_node(const json& node) {
  std::vector<double> knots = node.at("knots").get<std::vector<double>>();
  std::vector<double> values = node.at("values").get<std::vector<double>>();
  if (knots.empty() && values.empty()) return StepFunction{};
  return StepFunction(std::move(knots), std::move(values));
}

json diagnostics_to_node(const FitDiagnostics& d) {
  json node{{"cycles", d.cycles},
            {"final_loss", d.final_loss},
            {"converged", d.converged},
            {"last_loss_decrease", d.last_loss_decrease},
            {"last_max_change", d.last_max_change}};
  if (!d.note.empty()) node["note"] = d.note;
  return node;
}

FitDiagnostics diagnostics_from_node(const json& node) {
  FitDiagnostics d;
  d.cycles = node.at("cycles").get<int>();
  d.final_loss = node.at("final_loss").get<double>();
  d.converged = node.at("converged").get<bool>();
  d.last_loss_decrease = node.at("last_loss_decrease").get<double>();
  d.last_max_change = node.at("last_max_change").get<double>();
  if (node.contains("note")) d.note = node.at("note").get<std::string>();
  return d;
}

json model_to_node(const AdditiveModel& m, const std::vector<std::string>& columns,
                   const std::string& response) {
  if (!columns.empty() && columns.size() != m.p())
    throw std::invalid_argument("model_to_json: column name count mismatch");
  json comps = json::array();
  for (std::size_t k = 0; k < m.p(); ++k) {
    json c = step_to_node(m.components[k]);
    c["covariate"] = k;
    c["direction"] = direction_name(m.directions[k]);
    if (!columns.empty()) c["name"] = columns[k];
    comps.push_back(std::move(c));
  }
  json node{{"intercept", m.intercept},
            {"lambda", m.lambda},
            {"components", std::move(comps)},
            {"diagnostics", diagnostics_to_node(m.diagnostics)}};
  if (!columns.empty()) node["columns"] = columns;
  if (!response.empty()) node["response"] = response;
  return node;
}

AdditiveModel model_from_node(const json& node) {
  AdditiveModel m;
  m.intercept = node.at("intercept").get<double>();
  m.lambda = node.at("lambda").get<double>();
  const json& comps = node.at("components");
  m.components.resize(comps.size());
  m.directions.assign(comps.size(), Direction::increasing);
  for (const json& c : comps) {
    std::size_t k = c.at("covariate").get<std::size_t>();
    if (k >= m.components.size())
      throw std::invalid_argument("model json: covariate index out of range");
    m.components[k] = step_from_node(c);
    m.directions[k] = direction_from_name(c.at("direction").get<std::string>());
  }
  if (node.contains("diagnostics")) m.diagnostics = diagnostics_from_node(node.at("diagnostics"));
  return m;
}

void names_from_node(const json& node, std::vector<std::string>& columns, std::string& response) {
  if (node.contains("columns")) columns = node.at("columns").get<std::vector<std::string>>();
  if (node.contains("response")) response = node.at("response").get<std::string>();
}

json parse(const std::string& text, const char* what) {
  json node = json::parse(text, nullptr, false);
  if (node.is_discarded()) throw std::invalid_argument(std::string(what) + ": malformed json");
  return node;
}

// json.exception -> invalid_argument so callers see one failure type
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string model_to_json(const AdditiveModel& m, const std::vector<std::string>& columns,
                          const std::string& response) {
  return model_to_node(m, columns, response).dump(2) + "\n";
}

ModelEnvelope model_from_json(const std::string& text) {
  return guarded("model json", [&] {
    json node = parse(text, "model json");
    ModelEnvelope env;
    env.model = model_from_node(node);
    names_from_node(node, env.columns, env.response);
    return env;
  });
}

std::string signed_model_to_json(const SignedModel& m, const std::vector<std::string>& columns,
                                 const std::string& response) {
  json node = model_to_node(m.model, columns, response);
  for (std::size_t k = 0; k < m.model.p(); ++k) {
    node["components"][k]["plus"] = step_to_node(m.plus[k]);
    node["components"][k]["minus"] = step_to_node(m.minus[k]);
  }
  return node.dump(2) + "\n";
}

SignedEnvelope signed_model_from_json(const std::string& text) {
  return guarded("signed model json", [&] {
    json node = parse(text, "signed model json");
    SignedEnvelope env;
    env.model.model = model_from_node(node);
    std::size_t p = env.model.model.p();
    env.model.plus.resize(p);
    env.model.minus.resize(p);
    for (const json& c : node.at("components")) {
      std::size_t k = c.at("covariate").get<std::size_t>();
      env.model.plus[k] = step_from_node(c.at("plus"));
      env.model.minus[k] = step_from_node(c.at("minus"));
    }
    names_from_node(node, env.columns, env.response);
    return env;
  });
}

std::string models_to_json(const std::vector<AdditiveModel>& models,
                           const std::vector<std::string>& columns,
                           const std::string& response) {
  json arr = json::array();
  for (const AdditiveModel& m : models) arr.push_back(model_to_node(m, columns, response));
  return arr.dump(2) + "\n";
}

std::vector<AdditiveModel> models_from_json(const std::string& text) {
  return guarded("models json", [&] {
    json arr = parse(text, "models json");
    if (!arr.is_array()) throw std::invalid_argument("models json: expected an array");
    std::vector<AdditiveModel> models;
    models.reserve(arr.size());
    for (const json& node : arr) models.push_back(model_from_node(node));
    return models;
  });
}

namespace {

json cv_report_to_node(const CvReport& r) {
  return json{{"grid", r.grid},         {"fold_mse", r.fold_mse},
              {"mean_mse", r.mean_mse}, {"sd_mse", r.sd_mse},
              {"lambda_min", r.lambda_min}, {"lambda_1se", r.lambda_1se},
              {"folds", r.folds},       {"seed", r.seed}};
}

}  // namespace

std::string cv_report_to_json(const CvReport& r) { return cv_report_to_node(r).dump(2) + "\n"; }

CvReport cv_report_from_json(const std::string& text) {
  return guarded("cv json", [&] {
    json node = parse(text, "cv json");
    CvReport r;
    r.grid = node.at("grid").get<std::vector<double>>();
    r.fold_mse = node.at("fold_mse").get<std::vector<std::vector<double>>>();
    r.mean_mse = node.at("mean_mse").get<std::vector<double>>();
    r.sd_mse = node.at("sd_mse").get<std::vector<double>>();
    r.lambda_min = node.at("lambda_min").get<double>();
    r.lambda_1se = node.at("lambda_1se").get<double>();
    r.folds = node.at("folds").get<int>();
    r.seed = node.at("seed").get<std::uint64_t>();
    return r;
  });
}

std::string two_stage_to_json(const TwoStageChoice& c) {
  json node{{"lambda0", c.lambda0},
            {"lambda1", c.lambda1},
            {"stage1", cv_report_to_node(c.stage1)},
            {"stage2", cv_report_to_node(c.stage2)}};
  return node.dump(2) + "\n";
}

std::string cv_report_csv(const CvReport& r) {
  std::string out = "lambda,mean_mse,sd_mse\n";
  for (std::size_t j = 0; j < r.grid.size(); ++j) {
    out += format_double(r.grid[j]);
    out += ',';
    out += format_double(r.mean_mse[j]);
    out += ',';
    out += format_double(r.sd_mse[j]);
    out += '\n';
  }
  return out;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::string out = "scenario,method,snr,mean_mse,mean_relative_mse,se\n";
  for (const StudyRow& r : rows) {
    out += r.scenario;
    out += ',';
    out += r.method;
    out += ',';
    out += format_double(r.snr);
    out += ',';
    out += format_double(r.mean_mse);
    out += ',';
    out += format_double(r.mean_relative_mse);
    out += ',';
    out += format_double(r.se);
    out += '\n';
  }
  return out;
}

std::string recovery_csv(const RecoveryResult& r) {
  std::string out = "p,n,proportion\n";
  for (std::size_t pi = 0; pi < r.p_list.size(); ++pi)
    for (std::size_t ni = 0; ni < r.n_list.size(); ++ni) {
      out += std::to_string(r.p_list[pi]);
      out += ',';
      out += std::to_string(r.n_list[ni]);
      out += ',';
      out += format_double(r.proportion[pi][ni]);
      out += '\n';
    }
  return out;
}

std::string predictions_csv(const std::vector<double>& predictions) {
  std::string out = "prediction\n";
  for (double v : predictions) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

std::string path_summary_csv(const std::vector<double>& grid,
                             const std::vector<AdditiveModel>& models,
                             const std::vector<std::string>& columns) {
  if (grid.size() != models.size())
    throw std::invalid_argument("path_summary_csv: grid and model counts differ");
  std::string out = "lambda,active";
  std::size_t p = models.empty() ? columns.size() : models.front().p();
  for (std::size_t k = 0; k < p; ++k) {
    out += ",tv_";
    out += k < columns.size() ? columns[k] : "x" + std::to_string(k + 1);
  }
  out += '\n';
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out += format_double(grid[j]);
    out += ',';
    out += std::to_string(models[j].active_count());
    for (std::size_t k = 0; k < p; ++k) {
      out += ',';
      const StepFunction& f = models[j].components[k];
      out += format_double(f.empty() ? 0.0 : f.total_variation());
    }
    out += '\n';
  }
  return out;
}

}  // namespace liso
