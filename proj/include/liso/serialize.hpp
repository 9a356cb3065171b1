#pragma once

#include <string>
#include <vector>

#include "liso/backfit.hpp"
#include "liso/dataset.hpp"
#include "liso/modelsel.hpp"
#include "liso/sim.hpp"
#include "liso/step_function.hpp"
#include "liso/variants.hpp"

namespace liso {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

std::string direction_name(Direction d);
Direction direction_from_name(const std::string& name);

// Optional column names and the response name travel with the model so a
// prediction run can line up covariates by header. Parsers throw
// std::invalid_argument on malformed input.
struct ModelEnvelope {
  AdditiveModel model;
  std::vector<std::string> columns;  // empty when the model was unnamed
  std::string response;
};

std::string model_to_json(const AdditiveModel& m,
                          const std::vector<std::string>& columns = {},
                          const std::string& response = "");
ModelEnvelope model_from_json(const std::string& text);

struct SignedEnvelope {
  SignedModel model;
  std::vector<std::string> columns;
  std::string response;
};

std::string signed_model_to_json(const SignedModel& m,
                                 const std::vector<std::string>& columns = {},
                                 const std::string& response = "");
SignedEnvelope signed_model_from_json(const std::string& text);

std::string models_to_json(const std::vector<AdditiveModel>& models,
                           const std::vector<std::string>& columns = {},
                           const std::string& response = "");
std::vector<AdditiveModel> models_from_json(const std::string& text);

std::string cv_report_to_json(const CvReport& r);
CvReport cv_report_from_json(const std::string& text);

std::string two_stage_to_json(const TwoStageChoice& c);

// Plot-ready tables; every number is format_double'd, rows end in \n.
std::string cv_report_csv(const CvReport& r);  // lambda,mean_mse,sd_mse
std::string study_csv(const std::vector<StudyRow>& rows);
std::string recovery_csv(const RecoveryResult& r);  // p,n,proportion
std::string predictions_csv(const std::vector<double>& predictions);
// Per-lambda active covariate count and component variations.
std::string path_summary_csv(const std::vector<double>& grid,
                             const std::vector<AdditiveModel>& models,
                             const std::vector<std::string>& columns);

}  // namespace liso
