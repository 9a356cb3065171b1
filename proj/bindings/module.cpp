#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "liso/backfit.hpp"
#include "liso/modelsel.hpp"
#include "liso/pava.hpp"
#include "liso/serialize.hpp"
#include "liso/shrink.hpp"
#include "liso/variants.hpp"

namespace py = pybind11;
using namespace liso;

namespace {

std::vector<Direction> directions_from_names(const std::vector<std::string>& names) {
  std::vector<Direction> dirs;
  dirs.reserve(names.size());
  for (const std::string& n : names) dirs.push_back(direction_from_name(n));
  return dirs;
}

LisoConfig config_from(double lam, const std::vector<double>& weights,
                       const std::vector<std::string>& directions) {
  LisoConfig c;
  c.lambda = lam;
  c.penalty_weights = weights;
  c.directions = directions_from_names(directions);
  return c;
}

}  // namespace

PYBIND11_MODULE(_liso, m) {
  m.doc() = "sparse additive isotonic regression with a total-variation penalty";

  py::class_<StepFunction>(m, "StepFunction")
      .def(py::init<>())
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("knots"),
           py::arg("values"))
      .def_property_readonly("knots", &StepFunction::knots)
      .def_property_readonly("values", &StepFunction::values)
      .def("__call__", [](const StepFunction& f, double x) { return f(x); }, py::arg("x"))
      .def("total_variation", &StepFunction::total_variation)
      .def("__len__", &StepFunction::size)
      .def("__repr__", [](const StepFunction& f) {
        return "StepFunction(" + std::to_string(f.size()) + " knots)";
      });

  py::class_<AdditiveModel>(m, "Model")
      .def_property_readonly("intercept", [](const AdditiveModel& m_) { return m_.intercept; })
      .def_property_readonly("lam", [](const AdditiveModel& m_) { return m_.lambda; })
      .def_property_readonly("p", [](const AdditiveModel& m_) { return m_.p(); })
      .def_property_readonly("converged",
                             [](const AdditiveModel& m_) { return m_.diagnostics.converged; })
      .def_property_readonly("cycles",
                             [](const AdditiveModel& m_) { return m_.diagnostics.cycles; })
      .def("component", [](const AdditiveModel& m_, std::size_t k) { return m_.components.at(k); },
           py::arg("k"))
      .def("directions",
           [](const AdditiveModel& m_) {
             std::vector<std::string> out;
             for (Direction d : m_.directions) out.push_back(direction_name(d));
             return out;
           })
      .def("active",
           [](const AdditiveModel& m_) {
             std::vector<std::size_t> out;
             for (std::size_t k = 0; k < m_.p(); ++k)
               if (m_.component_active(k)) out.push_back(k);
             return out;
           })
      .def("predict",
           [](const AdditiveModel& m_, const std::vector<std::vector<double>>& columns,
              bool interpolate) { return predict(m_, columns, interpolate); },
           py::arg("columns"), py::arg("interpolate") = false)
      .def("to_json", [](const AdditiveModel& m_) { return model_to_json(m_); })
      .def("__repr__", [](const AdditiveModel& m_) {
        return "Model(p=" + std::to_string(m_.p()) +
               ", active=" + std::to_string(m_.active_count()) + ")";
      });

  m.def("model_from_json", [](const std::string& text) { return model_from_json(text).model; },
        py::arg("text"));

  m.def(
      "fit",
      [](const std::vector<double>& y, const std::vector<std::vector<double>>& columns,
         double lam, const std::vector<double>& weights,
         const std::vector<std::string>& directions, const std::vector<double>& penalty_weights) {
        Dataset d = Dataset::make(y, columns, weights);
        return liso_fit(d, config_from(lam, penalty_weights, directions));
      },
      py::arg("y"), py::arg("columns"), py::arg("lam"),
      py::arg("weights") = std::vector<double>{}, py::arg("directions") = std::vector<std::string>{},
      py::arg("penalty_weights") = std::vector<double>{},
      "Backfitted additive isotonic fit at one penalty level");

  m.def(
      "fit_adaptive",
      [](const std::vector<double>& y, const std::vector<std::vector<double>>& columns,
         double lam0, double lam1, const std::string& scheme) {
        Dataset d = Dataset::make(y, columns);
        ReweightSpec spec =
            scheme == "scad" ? ReweightSpec::scad() : ReweightSpec::adaptive();
        return adaptive_liso(d, lam0, lam1, spec);
      },
      py::arg("y"), py::arg("columns"), py::arg("lam0"), py::arg("lam1"),
      py::arg("scheme") = "adaptive", "Two-stage reweighted fit");

  m.def(
      "lambda_max",
      [](const std::vector<double>& y, const std::vector<std::vector<double>>& columns) {
        return lambda_max(Dataset::make(y, columns), LisoConfig{});
      },
      py::arg("y"), py::arg("columns"),
      "Smallest penalty at which the fitted model is identically zero");

  m.def(
      "univariate",
      [](const std::vector<double>& x, const std::vector<double>& y, double lam,
         const std::vector<double>& weights) {
        std::vector<double> w = weights.empty() ? std::vector<double>(x.size(), 1.0) : weights;
        return univariate_liso(merge_ties(x, y, w), lam);
      },
      py::arg("x"), py::arg("y"), py::arg("lam"), py::arg("weights") = std::vector<double>{},
      "Winsorized isotonic fit on one covariate; ties are merged");

  m.def(
      "cv",
      [](const std::vector<double>& y, const std::vector<std::vector<double>>& columns, int folds,
         std::uint64_t seed, std::size_t grid_count, double grid_min_ratio) {
        Dataset d = Dataset::make(y, columns);
        auto grid = default_lambda_grid(d, {}, grid_count, grid_min_ratio);
        CvReport rep = cross_validate(d, grid, folds, plain_path_fitter(), seed);
        py::dict out;
        out["grid"] = rep.grid;
        out["mean_mse"] = rep.mean_mse;
        out["sd_mse"] = rep.sd_mse;
        out["lambda_min"] = rep.lambda_min;
        out["lambda_1se"] = rep.lambda_1se;
        return out;
      },
      py::arg("y"), py::arg("columns"), py::arg("folds") = 10, py::arg("seed") = 0,
      py::arg("grid_count") = 50, py::arg("grid_min_ratio") = 1e-3,
      "k-fold cross-validation over a warm-started penalty grid");

  m.attr("__version__") = "1.0.0";
}
