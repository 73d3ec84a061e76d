#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "lens/bench.hpp"
#include "lens/errors.hpp"

namespace py = pybind11;

namespace {

lens::BenchConfig config_from_text(const std::string& text, const std::string& out_dir) {
  lens::BenchConfig config = lens::parse_config_text(text, "<config>");
  if (!out_dir.empty()) config.out = out_dir;
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sensor parameter selection benchmark core";

  py::register_exception<lens::ConfigError>(m, "ConfigError");
  py::register_exception<lens::DataError>(m, "DataError");

  m.def("grid_options", [] {
    std::vector<py::dict> out;
    const lens::ParamGrid grid = lens::build_default_grid();
    for (int i = 0; i < grid.size(); ++i) {
      const lens::SensorParams& p = grid.options[static_cast<std::size_t>(i)];
      py::dict d;
      d["param_id"] = i;
      d["iso"] = p.iso;
      d["shutter"] = lens::rational_to_string(p.shutter_s);
      d["aperture"] = p.aperture_f;
      out.push_back(std::move(d));
    }
    return out;
  });

  m.def("full_grid_cost", [] {
    const lens::ParamGrid grid = lens::build_default_grid();
    return lens::rational_to_decimal(lens::total_cost(grid.options, lens::CaptureCostModel{}));
  });

  m.def(
      "plan",
      [](const std::string& csa, int k, std::uint64_t seed) {
        const lens::ParamGrid grid = lens::build_default_grid();
        lens::Rng rng(seed);
        const lens::CandidatePlan plan = lens::make_plan(lens::csa_from_string(csa), grid, k,
                                                         lens::CaptureCostModel{}, rng);
        py::dict d;
        d["indices"] = plan.indices;
        d["cost_s"] = lens::rational_to_decimal(plan.total_cost_s);
        return d;
      },
      py::arg("csa"), py::arg("k"), py::arg("seed") = 1);

  m.def(
      "run_benchmark",
      [](const std::string& config_text, const std::string& out_dir) {
        const lens::BenchConfig config = config_from_text(config_text, out_dir);
        const lens::BenchReport report = lens::cmd_run(config);
        return report.to_json(config).dump(2);
      },
      py::arg("config_text"), py::arg("out_dir") = std::string());

  m.def(
      "replay",
      [](const std::string& scores_path, const std::string& csa, int k,
         const std::vector<std::uint64_t>& seeds) {
        const lens::ScoreMatrix matrix = lens::load_scores(scores_path);
        lens::ReplayOptions options;
        options.csa = lens::csa_from_string(csa);
        options.k = k;
        options.seeds = seeds;
        return lens::replay_evaluate(matrix, options).to_json().dump(2);
      },
      py::arg("scores_path"), py::arg("csa") = std::string("full"), py::arg("k") = 27,
      py::arg("seeds") = std::vector<std::uint64_t>{1});

  m.attr("__version__") = "1.0.0";
}
