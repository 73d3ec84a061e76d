#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lens/bench.hpp"
#include "lens/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct GlobalFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string mode;
  std::string scorer;
  std::string csa;
  int k = 0;
  int jobs = 0;

  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* scorer_opt = nullptr;
  CLI::Option* csa_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

lens::BenchConfig build_config(const GlobalFlags& flags) {
  lens::BenchConfig config;
  if (flags.config_opt->count() > 0) config = lens::parse_config_file(flags.config_path);
  if (flags.seed_opt->count() > 0) config.seeds = {flags.seed};
  if (flags.out_opt->count() > 0) config.out = flags.out;
  if (flags.mode_opt->count() > 0) {
    lens::apply_config_entry(config, "mode", flags.mode, "--mode");
  }
  if (flags.scorer_opt->count() > 0) {
    lens::apply_config_entry(config, "scorer", flags.scorer, "--scorer");
  }
  if (flags.csa_opt->count() > 0) lens::apply_config_entry(config, "csa", flags.csa, "--csa");
  if (flags.k_opt->count() > 0) config.k = flags.k;
  if (flags.jobs_opt->count() > 0) config.jobs = flags.jobs;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lens: scene- and model-specific camera sensor parameter selection benchmark"};
  app.require_subcommand(1);

  GlobalFlags flags;
  flags.config_opt = app.add_option("--config", flags.config_path, "key=value config file");
  flags.seed_opt = app.add_option("--seed", flags.seed, "single master seed (overrides seeds)");
  flags.out_opt = app.add_option("--out", flags.out, "output directory");
  flags.mode_opt = app.add_option("--mode", flags.mode, "scene mode")
                       ->check(CLI::IsMember({"luminous", "reflective"}));
  flags.scorer_opt = app.add_option("--scorer", flags.scorer, "quality scorer")
                         ->check(CLI::IsMember({"confidence", "knn", "react", "ash", "vim"}));
  flags.csa_opt = app.add_option("--csa", flags.csa, "candidate selection algorithm")
                      ->check(CLI::IsMember({"full", "csa1", "csa2", "csa3"}));
  flags.k_opt = app.add_option("--k", flags.k, "candidate count for CSAs");
  flags.jobs_opt = app.add_option("--jobs", flags.jobs, "worker threads");

  CLI::App* gen = app.add_subcommand("gen", "generate and write the scene set");
  CLI::App* train = app.add_subcommand("train", "train the target model and write a checkpoint");
  CLI::App* run = app.add_subcommand("run", "full benchmark: report, results, score matrices");
  CLI::App* sweep = app.add_subcommand("sweep", "CSA cost/accuracy sweep");
  std::string sweep_csas = "csa1,csa2,csa3";
  std::string sweep_ks;
  sweep->add_option("--csas", sweep_csas, "comma list of CSAs to sweep");
  sweep->add_option("--ks", sweep_ks, "comma list of k values");
  CLI::App* heatmap = app.add_subcommand("heatmap", "per-scene score grid export");
  std::string heatmap_scene;
  std::string heatmap_light = "L1";
  heatmap->add_option("--scene", heatmap_scene, "scene id")->required();
  heatmap->add_option("--light", heatmap_light, "light id");
  CLI::App* ablate = app.add_subcommand("ablate", "scorer ablation table");
  CLI::App* replay = app.add_subcommand("replay", "evaluate policies over score matrices");
  std::vector<std::string> score_files;
  replay->add_option("--scores", score_files, "score matrix CSV (repeatable)")->required();
  for (CLI::App* sub : {gen, train, run, sweep, heatmap, ablate, replay}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const lens::BenchConfig config = build_config(flags);
    if (gen->parsed()) {
      lens::cmd_gen(config);
      std::cout << "scene set written to " << config.out << "/scenes\n";
    } else if (train->parsed()) {
      lens::cmd_train(config);
      std::cout << "model checkpoint written to " << config.out << "/model.json\n";
    } else if (run->parsed()) {
      const lens::BenchReport report = lens::cmd_run(config);
      for (const lens::PolicyStats& p : report.policies) {
        std::cout << p.policy_id << ": accuracy " << p.accuracy_mean << " (std " << p.accuracy_std
                  << "), mean cost " << p.mean_cost_s << " s\n";
      }
      std::cout << "report written to " << config.out << "/report.json\n";
    } else if (sweep->parsed()) {
      std::vector<lens::Csa> csas;
      std::size_t start = 0;
      while (start <= sweep_csas.size()) {
        const std::size_t comma = sweep_csas.find(',', start);
        const std::string item = sweep_csas.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) csas.push_back(lens::csa_from_string(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      lens::BenchConfig sweep_config = config;
      if (!sweep_ks.empty()) {
        lens::apply_config_entry(sweep_config, "ks", sweep_ks, "--ks");
      }
      lens::cmd_sweep(sweep_config, csas, sweep_config.ks);
      std::cout << "sweep written to " << config.out << "/sweep.csv\n";
    } else if (heatmap->parsed()) {
      lens::cmd_heatmap(config, heatmap_scene, heatmap_light);
      std::cout << "heatmap written to " << config.out << "\n";
    } else if (ablate->parsed()) {
      lens::cmd_ablate(config);
      std::cout << "ablation written to " << config.out << "/ablation.csv\n";
    } else if (replay->parsed()) {
      std::filesystem::create_directories(config.out);
      for (const std::string& file : score_files) {
        const lens::ScoreMatrix matrix = lens::load_scores(file);
        lens::ReplayOptions options;
        options.csa = config.csa;
        options.k = config.k;
        options.seeds = config.seeds;
        options.ae_mode = config.ae_mode;
        const lens::ReplayReport report = lens::replay_evaluate(matrix, options);
        const std::string stem = std::filesystem::path(file).stem().string();
        const std::string out_path = config.out + "/replay_" + stem + ".json";
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw lens::DataError("cannot open for writing: " + out_path);
        out << report.to_json().dump(2) << "\n";
        std::cout << "replay report written to " << out_path << "\n";
      }
    }
    return 0;
  } catch (const lens::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lens::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const lens::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
