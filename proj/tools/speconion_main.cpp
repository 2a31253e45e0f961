// speconion: experiment runner for the spectral-function laboratory.
//
//   speconion <experiment> --config <path> [--threads N] [--out DIR]
//   speconion diff <dirA> <dirB> [--tol T]
//
// Exit codes: 0 pass, 1 numeric fail, 2 usage/config error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "speconion/experiments.hpp"
#include "speconion/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"speconion spectral-function laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int threads = 0;
  std::vector<CLI::App*> subs;
  for (const std::string& name : speconion::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker cap (0 = hardware)");
    subs.push_back(sub);
  }
  std::string dir_a, dir_b;
  double tol = 1e-12;
  CLI::App* diff = app.add_subcommand("diff", "numeric CSV diff of two artifact directories");
  diff->add_option("dirA", dir_a)->required();
  diff->add_option("dirB", dir_b)->required();
  diff->add_option("--tol", tol, "per-cell tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (diff->parsed()) {
      speconion::io::CsvDiffReport rep = speconion::io::diff_artifact_dirs(dir_a, dir_b, tol);
      if (rep.schema_mismatch) {
        std::fprintf(stderr, "diff: %s\n", rep.message.c_str());
        return 2;
      }
      for (const auto& e : rep.exceedances)
        std::fprintf(stderr, "diff: %s row %d col %s: %.17g vs %.17g (tol %.3g)\n",
                     e.file.c_str(), e.row, e.column.c_str(), e.a, e.b, e.tol);
      std::printf(rep.clean() ? "identical within tolerance\n" : "differences found\n");
      return rep.clean() ? 0 : 1;
    }
    for (size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const std::string name = speconion::experiment_names()[i];
      // parse and validate the config before creating any artifacts
      speconion::ExperimentConfig cfg = speconion::ExperimentConfig::parse_file(config_path);
      speconion::RunResult res = speconion::run_experiment(name, cfg, out_dir, threads);
      for (const auto& l : res.notes) std::printf("%s\n", l.c_str());
      return res.exit_code;
    }
  } catch (const speconion::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
