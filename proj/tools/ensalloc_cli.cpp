#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ensalloc/csv.hpp"
#include "ensalloc/experiment.hpp"
#include "ensalloc/synthetic.hpp"
#include "ensalloc/verify.hpp"

namespace fs = std::filesystem;
using namespace ensalloc;

namespace {

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig config =
      config_path.empty() ? ExperimentConfig() : ExperimentConfig::from_file(config_path);
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("override must be key=value, got: " + kv);
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

void add_config_options(CLI::App* cmd, std::string* config_path,
                        std::vector<std::string>* overrides) {
  cmd->add_option("-c,--config", *config_path, "experiment config file (key = value)");
  cmd->add_option("-s,--set", *overrides, "override a config key, e.g. --set q_points=21")
      ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glass-box/black-box ensemble allocation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run_cmd = app.add_subcommand("run", "run one full experiment");
  add_config_options(run_cmd, &config_path, &overrides);

  auto* rep_cmd = app.add_subcommand("replicate", "run the experiment over replicate seeds");
  add_config_options(rep_cmd, &config_path, &overrides);

  auto* feat_cmd = app.add_subcommand("ablate-features",
                                      "test AUC of allocators per feature set");
  add_config_options(feat_cmd, &config_path, &overrides);

  auto* comp_cmd = app.add_subcommand(
      "ablate-components", "individual vs combined component-model selection");
  add_config_options(comp_cmd, &config_path, &overrides);

  auto* gen_cmd = app.add_subcommand("gen-data", "write the synthetic dataset as CSV");
  std::string gen_out = "synthetic.csv";
  int gen_n = 2000;
  std::uint64_t gen_seed = 1;
  double gen_noise = 0.05;
  gen_cmd->add_option("-o,--out", gen_out, "output CSV path");
  gen_cmd->add_option("-n", gen_n, "number of observations");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--noise", gen_noise, "label flip rate");

  auto* verify_cmd = app.add_subcommand(
      "verify", "brute-force check of the allocation optimality guarantees");
  std::uint64_t verify_seed = 20240501;
  int verify_instances = 200;
  verify_cmd->add_option("--seed", verify_seed, "rng seed");
  verify_cmd->add_option("--instances", verify_instances, "random instances to test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const ExperimentConfig config = load_config(config_path, overrides);
      const RunResult result = run_experiment(config);
      std::cout << result.report.dump(2) << '\n';
    } else if (rep_cmd->parsed()) {
      const ExperimentConfig config = load_config(config_path, overrides);
      const ReplicateSummary summary = replicate(config);
      std::cout << summary.aggregate.dump(2) << '\n';
    } else if (feat_cmd->parsed()) {
      const ExperimentConfig config = load_config(config_path, overrides);
      const std::vector<FeatureAblationRow> rows = ablate_features(config);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const FeatureAblationRow& row : rows) {
        j.push_back({{"feature_set", row.feature_set}, {"test_auc", row.test_auc}});
      }
      if (config.write_artifacts) {
        fs::create_directories(config.output_dir);
        std::ofstream out(fs::path(config.output_dir) / "feature_ablation.json");
        out << j.dump(2) << '\n';
      }
      std::cout << j.dump(2) << '\n';
    } else if (comp_cmd->parsed()) {
      const ExperimentConfig config = load_config(config_path, overrides);
      const ComponentSelectionResult result = ablate_components(config);
      nlohmann::ordered_json j;
      j["glass_individual"] = to_string(config.glass_families[static_cast<std::size_t>(
          result.glass_individual)]);
      j["black_individual"] = to_string(config.black_families[static_cast<std::size_t>(
          result.black_individual)]);
      j["glass_combined"] = to_string(config.glass_families[static_cast<std::size_t>(
          result.glass_combined)]);
      j["black_combined"] = to_string(config.black_families[static_cast<std::size_t>(
          result.black_combined)]);
      j["match"] = result.match;
      j["auc_delta_test"] = result.auc_delta_test;
      if (config.write_artifacts) {
        fs::create_directories(config.output_dir);
        std::ofstream out(fs::path(config.output_dir) / "component_ablation.json");
        out << j.dump(2) << '\n';
      }
      std::cout << j.dump(2) << '\n';
    } else if (gen_cmd->parsed()) {
      const Dataset data = gen_complementary_2d(gen_n, gen_seed, gen_noise);
      save_csv(data, gen_out);
      save_sidecar(data, std::nullopt, gen_out + ".meta.json");
      std::cout << "wrote " << gen_out << " (" << data.size() << " observations)\n";
    } else if (verify_cmd->parsed()) {
      const std::vector<VerifyResult> results =
          verify_allocation_optimality(verify_seed, verify_instances);
      bool all_pass = true;
      for (const VerifyResult& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.pass) std::cout << "  (" << r.detail << ")";
        std::cout << '\n';
        all_pass = all_pass && r.pass;
      }
      return all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
