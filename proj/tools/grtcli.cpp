// grtcli — experiment runner for the geodesic ray transform toolkit.
//
//   grtcli list-presets
//   grtcli describe <preset>
//   grtcli run --config cfg.json [--out DIR] [--threads N] [--seed-override S]
//
// Exit codes: 0 success, 1 numerical assertion failure, 2 usage/schema error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "grt/presets.hpp"

namespace {

constexpr const char* kAllowedKeys[] = {"preset", "seed",       "out",
                                        "metric", "field",      "tolerances",
                                        "threads"};

int run_command(const std::string& config_path, std::string out_dir,
                int threads, long long seed_override) {
  (void)threads;  // every preset is deterministic single-threaded work
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << config_path << "\n";
    return 2;
  }
  grt::json cfg_json;
  try {
    cfg_json = grt::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: config parse failure at byte " << e.byte << ": "
              << e.what() << "\n";
    return 2;
  }
  if (!cfg_json.is_object()) {
    std::cerr << "error: config root must be a JSON object\n";
    return 2;
  }
  for (const auto& [key, value] : cfg_json.items()) {
    (void)value;
    bool known = false;
    for (const char* k : kAllowedKeys) known |= key == k;
    if (!known) {
      std::cerr << "error: unknown config key: \"" << key << "\"\n";
      return 2;
    }
  }
  if (!cfg_json.contains("preset") || !cfg_json["preset"].is_string()) {
    std::cerr << "error: config requires a string \"preset\" key\n";
    return 2;
  }

  grt::ExperimentConfig cfg;
  cfg.preset = cfg_json["preset"].get<std::string>();
  cfg.seed = cfg_json.value("seed", std::uint64_t{0});
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  cfg.metric = cfg_json.value("metric", grt::json());
  cfg.field = cfg_json.value("field", grt::json());
  cfg.tolerances = cfg_json.value("tolerances", grt::json());
  if (out_dir.empty()) out_dir = cfg_json.value("out", std::string("."));

  const grt::Preset* preset = grt::find_preset(cfg.preset);
  if (!preset) {
    std::cerr << "error: unknown preset: \"" << cfg.preset << "\"\n";
    return 2;
  }

  grt::PresetResult result;
  try {
    result = preset->run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: preset \"" << cfg.preset << "\" failed: " << e.what()
              << "\n";
    return 2;
  }

  grt::json summary;
  summary["preset"] = cfg.preset;
  summary["seed"] = cfg.seed;
  summary["ok"] = result.ok;
  summary["results"] = result.summary;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::filesystem::path base =
      std::filesystem::path(out_dir) / cfg.preset;
  {
    std::ofstream js(base.string() + "_summary.json", std::ios::binary);
    js << summary.dump(2) << "\n";
  }
  {
    std::ofstream cs(base.string() + ".csv", std::ios::binary);
    cs << result.csv;
  }
  std::cout << summary.dump(2) << "\n";
  return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic ray transform experiment runner"};
  app.require_subcommand(1);

  auto* list_cmd =
      app.add_subcommand("list-presets", "print the preset registry");

  std::string describe_name;
  auto* describe_cmd =
      app.add_subcommand("describe", "show details for one preset");
  describe_cmd->add_option("preset", describe_name, "preset name")->required();

  std::string config_path, out_dir;
  int threads = 0;
  long long seed_override = -1;
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a config");
  run_cmd->add_option("--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory for artifacts");
  run_cmd->add_option("--threads", threads, "worker count (reserved)");
  run_cmd->add_option("--seed-override", seed_override,
                      "replace the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list_cmd->parsed()) {
    for (const grt::Preset& p : grt::preset_registry())
      std::cout << p.name << " -> " << p.description << "\n";
    return 0;
  }
  if (describe_cmd->parsed()) {
    const grt::Preset* p = grt::find_preset(describe_name);
    if (!p) {
      std::cerr << "error: unknown preset: \"" << describe_name << "\"\n";
      return 2;
    }
    std::cout << p->name << "\n  " << p->description << "\n"
              << "  config keys: preset (required), seed, out, metric, field, "
                 "tolerances, threads\n";
    return 0;
  }
  return run_command(config_path, out_dir, threads, seed_override);
}
