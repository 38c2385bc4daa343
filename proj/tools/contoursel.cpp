// Command-line front end over the C interface.
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "contoursel/contoursel.h"

namespace {

// One machine-parsable line on stderr, then the status as exit code.
int report(cs_status status, const std::string& message) {
  std::string flat = message;
  for (char& ch : flat)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::cerr << "error code=" << cs_status_name(status) << " status=" << static_cast<int>(status)
            << " message=" << nlohmann::json(flat).dump() << '\n';
  return static_cast<int>(status);
}

int fromLibrary(cs_status status) { return report(status, cs_last_error()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contour-image algorithm selection toolkit"};
  app.set_version_flag("--version", std::string(cs_version()));

  const std::vector<std::string> commands = {"probe",    "render", "gen-perf", "train",
                                             "evaluate", "report", "stats",    "gradcheck"};
  std::string command, config_path, variant;
  std::uint64_t seed = 0;
  int resolution = 0, levels = 0, threads = 0;
  app.add_option("command", command, "probe | render | gen-perf | train | evaluate | report | stats | gradcheck")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* res_opt = app.add_option("--resolution", resolution, "output contour resolution r")
                      ->check(CLI::Range(2, 4096));
  auto* var_opt = app.add_option("--variant", variant, "model variant")
                      ->check(CLI::IsMember({"combined", "separate"}));
  auto* lev_opt = app.add_option("--levels", levels, "contour levels L (0 = continuous)")
                      ->check(CLI::NonNegativeNumber);
  auto* thr_opt = app.add_option("--threads", threads, "worker threads for folds")
                      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(CS_INVALID_ARGUMENT, e.what());
  }

  cs_config* config = nullptr;
  cs_status st = config_path.empty() ? cs_config_default(&config)
                                     : cs_config_load(config_path.c_str(), &config);
  if (st != CS_OK) return fromLibrary(st);

  // Flags win over the config file.
  nlohmann::json patch = nlohmann::json::object();
  if (*seed_opt) patch["seed"] = seed;
  if (*res_opt) {
    patch["probe"]["r_out"] = resolution;
    patch["model"]["input_resolution"] = resolution;
  }
  if (*var_opt) patch["model"]["variant"] = variant;
  if (*lev_opt) patch["probe"]["levels"] = levels;
  if (*thr_opt) patch["threads"] = threads;
  if (!patch.empty()) {
    st = cs_config_apply(config, patch.dump().c_str());
    if (st != CS_OK) {
      cs_config_free(config);
      return fromLibrary(st);
    }
  }

  std::vector<char> summary(4096);
  st = cs_run_command(config, command.c_str(), summary.data(), summary.size(), nullptr);
  cs_config_free(config);
  if (st != CS_OK) return fromLibrary(st);
  std::cout << command << ": " << summary.data() << '\n';
  return 0;
}
