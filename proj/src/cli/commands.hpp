#pragma once

#include <string>
#include <vector>

#include "cli/config.hpp"

namespace contoursel::cli {

// Every command writes its artifacts under config.output_root() and returns a
// one-line summary. Failures throw contoursel::Error.
std::string cmd_probe(const ExperimentConfig& c);
std::string cmd_render(const ExperimentConfig& c);
std::string cmd_gen_perf(const ExperimentConfig& c);
std::string cmd_train(const ExperimentConfig& c);
std::string cmd_evaluate(const ExperimentConfig& c);
std::string cmd_report(const ExperimentConfig& c);
std::string cmd_stats(const ExperimentConfig& c);
// Throws check_failed when the max relative error is not below 1e-4.
std::string cmd_gradcheck(const ExperimentConfig& c);

const std::vector<std::string>& command_names();
std::string run_command(const std::string& name, const ExperimentConfig& c);

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr int kGradCheckSeeds = 5;

}  // namespace contoursel::cli
