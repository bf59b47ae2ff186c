#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "anmvae/config_text.hpp"
#include "anmvae/vae/config.hpp"

// Library form of the `anmvae` command line. Every command returns a process
// exit code and reports failures on `err`.
namespace anmvae::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

/// Loads an experiment config, applies `section.key=value` overrides, and
/// lets the ANMVAE_SEED environment variable replace model and prior seeds.
ConfigText load_experiment(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});
void apply_override(ConfigText& cfg, const std::string& assignment);
void apply_seed_env(ConfigText& cfg);
/// Rejects sections and keys the pipeline does not know.
void check_experiment(const ConfigText& cfg);

int cmd_gen_data(const ConfigText& cfg, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);

struct TrainArgs {
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint;
  std::optional<vae::ModelKind> mode;
  std::optional<std::filesystem::path> resume;
  std::optional<std::filesystem::path> metrics;
  /// Print a progress line every this many steps (0: quiet).
  std::uint64_t log_every = 1000;
};
int cmd_train(const ConfigText& cfg, const TrainArgs& args, std::ostream& out, std::ostream& err);

int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
             const std::optional<std::filesystem::path>& report_dir, std::ostream& out,
             std::ostream& err);

/// `mechanism` is an expression or the name of a built-in mechanism.
int cmd_intervene(const std::filesystem::path& checkpoint, const std::string& mechanism,
                  double t_low, double t_high, std::size_t n_frames,
                  const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// Writes the prior mixture as CSV. With a checkpoint and dataset, also
/// writes the encoded posterior (`time,mu,sigma`) to `posterior_csv`.
struct InspectArgs {
  std::filesystem::path out_csv;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> posterior_csv;
};
int cmd_inspect_prior(const ConfigText& cfg, const InspectArgs& args, std::ostream& out,
                      std::ostream& err);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace anmvae::cli
