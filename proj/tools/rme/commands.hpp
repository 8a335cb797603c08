// SPDX-License-Identifier: Apache-2.0
//
// Subcommands of the `rme` tool. Kept in a library so tests can drive them
// without spawning processes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rme/config.hpp"
#include "rme/deep.hpp"
#include "rme/estimator.hpp"
#include "rme/training.hpp"

namespace rme::cli {

/// Failure that maps to a nonzero exit status with a one-line message.
class CliError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunContext {
    Config config;
    std::filesystem::path config_dir = ".";
    std::uint64_t seed = 1;
    std::filesystem::path out = ".";
    std::size_t threads = 1;
};

/// Parses argv-style arguments (without the program name) and runs the
/// selected subcommand. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `generate.count` synthetic datasets set_000.csv ... with sidecars.
std::vector<std::filesystem::path> cmd_generate(const RunContext& ctx, std::ostream& log);

/// Writes one <stem>_grid.csv per `data.input` file on the region grid.
std::vector<std::filesystem::path> cmd_quantize(const RunContext& ctx, std::ostream& log);

/// Trains `estimator` (knn, kriging, krr, traditional, cnn or frade) and
/// returns the params file path.
std::filesystem::path cmd_train(const RunContext& ctx, const std::string& estimator, std::ostream& log);

/// Writes report.csv. With `check_seed` the sweep runs twice and the two
/// reports must match byte for byte.
std::filesystem::path cmd_evaluate(const RunContext& ctx, const std::string& estimator, bool check_seed,
                                   std::ostream& log);

/// Merges report CSVs into report_long.csv and writes summary.txt.
std::vector<std::filesystem::path> cmd_report(const RunContext& ctx,
                                              const std::vector<std::filesystem::path>& inputs,
                                              std::ostream& log);

// --- params files ----------------------------------------------------------

void put_knn(Config& cfg, const KnnParams& p);
void put_kriging(Config& cfg, const KrigingParams& p);
void put_krr(Config& cfg, const KrrParams& p);
KnnParams get_knn(const Config& cfg);
KrigingParams get_kriging(const Config& cfg);
KrrParams get_krr(const Config& cfg);

/// Throws CliError unless all three traditional sections are present.
TraditionalParams get_traditional(const Config& cfg, const std::string& what);

/// Estimator `id` configured from the params file at `params_path`.
std::unique_ptr<Estimator> load_estimator(const std::string& id, const std::filesystem::path& params_path);

SearchGrid search_grid_from_config(const Config& cfg);

}  // namespace rme::cli
