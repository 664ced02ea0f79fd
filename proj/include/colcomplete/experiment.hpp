#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "colcomplete/datagen.hpp"
#include "colcomplete/serialize.hpp"

namespace colcomplete {

enum class Mode { Solve, SweepD, SweepNoise, SweepMinD, TheoryReport };

std::string to_string(Mode mode);
// Throws ConfigError.
Mode parse_mode(const std::string& name);

struct DataSource {
  std::optional<SyntheticSpec> synthetic;  // instance seeds always come from the run seed
  std::filesystem::path input;             // CSV matrix; used when synthetic is unset
  bool transpose = false;
  std::filesystem::path grid_file;
  std::optional<std::size_t> grid_default;  // default grid of this length
};

struct SolverParams {
  std::size_t max_iters = 5000;
  std::optional<std::size_t> max_iters_z;  // QPMA core stage only
  std::optional<double> step_size;
  std::optional<double> step_size_z;
  std::optional<double> grad_tol;
};

struct ExperimentConfig {
  Mode mode = Mode::Solve;
  DataSource data;
  std::optional<int> degree;  // basis degree; defaults to the synthetic degree
  std::size_t rank = 1;
  std::vector<std::size_t> d_values;
  std::vector<double> sigma_values;  // sweep-noise
  std::vector<std::size_t> r_values;  // sweep-min-d
  std::vector<std::string> methods{"qpma"};
  std::optional<std::vector<long long>> columns;  // explicit sampler for solve mode, as written
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  SolverParams solver;
  double success_nmse = 1e-6;
  bool normalize_basis = false;
  bool hybrid_rows = false;
  bool one_based = false;
  bool save_models = false;
  bool record_wallclock = false;
  bool force = false;
  std::size_t threads = 1;
  std::filesystem::path out = "out";
};

// Relative paths are resolved against base_dir. Throws ConfigError naming
// the offending field, e.g. "solver.max_iters: expected a non-negative integer".
ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Diagnostic {
  std::string message;
  // Non-blocking diagnostics concern single sweep cells (e.g. r > d at one d);
  // those cells still run and record their error per trial.
  bool blocking = true;
};

// Every violated constraint, without running. Empty for a clean config.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

struct ResultRow {
  std::string mode;
  std::string method;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t r = 0;
  std::size_t l = 0;
  std::size_t k_proxy = 0;
  std::size_t d = 0;
  std::optional<double> sigma;  // unset for loaded data
  std::uint64_t seed = 0;
  std::optional<double> nmse;
  std::optional<double> sq_spectral_err;
  std::optional<std::size_t> iters;
  std::optional<double> wallclock;
  std::string error;
};

struct MinDPoint {
  std::size_t r = 0;
  std::optional<std::size_t> min_d;  // unset when even d = m fails
};

struct RunOutput {
  std::vector<ResultRow> rows;
  json summary;
  std::optional<json> theory;
  std::vector<MinDPoint> min_d;
};

inline constexpr const char* kResultsHeader =
    "mode,method,n,m,r,l,k_proxy,d,sigma,seed,nmse,sq_spectral_err,iters,wallclock,error";

std::string format_results(const std::vector<ResultRow>& rows);

// Runs the experiment in memory. Model directories are written under
// cfg.out when save_models is set. Throws ConfigError when validate()
// reports a blocking diagnostic; per-trial solver failures land in ResultRow::error.
RunOutput run_experiment(const ExperimentConfig& cfg);

// Writes results.csv, summary.json, theory.json and min_d.csv as applicable.
// Refuses a non-empty output directory unless cfg.force.
void write_outputs(const ExperimentConfig& cfg, const RunOutput& out);

// Checks the output directory before any work is done.
void prepare_output_dir(const ExperimentConfig& cfg);

}  // namespace colcomplete
