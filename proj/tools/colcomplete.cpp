// colcomplete <mode> --config <file> [--out <dir>] [--force] [--one-based] [--threads N]
//
// Every flag overrides the config key of the same name (dashes become
// underscores). `validate` prints diagnostics for the config's own mode.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "colcomplete/errors.hpp"
#include "colcomplete/experiment.hpp"
#include "colcomplete/io.hpp"

namespace fs = std::filesystem;
using colcomplete::json;

int main(int argc, char** argv) {
  CLI::App app{"Column-sampled matrix completion with polynomial side information"};
  app.set_version_flag("--version", "colcomplete 0.1");

  std::string mode;
  std::string config_path;
  app.add_option("mode", mode, "solve | sweep-d | sweep-noise | sweep-min-d | theory-report | validate")
      ->required()
      ->check(CLI::IsMember({"solve", "sweep-d", "sweep-noise", "sweep-min-d", "theory-report", "validate"}));
  app.add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);

  std::optional<std::string> out, input, grid_file;
  std::optional<std::size_t> threads, trials, rank, max_iters, max_iters_z, grid_default;
  std::optional<std::uint64_t> seed;
  std::optional<int> degree;
  std::optional<double> step_size, step_size_z, grad_tol, success_nmse;
  std::vector<std::size_t> d_values, r_values;
  std::vector<double> sigma_values;
  std::vector<std::string> methods;
  std::vector<long long> columns;
  bool force = false, one_based = false, transpose = false, normalize_basis = false, hybrid_rows = false,
       save_models = false, record_wallclock = false;

  app.add_option("--out", out, "output directory");
  app.add_flag("--force", force, "write into a non-empty output directory");
  app.add_flag("--one-based", one_based, "column indices in files and flags start at 1");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--trials", trials);
  app.add_option("--seed", seed);
  app.add_option("--rank", rank, "target rank r");
  app.add_option("--degree", degree, "basis degree l");
  app.add_option("--d", d_values, "sampled column counts")->delimiter(',');
  app.add_option("--sigma", sigma_values, "noise levels for sweep-noise")->delimiter(',');
  app.add_option("--r-values", r_values, "ranks for sweep-min-d")->delimiter(',');
  app.add_option("--methods", methods, "qpma,cur1,cur2,cur3")->delimiter(',');
  app.add_option("--columns", columns, "explicit column list for solve")->delimiter(',');
  app.add_option("--max-iters", max_iters);
  app.add_option("--max-iters-z", max_iters_z, "iteration cap for the QPMA core stage");
  app.add_option("--step-size", step_size);
  app.add_option("--step-size-z", step_size_z);
  app.add_option("--grad-tol", grad_tol);
  app.add_option("--success-nmse", success_nmse);
  app.add_option("--input", input, "CSV matrix instead of synthetic data");
  app.add_flag("--transpose", transpose);
  app.add_option("--grid-file", grid_file, "one grid point per line");
  app.add_option("--grid-default", grid_default, "default grid of this length");
  app.add_flag("--normalize-basis", normalize_basis);
  app.add_flag("--hybrid-rows", hybrid_rows, "CUR+ rows taken from the QPMA estimate");
  app.add_flag("--save-models", save_models);
  app.add_flag("--record-wallclock", record_wallclock, "fill the wallclock column (breaks byte-identical reruns)");

  CLI11_PARSE(app, argc, argv);

  try {
    json j;
    try {
      j = json::parse(colcomplete::read_text(config_path));
    } catch (const json::parse_error& e) {
      throw colcomplete::ConfigError(config_path + ": " + e.what());
    }
    if (!j.is_object()) throw colcomplete::ConfigError(config_path + ": expected an object");
    if (mode != "validate") j["mode"] = mode;
    auto abs = [](const std::string& p) { return fs::absolute(p).string(); };
    if (out) j["out"] = abs(*out);
    if (force) j["force"] = true;
    if (one_based) j["one_based"] = true;
    if (threads) j["threads"] = *threads;
    if (trials) j["trials"] = *trials;
    if (seed) j["seed"] = *seed;
    if (rank) j["rank"] = *rank;
    if (degree) j["degree"] = *degree;
    if (!d_values.empty()) j["d"] = d_values;
    if (!sigma_values.empty()) j["sigma"] = sigma_values;
    if (!r_values.empty()) j["r_values"] = r_values;
    if (!methods.empty()) j["methods"] = methods;
    if (!columns.empty()) j["columns"] = columns;
    if (max_iters) j["solver"]["max_iters"] = *max_iters;
    if (max_iters_z) j["solver"]["max_iters_z"] = *max_iters_z;
    if (step_size) j["solver"]["step_size"] = *step_size;
    if (step_size_z) j["solver"]["step_size_z"] = *step_size_z;
    if (grad_tol) j["solver"]["grad_tol"] = *grad_tol;
    if (success_nmse) j["success_nmse"] = *success_nmse;
    if (normalize_basis) j["normalize_basis"] = true;
    if (hybrid_rows) j["hybrid_rows"] = true;
    if (save_models) j["save_models"] = true;
    if (record_wallclock) j["record_wallclock"] = true;
    if (input || transpose || grid_file || grid_default) {
      json& data = j["data"];
      if (input) {
        data.erase("synthetic");
        data["input"] = abs(*input);
      }
      if (transpose) data["transpose"] = true;
      if (grid_file) data["grid_file"] = abs(*grid_file);
      if (grid_default) data["grid_default"] = *grid_default;
    }

    colcomplete::ExperimentConfig cfg;
    try {
      cfg = colcomplete::parse_config(j, fs::path(config_path).parent_path());
    } catch (colcomplete::ConfigError& e) {
      e.add_context(config_path);
      throw;
    }
    const auto diags = colcomplete::validate(cfg);
    bool blocked = false;
    for (const auto& d : diags) {
      std::cerr << (d.blocking ? "config: " : "note: ") << d.message << "\n";
      blocked = blocked || d.blocking;
    }
    if (mode == "validate") {
      if (diags.empty()) std::cout << "config is valid\n";
      return blocked ? 1 : 0;
    }
    if (blocked) return 2;

    colcomplete::prepare_output_dir(cfg);
    const colcomplete::RunOutput result = colcomplete::run_experiment(cfg);
    colcomplete::write_outputs(cfg, result);

    std::size_t failed = 0;
    for (const auto& row : result.rows) failed += !row.error.empty();
    std::cout << "wrote " << result.rows.size() << " rows to " << (cfg.out / "results.csv").string();
    if (failed) std::cout << " (" << failed << " with errors)";
    std::cout << "\n";
    if (!result.min_d.empty()) {
      const json& s = result.summary["min_d"];
      for (const auto& p : s["points"])
        std::cout << "r=" << p["r"] << " min_d=" << p["min_d"] << "\n";
      std::cout << "c=" << s["c"] << " monotone=" << s["monotone"] << " complete=" << s["complete"]
                << " holdout " << s["holdout"]["within"] << "/" << s["holdout"]["checked"] << " within c="
                << s["holdout"]["c"] << "\n";
    }
    return 0;
  } catch (const colcomplete::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const colcomplete::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const colcomplete::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
