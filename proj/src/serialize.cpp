#include "colcomplete/serialize.hpp"

#include <cmath>

#include "colcomplete/errors.hpp"
#include "colcomplete/io.hpp"

namespace colcomplete {

namespace fs = std::filesystem;

json real_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

json sampler_to_json(const ColumnSampler& s, bool one_based) {
  json idx = json::array();
  for (std::size_t c : s.indices()) idx.push_back(c + (one_based ? 1 : 0));
  return json{{"m", s.total_columns()}, {"indices", idx}};
}

ColumnSampler sampler_from_json(const json& j, bool one_based) {
  if (!j.is_object() || !j.contains("m") || !j.contains("indices") || !j["m"].is_number_integer() || j["m"].get<long long>() < 0 ||
      !j["indices"].is_array())
    throw ConfigError("sampler must be {\"m\": int, \"indices\": [ints]}");
  const auto m = j["m"].get<std::size_t>();
  std::vector<std::size_t> idx;
  for (const auto& v : j["indices"]) {
    if (!v.is_number_integer()) throw ConfigError("sampler indices must be integers");
    const auto raw = v.get<long long>();
    const long long shifted = one_based ? raw - 1 : raw;
    if (shifted < 0) throw IndexError("column index " + std::to_string(raw) + " below the first column");
    idx.push_back(static_cast<std::size_t>(shifted));
  }
  return build_sampler(m, std::move(idx));
}

json synthetic_to_json(const SyntheticSpec& spec) {
  json j{{"n", spec.n},
         {"m", spec.m},
         {"degree", spec.degree},
         {"q_seed", spec.q_seed},
         {"noise_sigma", spec.noise_sigma},
         {"noise_seed", spec.noise_seed},
         {"noise_mode", spec.noise_mode == NoiseMode::RankK ? "rank-k" : "dense"}};
  if (spec.noise_mode == NoiseMode::RankK) j["k"] = spec.k;
  if (!spec.grid.empty()) j["grid"] = spec.grid;
  return j;
}

namespace {

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": missing or wrong type");
  }
}

}  // namespace

SyntheticSpec synthetic_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  SyntheticSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "n") spec.n = get_field<std::size_t>(j, key, where);
    else if (key == "m") spec.m = get_field<std::size_t>(j, key, where);
    else if (key == "degree") spec.degree = get_field<int>(j, key, where);
    else if (key == "q_seed") spec.q_seed = get_field<std::uint64_t>(j, key, where);
    else if (key == "noise_sigma") spec.noise_sigma = get_field<double>(j, key, where);
    else if (key == "noise_seed") spec.noise_seed = get_field<std::uint64_t>(j, key, where);
    else if (key == "k") spec.k = get_field<std::size_t>(j, key, where);
    else if (key == "grid") spec.grid = get_field<std::vector<double>>(j, key, where);
    else if (key == "noise_mode") {
      const auto mode = get_field<std::string>(j, key, where);
      if (mode == "dense") spec.noise_mode = NoiseMode::DenseGaussian;
      else if (mode == "rank-k") spec.noise_mode = NoiseMode::RankK;
      else throw ConfigError(where + ".noise_mode: expected \"dense\" or \"rank-k\"");
    } else {
      throw ConfigError(where + "." + key + ": unknown key");
    }
    (void)value;
  }
  return spec;
}

json bound_to_json(const BoundBreakdown& b) {
  json terms = json::object();
  for (const auto& [name, v] : b.terms) terms[name] = real_or_null(v);
  return json{{"total", real_or_null(b.total)}, {"terms", terms}};
}

json theory_to_json(const TheoryReport& rep) {
  auto opt = [](const std::optional<double>& v) -> json { return v ? real_or_null(*v) : json(nullptr); };
  json j{{"mu", real_or_null(rep.mu)},
         {"mu_hat", real_or_null(rep.mu_hat)},
         {"delta", opt(rep.delta)},
         {"r_resid_f", opt(rep.r_resid_f)},
         {"s_resid_f", opt(rep.s_resid_f)},
         {"e_f", opt(rep.e_f)},
         {"sin_theta_f", real_or_null(rep.sin_theta_f)},
         {"vv_dev_f", opt(rep.vv_dev_f)},
         {"lambda_min_h", opt(rep.lambda_min_h)},
         {"alpha_floor", real_or_null(rep.alpha_floor)},
         {"sigma1", real_or_null(rep.sigma1)},
         {"sigma_r1", real_or_null(rep.sigma_r1)},
         {"sample_floor", rep.sample_floor},
         {"measured_sq_spectral_err", real_or_null(rep.measured_sq_spectral_err)},
         {"bound_old", rep.bound_old ? bound_to_json(*rep.bound_old) : json(nullptr)},
         {"bound_new", rep.bound_new ? bound_to_json(*rep.bound_new) : json(nullptr)},
         {"assumptions_hold", rep.assumptions_hold},
         {"notes", rep.notes}};
  return j;
}

void save_model(const fs::path& dir, const QpmaModel& model, json meta) {
  fs::create_directories(dir);
  save_csv(model.u_a, dir / "u_a.csv");
  save_csv(model.q_hat, dir / "q_hat.csv");
  save_csv(model.v_qs, dir / "v_qs.csv");
  save_csv(model.z_hat, dir / "z_hat.csv");
  save_csv(model.m_hat, dir / "m_hat.csv");
  meta["iters_q"] = model.iters_q;
  meta["iters_z"] = model.iters_z;
  meta["stop_q"] = to_string(model.stop_q);
  meta["stop_z"] = to_string(model.stop_z);
  meta["step_q"] = model.step_q;
  meta["step_z"] = model.step_z;
  meta["final_objective_q"] = model.trace_q.back();
  meta["final_objective_z"] = model.trace_z.back();
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void save_model(const fs::path& dir, const CurPlusModel& model, json meta) {
  fs::create_directories(dir);
  save_csv(model.u_hat, dir / "u_a.csv");
  save_csv(model.v_hat, dir / "v_qs.csv");
  save_csv(model.z_hat, dir / "z_hat.csv");
  save_csv(model.m_hat, dir / "m_hat.csv");
  meta["baseline"] = "cur+";
  meta["sample_budget"] = model.sample_budget;
  meta["iters"] = model.iters;
  meta["stop"] = to_string(model.stop);
  meta["step"] = model.step;
  meta["final_objective"] = model.trace.back();
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace colcomplete
