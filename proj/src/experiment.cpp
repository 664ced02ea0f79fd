#include "colcomplete/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "colcomplete/curplus.hpp"
#include "colcomplete/errors.hpp"
#include "colcomplete/io.hpp"
#include "colcomplete/metrics.hpp"
#include "colcomplete/polybasis.hpp"
#include "colcomplete/qpma.hpp"
#include "colcomplete/rng.hpp"
#include "colcomplete/theory.hpp"

namespace colcomplete {

namespace fs = std::filesystem;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Solve: return "solve";
    case Mode::SweepD: return "sweep-d";
    case Mode::SweepNoise: return "sweep-noise";
    case Mode::SweepMinD: return "sweep-min-d";
    case Mode::TheoryReport: return "theory-report";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::Solve, Mode::SweepD, Mode::SweepNoise, Mode::SweepMinD, Mode::TheoryReport})
    if (to_string(m) == name) return m;
  throw ConfigError("mode: unknown mode \"" + name +
                    "\" (expected solve, sweep-d, sweep-noise, sweep-min-d or theory-report)");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

// Parsed text yields unsigned values, values set from C++ ints are signed.
bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void size(const std::string& key, std::size_t& dst) {
    if (const json* v = find(key)) dst = as_size(*v, where(key));
  }
  void u64(const std::string& key, std::uint64_t& dst) {
    if (const json* v = find(key)) {
      if (!non_negative_integer(*v)) throw ConfigError(where(key) + ": expected a non-negative integer");
      dst = v->get<std::uint64_t>();
    }
  }
  void real(const std::string& key, double& dst) {
    if (const json* v = find(key)) dst = as_real(*v, where(key));
  }
  void real(const std::string& key, std::optional<double>& dst) {
    if (const json* v = find(key)) {
      if (v->is_null()) dst.reset();
      else dst = as_real(*v, where(key));
    }
  }
  void flag(const std::string& key, bool& dst) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
      dst = v->get<bool>();
    }
  }
  void text(const std::string& key, std::string& dst) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
      dst = v->get<std::string>();
    }
  }
  void path(const std::string& key, fs::path& dst, const fs::path& base) {
    std::string s;
    text(key, s);
    if (!s.empty()) dst = fs::path(s).is_absolute() ? fs::path(s) : base / s;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

  static std::size_t as_size(const json& v, const std::string& where) {
    if (!non_negative_integer(v)) throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }
  static double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// [a, b, ...] or {"from": a, "to": b, "step": s} (inclusive).
std::vector<std::size_t> size_list(const json& v, const std::string& where) {
  std::vector<std::size_t> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Fields::as_size(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (non_negative_integer(v)) return {v.get<std::size_t>()};
  Fields f(v, where);
  std::size_t from = 0, to = 0, step = 1;
  if (!f.find("from") || !f.find("to")) throw ConfigError(where + ": a range needs \"from\" and \"to\"");
  f.size("from", from);
  f.size("to", to);
  f.size("step", step);
  f.finish();
  if (step == 0) throw ConfigError(where + ".step: must be positive");
  for (std::size_t x = from; x <= to; x += step) out.push_back(x);
  return out;
}

std::vector<double> real_list(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(where + ": expected a number or a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Fields::as_real(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  ExperimentConfig cfg;
  Fields top(j, "");
  std::string mode = "solve";
  top.text("mode", mode);
  cfg.mode = parse_mode(mode);

  if (const json* data = top.find("data")) {
    Fields f(*data, "data");
    if (const json* syn = f.find("synthetic")) {
      if (syn->contains("q_seed") || syn->contains("noise_seed"))
        throw ConfigError("data.synthetic: instance seeds derive from the top-level seed; drop q_seed/noise_seed");
      cfg.data.synthetic = synthetic_from_json(*syn, "data.synthetic");
    }
    f.path("input", cfg.data.input, base_dir);
    f.flag("transpose", cfg.data.transpose);
    f.path("grid_file", cfg.data.grid_file, base_dir);
    if (const json* g = f.find("grid_default")) cfg.data.grid_default = Fields::as_size(*g, "data.grid_default");
    f.finish();
    if (cfg.data.synthetic && !cfg.data.input.empty())
      throw ConfigError("data: give either \"synthetic\" or \"input\", not both");
  }
  if (!cfg.data.synthetic && cfg.data.input.empty()) throw ConfigError("data: missing \"synthetic\" or \"input\"");

  if (const json* v = top.find("degree")) {
    if (!v->is_number_integer()) throw ConfigError("degree: expected an integer");
    cfg.degree = v->get<int>();
  }
  top.size("rank", cfg.rank);
  if (const json* v = top.find("d")) cfg.d_values = size_list(*v, "d");
  if (const json* v = top.find("sigma")) cfg.sigma_values = real_list(*v, "sigma");
  if (const json* v = top.find("r_values")) cfg.r_values = size_list(*v, "r_values");
  if (const json* v = top.find("methods")) {
    if (!v->is_array()) throw ConfigError("methods: expected a list of strings");
    cfg.methods.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) throw ConfigError("methods[" + std::to_string(i) + "]: expected a string");
      cfg.methods.push_back((*v)[i].get<std::string>());
    }
  }
  if (const json* v = top.find("columns")) {
    if (!v->is_array()) throw ConfigError("columns: expected a list of integers");
    std::vector<long long> cols;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer()) throw ConfigError("columns[" + std::to_string(i) + "]: expected an integer");
      cols.push_back((*v)[i].get<long long>());
    }
    cfg.columns = std::move(cols);
  }
  top.size("trials", cfg.trials);
  top.u64("seed", cfg.seed);
  if (const json* v = top.find("solver")) {
    Fields f(*v, "solver");
    f.size("max_iters", cfg.solver.max_iters);
    if (const json* v = f.find("max_iters_z")) cfg.solver.max_iters_z = Fields::as_size(*v, "solver.max_iters_z");
    f.real("step_size", cfg.solver.step_size);
    f.real("step_size_z", cfg.solver.step_size_z);
    f.real("grad_tol", cfg.solver.grad_tol);
    f.finish();
  }
  top.real("success_nmse", cfg.success_nmse);
  top.flag("normalize_basis", cfg.normalize_basis);
  top.flag("hybrid_rows", cfg.hybrid_rows);
  top.flag("one_based", cfg.one_based);
  top.flag("save_models", cfg.save_models);
  top.flag("record_wallclock", cfg.record_wallclock);
  top.flag("force", cfg.force);
  top.size("threads", cfg.threads);
  top.path("out", cfg.out, base_dir);
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(j, path.parent_path());
  } catch (ConfigError& e) {
    e.add_context(path.string());
    throw;
  }
}

// ---------------------------------------------------------------------------
// shared setup

namespace {

constexpr const char* kMethods[] = {"qpma", "cur1", "cur2", "cur3"};

int cur_variant(const std::string& method) {
  if (method.size() == 4 && method.rfind("cur", 0) == 0 && method[3] >= '1' && method[3] <= '3') return method[3] - '0';
  return 0;
}

struct Frame {
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<DenseMatrix> loaded;
  std::vector<double> grid;
  std::optional<int> degree;
};

// Loads whatever the data section points at. Errors are Error subclasses.
Frame load_frame(const ExperimentConfig& cfg) {
  Frame fr;
  if (cfg.data.synthetic) {
    fr.n = cfg.data.synthetic->n;
    fr.m = cfg.data.synthetic->m;
  } else {
    DenseMatrix mtx = load_csv(cfg.data.input);
    if (cfg.data.transpose) mtx = mtx.transpose();
    fr.n = mtx.rows();
    fr.m = mtx.cols();
    fr.loaded = std::move(mtx);
  }
  if (cfg.data.synthetic && !cfg.data.synthetic->grid.empty()) fr.grid = cfg.data.synthetic->grid;
  else if (!cfg.data.grid_file.empty()) fr.grid = load_grid(cfg.data.grid_file);
  else fr.grid = default_grid(cfg.data.grid_default.value_or(fr.m));
  fr.degree = cfg.degree;
  if (!fr.degree && cfg.data.synthetic) fr.degree = cfg.data.synthetic->degree;
  return fr;
}

std::vector<std::size_t> d_list(const ExperimentConfig& cfg) {
  if (cfg.mode == Mode::Solve && cfg.columns) return {cfg.columns->size()};
  return cfg.d_values;
}

std::vector<std::optional<double>> sigma_list(const ExperimentConfig& cfg) {
  if (!cfg.data.synthetic) return {std::nullopt};
  if (cfg.mode == Mode::SweepNoise) return {cfg.sigma_values.begin(), cfg.sigma_values.end()};
  return {cfg.data.synthetic->noise_sigma};
}

}  // namespace

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto note = [&](std::string s, bool blocking = true) {
    for (const auto& d : out)
      if (d.message == s) return;
    out.push_back({std::move(s), blocking});
  };
  if (cfg.trials < 1) note("trial count must be at least 1");
  if (cfg.threads < 1) note("thread count must be at least 1");
  if (cfg.solver.max_iters < 1) note("solver.max_iters must be at least 1");
  if (cfg.solver.max_iters_z && *cfg.solver.max_iters_z < 1) note("solver.max_iters_z must be at least 1");
  if (!(cfg.success_nmse > 0)) note("success_nmse must be positive");
  if (cfg.methods.empty()) note("no methods selected");
  for (const auto& method : cfg.methods)
    if (std::find(std::begin(kMethods), std::end(kMethods), method) == std::end(kMethods))
      note("unknown method \"" + method + "\" (expected qpma, cur1, cur2 or cur3)");
  const bool has_qpma = std::find(cfg.methods.begin(), cfg.methods.end(), "qpma") != cfg.methods.end();
  if (cfg.hybrid_rows && !has_qpma) note("hybrid_rows needs qpma among the methods");
  if ((cfg.mode == Mode::TheoryReport || cfg.mode == Mode::SweepMinD) && !has_qpma)
    note(to_string(cfg.mode) + " evaluates qpma; add it to methods");

  Frame fr;
  try {
    if (cfg.data.synthetic) cfg.data.synthetic->validate();
    fr = load_frame(cfg);
  } catch (const Error& e) {
    note(std::string("data: ") + e.what());
    return out;
  }
  if (fr.grid.size() != fr.m)
    note("grid has " + std::to_string(fr.grid.size()) + " points but the matrix has " + std::to_string(fr.m) +
         " columns");

  switch (cfg.mode) {
    case Mode::Solve:
      if (!cfg.columns && cfg.d_values.size() != 1) note("solve needs exactly one d value or an explicit column list");
      break;
    case Mode::SweepD:
    case Mode::TheoryReport:
      if (cfg.d_values.empty()) note(to_string(cfg.mode) + " needs at least one d value");
      break;
    case Mode::SweepNoise:
      if (!cfg.data.synthetic) note("sweep-noise needs synthetic data");
      if (cfg.sigma_values.empty()) note("sweep-noise needs at least one sigma value");
      for (double s : cfg.sigma_values)
        if (!(s >= 0) || !std::isfinite(s)) note("sigma values must be finite and non-negative");
      if (cfg.d_values.empty()) note("sweep-noise needs at least one d value");
      break;
    case Mode::SweepMinD:
      if (!cfg.data.synthetic) note("sweep-min-d needs synthetic data");
      else if (cfg.data.synthetic->noise_sigma != 0.0) note("sweep-min-d needs noiseless data (noise_sigma = 0)");
      if (cfg.r_values.empty()) note("sweep-min-d needs at least one r value");
      for (std::size_t r : cfg.r_values) {
        if (r < 1) note("r values must be at least 1");
        if (r > fr.m) note("r value " + std::to_string(r) + " exceeds the number of columns");
      }
      break;
  }
  if (cfg.mode != Mode::Solve && cfg.columns) note("an explicit column list is only used by solve");

  if (cfg.mode != Mode::SweepMinD) {
    if (!fr.degree) note("degree is required for loaded data");
    if (cfg.rank < 1) note("rank must be at least 1");
    if (fr.degree) {
      if (*fr.degree < 0) note("degree must be non-negative");
      else if (static_cast<std::size_t>(*fr.degree) + 1 > fr.m)
        note("basis degree + 1 exceeds the number of columns: " + std::to_string(*fr.degree + 1) + " > " +
             std::to_string(fr.m));
      else if (has_qpma && cfg.rank > static_cast<std::size_t>(*fr.degree) + 1)
        note("target rank exceeds basis rows (r <= l + 1): r=" + std::to_string(cfg.rank) +
             ", l=" + std::to_string(*fr.degree));
    }
    for (std::size_t d : d_list(cfg)) {
      if (d < 1) note("d values must be at least 1");
      if (d > fr.m) note("d=" + std::to_string(d) + " exceeds the number of columns " + std::to_string(fr.m));
      if (has_qpma && cfg.rank > d)
        note("target rank exceeds sampled columns (need r ≤ d ≤ k): r=" + std::to_string(cfg.rank) +
                 ", d=" + std::to_string(d),
             false);
      for (const auto& method : cfg.methods) {
        const int v = cur_variant(method);
        if (!v || d > fr.m) continue;
        try {
          make_type(v, fr.n, fr.m, d, cfg.rank, 0).validate(fr.n, fr.m);
        } catch (const RankError&) {
          note("CUR+ type " + std::to_string(v) + " samples fewer rows or columns than the target rank: d=" +
                   std::to_string(d) + ", r=" + std::to_string(cfg.rank),
               false);
        } catch (const Error& e) {
          note("CUR+ type " + std::to_string(v) + ": " + e.what());
        }
      }
    }
  }
  if (cfg.mode == Mode::Solve && cfg.columns) {
    try {
      json j{{"m", fr.m}, {"indices", *cfg.columns}};
      sampler_from_json(j, cfg.one_based);
    } catch (const Error& e) {
      note(std::string("columns: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// running

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

struct TrialSeeds {
  std::uint64_t trial, q, noise, sampler, init;
};

TrialSeeds seeds_for(std::uint64_t base, std::size_t t) {
  const std::uint64_t ts = Rng::derive_seed(base, static_cast<std::uint64_t>(t));
  return {ts, Rng::derive_seed(ts, "q"), Rng::derive_seed(ts, "noise"), Rng::derive_seed(ts, "sampler"),
          Rng::derive_seed(ts, "init")};
}

// Runs f(0..count-1) on a small pool. Each task writes only its own slot, so
// the caller sees results in index order whatever the interleaving.
template <typename F>
void parallel_for(std::size_t count, std::size_t threads, F&& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  const std::size_t nt = std::max<std::size_t>(1, std::min(threads, count));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < nt; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

struct TrialData {
  DenseMatrix m_true;
  std::optional<Instance> instance;  // synthetic only
  std::size_t k_proxy = 0;
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, Frame fr) : cfg_(cfg), fr_(std::move(fr)) {}

  TrialData make_trial(const TrialSeeds& seeds, std::optional<double> sigma, std::optional<int> degree) const {
    if (!cfg_.data.synthetic) return TrialData{*fr_.loaded, std::nullopt, numerical_rank(*fr_.loaded)};
    SyntheticSpec spec = *cfg_.data.synthetic;
    spec.grid = fr_.grid;
    spec.q_seed = seeds.q;
    spec.noise_seed = seeds.noise;
    if (sigma) spec.noise_sigma = *sigma;
    if (degree) spec.degree = *degree;
    Instance inst = generate(spec);
    DenseMatrix m_true = inst.m_true;
    const std::size_t k = numerical_rank(m_true);
    return TrialData{std::move(m_true), std::move(inst), k};
  }

  PolyBasis basis(int degree) const {
    PolyBasis b = build_basis(fr_.grid, degree);
    return cfg_.normalize_basis ? normalize_rows(b) : b;
  }

  ColumnSampler sampler(std::size_t d, const TrialSeeds& seeds) const {
    if (cfg_.mode == Mode::Solve && cfg_.columns)
      return sampler_from_json(json{{"m", fr_.m}, {"indices", *cfg_.columns}}, cfg_.one_based);
    return sample_uniform(fr_.m, d, seeds.sampler);
  }

  QpmaConfig qpma_config(std::size_t r, int degree, const TrialSeeds& seeds) const {
    QpmaConfig c;
    c.target_rank = r;
    c.degree = degree;
    c.step_size = cfg_.solver.step_size;
    c.step_size_z = cfg_.solver.step_size_z;
    c.max_iters = cfg_.solver.max_iters;
    c.max_iters_z = cfg_.solver.max_iters_z;
    c.grad_tol = cfg_.solver.grad_tol;
    c.seed = seeds.init;
    return c;
  }

  json meta(const std::string& method, std::size_t t, const TrialSeeds& seeds, std::size_t d, std::size_t r,
            int degree, std::optional<double> sigma, const ColumnSampler& s) const {
    return json{{"method", method},
                {"mode", to_string(cfg_.mode)},
                {"trial", t},
                {"seeds",
                 {{"run", cfg_.seed},
                  {"trial", seeds.trial},
                  {"q", seeds.q},
                  {"noise", seeds.noise},
                  {"sampler", seeds.sampler},
                  {"init", seeds.init}}},
                {"r", r},
                {"degree", degree},
                {"d", d},
                {"sigma", sigma ? json(*sigma) : json(nullptr)},
                {"normalize_basis", cfg_.normalize_basis},
                {"max_iters", cfg_.solver.max_iters},
                {"max_iters_z", cfg_.solver.max_iters_z ? json(*cfg_.solver.max_iters_z) : json(nullptr)},
                {"sampler", sampler_to_json(s, cfg_.one_based)}};
  }

  fs::path model_dir(const std::string& what, std::size_t d, std::size_t sigma_idx, std::size_t r,
                     std::size_t t) const {
    return cfg_.out / "models" /
           (what + "_r" + std::to_string(r) + "_d" + std::to_string(d) + "_s" + std::to_string(sigma_idx) + "_t" +
            std::to_string(t));
  }

  void save_instance(const TrialData& td, std::size_t sigma_idx, std::size_t t) const {
    if (!cfg_.save_models || !td.instance) return;
    const fs::path dir = cfg_.out / "models" / ("instance_s" + std::to_string(sigma_idx) + "_t" + std::to_string(t));
    fs::create_directories(dir);
    save_csv(td.instance->m_true, dir / "m_true.csv");
    save_csv(td.instance->q_true, dir / "q_true.csv");
    save_csv(td.instance->e_true, dir / "e_true.csv");
    std::string grid;
    for (double g : fr_.grid) grid += format_real(g) + "\n";
    write_text(dir / "grid.txt", grid);
    write_text(dir / "spec.json", synthetic_to_json(td.instance->spec).dump(2) + "\n");
  }

  // One (trial, d) cell: every configured method on the same instance and
  // column sampler. `theory` receives a report when requested.
  std::vector<ResultRow> run_cell(const TrialData& td, const TrialSeeds& seeds, std::size_t t, std::size_t d,
                                  std::size_t r, int degree, std::optional<double> sigma, std::size_t sigma_idx,
                                  json* theory) const {
    ResultRow base;
    base.mode = to_string(cfg_.mode);
    base.n = fr_.n;
    base.m = fr_.m;
    base.r = r;
    base.l = static_cast<std::size_t>(degree);
    base.k_proxy = td.k_proxy;
    base.d = d;
    base.sigma = sigma;
    base.seed = seeds.trial;

    const PolyBasis pb = basis(degree);
    std::optional<QpmaModel> qpma;
    std::string qpma_error;
    std::optional<double> qpma_clock;
    std::optional<ColumnSampler> smp;
    bool qpma_done = false;
    auto get_qpma = [&] {
      if (qpma_done) return;
      qpma_done = true;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        smp = sampler(d, seeds);
        qpma = solve(sample_columns(td.m_true, *smp), *smp, pb, qpma_config(r, degree, seeds));
      } catch (const Error& e) {
        qpma_error = e.what();
      }
      qpma_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    std::vector<ResultRow> rows;
    for (const auto& method : cfg_.methods) {
      ResultRow row = base;
      row.method = method;
      const int v = cur_variant(method);
      if (v == 0) {
        get_qpma();
        if (cfg_.record_wallclock) row.wallclock = qpma_clock;
        if (qpma) {
          fill(row, qpma->m_hat, td.m_true, qpma->iters_q + qpma->iters_z);
          if (cfg_.save_models)
            save_model(model_dir(method, d, sigma_idx, r, t), *qpma, meta(method, t, seeds, d, r, degree, sigma, *smp));
        } else {
          row.error = qpma_error;
        }
      } else {
        if (cfg_.hybrid_rows) {
          row.method += "-hybrid";
          get_qpma();
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
          if (cfg_.hybrid_rows && !qpma) throw AssumptionViolation("hybrid rows need a QPMA estimate: " + qpma_error);
          CurPlusSpec spec = make_type(v, fr_.n, fr_.m, d, r, seeds.sampler);
          spec.max_iters = cfg_.solver.max_iters;
          spec.grad_tol = cfg_.solver.grad_tol;
          const DenseEntrySource src(td.m_true);
          const CurSamples samples = draw_cur_samples(fr_.n, fr_.m, spec);
          std::optional<DenseEntrySource> est;
          if (cfg_.hybrid_rows) est.emplace(qpma->m_hat);
          const CurPlusModel cm = cur_solve(src, spec, samples, est ? &*est : nullptr);
          fill(row, cm.m_hat, td.m_true, cm.iters);
          if (cfg_.save_models) {
            json mt = meta(row.method, t, seeds, d, r, degree, sigma, samples.cols);
            mt["variant"] = v;
            mt["rows"] = samples.rows;
            if (!spec.note.empty()) mt["note"] = spec.note;
            save_model(model_dir(row.method, d, sigma_idx, r, t), cm, mt);
          }
        } catch (const Error& e) {
          row.error = e.what();
        }
        if (cfg_.record_wallclock)
          row.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      rows.push_back(std::move(row));
    }

    if (theory) {
      get_qpma();
      json entry{{"trial", t}, {"seed", seeds.trial}, {"d", d}, {"r", r}, {"sigma", sigma ? json(*sigma) : json(nullptr)}};
      if (!qpma) {
        entry["error"] = qpma_error;
      } else {
        try {
          TheoryInputs in;
          std::optional<DenseMatrix> qs;
          if (td.instance) qs = td.instance->q_true * td.instance->s.matrix();
          in.m_true = &td.m_true;
          in.qs = qs ? &*qs : nullptr;
          in.e = td.instance ? &td.instance->e_true : nullptr;
          in.m_hat = &qpma->m_hat;
          in.u_a = &qpma->u_a;
          in.v_qs = &qpma->v_qs;
          in.sampler = &*smp;
          in.r = r;
          entry["report"] = theory_to_json(theory_report(in));
        } catch (const Error& e) {
          entry["error"] = e.what();
        }
      }
      *theory = std::move(entry);
    }
    return rows;
  }

  const Frame& frame() const { return fr_; }

 private:
  static void fill(ResultRow& row, const DenseMatrix& m_hat, const DenseMatrix& m_true, std::size_t iters) {
    row.iters = iters;
    try {
      const EvalResult ev = evaluate(m_hat, m_true);
      row.nmse = ev.nmse;
      row.sq_spectral_err = ev.sq_spectral_err;
    } catch (const DegenerateMetricError& e) {
      row.sq_spectral_err = spectral_sq_error(m_hat, m_true);
      row.error = e.what();
    }
  }

  const ExperimentConfig& cfg_;
  Frame fr_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

json stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return nullptr;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return real_or_null(std::sqrt(s / static_cast<double>(v.size() - 1)));
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_p(std::size_t k, std::size_t n) {
  double p = 0.0;
  for (std::size_t i = k; i <= n; ++i) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  return std::min(1.0, p);
}

bool same_sigma(const std::optional<double>& a, const std::optional<double>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

json summarize(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  struct Group {
    std::string method;
    std::size_t r, d;
    std::optional<double> sigma;
    std::vector<double> nmse, spec, iters;
    std::size_t count = 0, failures = 0;
  };
  std::vector<Group> groups;
  for (const auto& row : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.method == row.method && g.r == row.r && g.d == row.d && same_sigma(g.sigma, row.sigma);
    });
    if (it == groups.end()) {
      groups.push_back(Group{row.method, row.r, row.d, row.sigma, {}, {}, {}});
      it = std::prev(groups.end());
    }
    ++it->count;
    if (!row.nmse) {
      ++it->failures;
      continue;
    }
    it->nmse.push_back(*row.nmse);
    it->spec.push_back(*row.sq_spectral_err);
    it->iters.push_back(static_cast<double>(*row.iters));
  }
  json gs = json::array();
  for (const auto& g : groups) {
    json j{{"method", g.method},
           {"r", g.r},
           {"d", g.d},
           {"sigma", g.sigma ? json(*g.sigma) : json(nullptr)},
           {"trials", g.count},
           {"failures", g.failures}};
    if (!g.nmse.empty()) {
      j["nmse_mean"] = real_or_null(mean_of(g.nmse));
      j["nmse_stddev"] = stddev_of(g.nmse);
      j["sq_spectral_err_mean"] = real_or_null(mean_of(g.spec));
      j["sq_spectral_err_stddev"] = stddev_of(g.spec);
      j["iters_mean"] = real_or_null(mean_of(g.iters));
    }
    gs.push_back(j);
  }

  // QPMA against each other method on matched (seed, d, sigma, r).
  json paired = json::array();
  for (const auto& other : groups) {
    if (other.method == "qpma") continue;
    std::size_t n = 0, wins = 0;
    double sum_q = 0.0, sum_o = 0.0;
    for (const auto& a : rows) {
      if (a.method != "qpma" || !a.nmse || a.r != other.r || a.d != other.d || !same_sigma(a.sigma, other.sigma))
        continue;
      for (const auto& b : rows)
        if (b.method == other.method && b.seed == a.seed && b.d == a.d && b.r == a.r && same_sigma(b.sigma, a.sigma) &&
            b.nmse) {
          ++n;
          wins += *a.nmse < *b.nmse;
          sum_q += *a.nmse;
          sum_o += *b.nmse;
        }
    }
    if (n == 0) continue;
    paired.push_back(json{{"baseline", other.method},
                          {"r", other.r},
                          {"d", other.d},
                          {"sigma", other.sigma ? json(*other.sigma) : json(nullptr)},
                          {"pairs", n},
                          {"qpma_wins", wins},
                          {"qpma_nmse_mean", sum_q / n},
                          {"baseline_nmse_mean", sum_o / n},
                          {"sign_test_p", sign_test_p(wins, n)}});
  }
  return json{{"mode", to_string(cfg.mode)},
              {"seed", cfg.seed},
              {"trials", cfg.trials},
              {"rows", rows.size()},
              {"groups", gs},
              {"paired", paired}};
}

json theory_summary(const std::vector<json>& entries) {
  std::size_t solved = 0, gap_ok = 0, within_old = 0, within_new = 0;
  for (const auto& e : entries) {
    if (!e.contains("report")) continue;
    ++solved;
    const json& rep = e["report"];
    if (rep["bound_new"].is_null() || rep["delta"].is_null() || rep["delta"].get<double>() <= 0.1) continue;
    ++gap_ok;
    const double err = rep["measured_sq_spectral_err"].get<double>();
    within_new += !rep["bound_new"]["total"].is_null() && err <= rep["bound_new"]["total"].get<double>();
    within_old += !rep["bound_old"]["total"].is_null() && err <= rep["bound_old"]["total"].get<double>();
  }
  json c{{"solved", solved}, {"delta_above_0.1", gap_ok}, {"within_old", within_old}, {"within_new", within_new}};
  if (gap_ok) {
    c["fraction_within_old"] = static_cast<double>(within_old) / gap_ok;
    c["fraction_within_new"] = static_cast<double>(within_new) / gap_ok;
  }
  json list = json::array();
  for (const auto& e : entries) list.push_back(e);
  return json{{"containment", c}, {"entries", list}};
}

json min_d_summary(const std::vector<MinDPoint>& pts) {
  json out;
  std::vector<MinDPoint> sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](const MinDPoint& a, const MinDPoint& b) { return a.r < b.r; });
  auto scale = [](std::size_t r) { return static_cast<double>(r) * std::log(static_cast<double>(r) + 1.0); };
  bool complete = true, monotone = true;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!sorted[i].min_d) complete = false;
    else if (i > 0 && sorted[i - 1].min_d && *sorted[i].min_d < *sorted[i - 1].min_d) monotone = false;
  }
  // c is the tightest envelope over every r. A second constant fitted on the
  // smaller half only is checked against the larger half as an
  // out-of-sample view of the same scaling.
  const std::size_t fit_count = (sorted.size() + 1) / 2;
  double c = 0.0, c_half = 0.0, sxy = 0.0, sxx = 0.0;
  json fit_rs = json::array();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!sorted[i].min_d) continue;
    const double x = scale(sorted[i].r), y = static_cast<double>(*sorted[i].min_d);
    sxy += x * y;
    sxx += x * x;
    c = std::max(c, y / x);
    if (i < fit_count) {
      c_half = std::max(c_half, y / x);
      fit_rs.push_back(sorted[i].r);
    }
  }
  std::size_t held = 0, held_within = 0;
  json points = json::array();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& p = sorted[i];
    json j{{"r", p.r}, {"min_d", p.min_d ? json(*p.min_d) : json(nullptr)}, {"r_ln_r1", scale(p.r)}};
    if (p.min_d) {
      j["ratio"] = static_cast<double>(*p.min_d) / scale(p.r);
      if (i >= fit_count) {
        ++held;
        held_within += static_cast<double>(*p.min_d) <= c_half * scale(p.r) * (1 + 1e-12);
      }
    }
    points.push_back(j);
  }
  out["c"] = c;
  out["c_least_squares"] = sxx > 0 ? json(sxy / sxx) : json(nullptr);
  out["complete"] = complete;
  out["monotone"] = monotone;
  out["bounded"] = complete && c > 0;
  out["holdout"] = json{{"fit_r", fit_rs}, {"c", c_half}, {"checked", held}, {"within", held_within}};
  out["points"] = points;
  return out;
}

}  // namespace

std::string format_results(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kResultsHeader << "\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.mode << ',' << r.method << ',' << r.n << ',' << r.m << ',' << r.r << ',' << r.l << ',' << r.k_proxy << ','
       << r.d << ',' << opt(r.sigma) << ',' << r.seed << ',' << opt(r.nmse) << ',' << opt(r.sq_spectral_err) << ','
       << (r.iters ? std::to_string(*r.iters) : std::string()) << ',' << opt(r.wallclock) << ',' << csv_field(r.error)
       << "\n";
  }
  return os.str();
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  std::string msg;
  for (const auto& d : validate(cfg))
    if (d.blocking) msg += "\n  " + d.message;
  if (!msg.empty()) throw ConfigError("invalid config:" + msg);
  const Runner runner(cfg, load_frame(cfg));
  const Frame& fr = runner.frame();
  RunOutput out;

  if (cfg.mode == Mode::SweepMinD) {
    std::vector<std::vector<ResultRow>> rows(cfg.r_values.size());
    out.min_d.resize(cfg.r_values.size());
    parallel_for(cfg.r_values.size(), cfg.threads, [&](std::size_t ri) {
      const std::size_t r = cfg.r_values[ri];
      const int degree = static_cast<int>(r) - 1;
      std::vector<TrialData> trials;
      std::vector<TrialSeeds> seeds;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        seeds.push_back(seeds_for(cfg.seed, t));
        trials.push_back(runner.make_trial(seeds.back(), 0.0, degree));
      }
      auto success = [&](std::size_t d) {
        bool ok = true;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          auto cell = runner.run_cell(trials[t], seeds[t], t, d, r, degree, 0.0, 0, nullptr);
          for (auto& row : cell) {
            if (row.method == "qpma") ok = ok && row.nmse && *row.nmse < cfg.success_nmse;
            rows[ri].push_back(std::move(row));
          }
        }
        return ok;
      };
      // success(d) is taken to be monotone in d: samplers nest across d.
      MinDPoint p{r, std::nullopt};
      std::size_t lo = r - 1, hi = fr.m;
      if (success(hi)) {
        while (hi - lo > 1) {
          const std::size_t mid = lo + (hi - lo) / 2;
          (success(mid) ? hi : lo) = mid;
        }
        p.min_d = hi;
      }
      out.min_d[ri] = p;
    });
    for (auto& v : rows) out.rows.insert(out.rows.end(), v.begin(), v.end());
    out.summary = summarize(cfg, out.rows);
    out.summary["min_d"] = min_d_summary(out.min_d);
    return out;
  }

  const auto sigmas = sigma_list(cfg);
  const auto ds = d_list(cfg);
  const bool want_theory = cfg.mode == Mode::TheoryReport || cfg.mode == Mode::Solve;
  const int degree = *fr.degree;
  const std::size_t tasks = sigmas.size() * cfg.trials;
  std::vector<std::vector<ResultRow>> rows(tasks);
  std::vector<std::vector<json>> theory(tasks);
  parallel_for(tasks, cfg.threads, [&](std::size_t k) {
    const std::size_t si = k / cfg.trials, t = k % cfg.trials;
    const TrialSeeds seeds = seeds_for(cfg.seed, t);
    const TrialData td = runner.make_trial(seeds, sigmas[si], std::nullopt);
    runner.save_instance(td, si, t);
    for (std::size_t d : ds) {
      json entry;
      auto cell = runner.run_cell(td, seeds, t, d, cfg.rank, degree, sigmas[si], si, want_theory ? &entry : nullptr);
      rows[k].insert(rows[k].end(), cell.begin(), cell.end());
      if (want_theory) theory[k].push_back(std::move(entry));
    }
  });
  std::vector<json> entries;
  for (std::size_t k = 0; k < tasks; ++k) {
    out.rows.insert(out.rows.end(), rows[k].begin(), rows[k].end());
    entries.insert(entries.end(), theory[k].begin(), theory[k].end());
  }
  out.summary = summarize(cfg, out.rows);
  if (want_theory) out.theory = theory_summary(entries);
  return out;
}

void prepare_output_dir(const ExperimentConfig& cfg) {
  if (fs::exists(cfg.out)) {
    if (!fs::is_directory(cfg.out)) throw ArgumentError("output path " + cfg.out.string() + " is not a directory");
    if (!fs::is_empty(cfg.out) && !cfg.force)
      throw ArgumentError("output directory " + cfg.out.string() + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(cfg.out);
}

void write_outputs(const ExperimentConfig& cfg, const RunOutput& out) {
  fs::create_directories(cfg.out);
  write_text(cfg.out / "results.csv", format_results(out.rows));
  write_text(cfg.out / "summary.json", out.summary.dump(2) + "\n");
  if (out.theory) write_text(cfg.out / "theory.json", out.theory->dump(2) + "\n");
  if (cfg.mode == Mode::SweepMinD) {
    std::ostringstream os;
    os << "r,min_d,r_ln_r1\n";
    for (const auto& p : out.min_d)
      os << p.r << ',' << (p.min_d ? std::to_string(*p.min_d) : std::string()) << ','
         << fmt17(static_cast<double>(p.r) * std::log(static_cast<double>(p.r) + 1.0)) << "\n";
    write_text(cfg.out / "min_d.csv", os.str());
  }
}

}  // namespace colcomplete
