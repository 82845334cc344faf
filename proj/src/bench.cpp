#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "hessavg/bench.hpp"
#include "hessavg/io.hpp"

namespace hessavg::bench {

using nlohmann::json;

void ExperimentGrid::validate() const {
  require(num_seeds >= 1, "grid: num_seeds must be >= 1");
  require(tol > 0.0, "grid: tol must be positive");
  require(max_iter >= 1, "grid: max_iter must be >= 1");
  require(!coherence_modes.empty() && !kappa_list.empty(), "grid: need at least one setup");
  require(n >= 1 && d >= 1 && n >= d, "grid: need n >= d >= 1");
  require(reg_nu > 0.0, "grid: reg_nu must be positive");
  for (double k : kappa_list) require(k >= 0.0, "grid: kappa exponents must be >= 0");
  for (double s : s_list) require(s > 0.0, "grid: s multiples must be positive");
  for (const auto& v : variants) (void)parse_variant(v);
  for (const auto& o : oracle_kinds)
    for (double s : s_list) hessavg::validate(make_oracle(o, sample_size(*this, s), d, less_nnz));
  // subsample beyond n is caught by the oracle itself at run time
}

namespace {

const std::vector<std::string> kGridKeys = {"coherence_modes", "kappa_list", "s_list", "oracle_kinds", "variants",
                                            "bfgs", "num_seeds", "base_seed", "tol", "max_iter", "n", "d",
                                            "reg_nu", "data_seed", "beta", "rho", "less_nnz"};

}  // namespace

ExperimentGrid grid_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("grid: ") + e.what());
  }
  require(j.is_object(), "grid: expected a JSON object");
  for (const auto& [k, _] : j.items())
    require(std::find(kGridKeys.begin(), kGridKeys.end(), k) != kGridKeys.end(), "grid: unknown key '" + k + "'");

  ExperimentGrid g;
  try {
    if (j.contains("coherence_modes")) {
      g.coherence_modes.clear();
      for (const auto& c : j["coherence_modes"]) g.coherence_modes.push_back(parse_coherence(c.get<std::string>()));
    }
    if (j.contains("kappa_list")) g.kappa_list = j["kappa_list"].get<std::vector<double>>();
    if (j.contains("s_list")) g.s_list = j["s_list"].get<std::vector<double>>();
    if (j.contains("oracle_kinds")) g.oracle_kinds = j["oracle_kinds"].get<std::vector<std::string>>();
    if (j.contains("variants")) g.variants = j["variants"].get<std::vector<std::string>>();
    g.bfgs = j.value("bfgs", g.bfgs);
    g.num_seeds = j.value("num_seeds", g.num_seeds);
    g.base_seed = j.value("base_seed", g.base_seed);
    g.tol = j.value("tol", g.tol);
    g.max_iter = j.value("max_iter", g.max_iter);
    g.n = j.value("n", g.n);
    g.d = j.value("d", g.d);
    g.reg_nu = j.value("reg_nu", g.reg_nu);
    g.data_seed = j.value("data_seed", g.data_seed);
    g.beta = j.value("beta", g.beta);
    g.rho = j.value("rho", g.rho);
    g.less_nnz = j.value("less_nnz", g.less_nnz);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

std::string grid_to_json(const ExperimentGrid& g) {
  json j;
  j["coherence_modes"] = json::array();
  for (auto c : g.coherence_modes) j["coherence_modes"].push_back(std::string(to_string(c)));
  j["kappa_list"] = g.kappa_list;
  j["s_list"] = g.s_list;
  j["oracle_kinds"] = g.oracle_kinds;
  j["variants"] = g.variants;
  j["bfgs"] = g.bfgs;
  j["num_seeds"] = g.num_seeds;
  j["base_seed"] = g.base_seed;
  j["tol"] = g.tol;
  j["max_iter"] = g.max_iter;
  j["n"] = g.n;
  j["d"] = g.d;
  j["reg_nu"] = g.reg_nu;
  j["data_seed"] = g.data_seed;
  j["beta"] = g.beta;
  j["rho"] = g.rho;
  j["less_nnz"] = g.less_nnz;
  return j.dump(2) + "\n";
}

std::string cell_label(const CellKey& key) {
  return std::string(to_string(key.setup.coherence)) + "|kappa=d^" + io::format_double(key.setup.kappa_exp) +
         "|s=" + io::format_double(key.s_mult) + "d|" + key.oracle + "|" + key.variant;
}

std::uint64_t run_seed(const ExperimentGrid& grid, const CellKey& key, int slot) {
  return grid.base_seed + fnv1a64(cell_label(key) + "|slot=" + std::to_string(slot));
}

DataGenConfig data_config(const ExperimentGrid& grid, const Setup& setup) {
  DataGenConfig c;
  c.n = grid.n;
  c.d = grid.d;
  c.coherence_mode = setup.coherence;
  c.kappa_A = std::pow(static_cast<double>(grid.d), setup.kappa_exp);
  c.reg_nu = grid.reg_nu;
  c.seed = grid.data_seed;
  return c;
}

std::size_t sample_size(const ExperimentGrid& grid, double s_mult) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s_mult * static_cast<double>(grid.d))));
}

SolverConfig solver_config(const ExperimentGrid& grid, const CellKey& key, std::uint64_t seed) {
  SolverConfig c;
  c.beta = grid.beta;
  c.rho_backtrack = grid.rho;
  c.max_iter = grid.max_iter;
  c.tol_hstar = grid.tol;
  c.oracle = make_oracle(key.oracle, sample_size(grid, key.s_mult), grid.d, grid.less_nnz);
  c.weights = parse_variant(key.variant);
  c.seed = seed;
  return c;
}

std::optional<int> lower_quantile(std::vector<std::optional<int>> values, double q) {
  require(!values.empty(), "lower_quantile: no values");
  // dnf sorts last
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  return values[idx];
}

Summary summarize(const std::vector<RunOutcome>& runs) {
  Summary s;
  s.runs = static_cast<int>(runs.size());
  std::vector<std::optional<int>> its;
  for (const auto& r : runs) {
    its.push_back(r.iterations);
    if (!r.error.empty()) ++s.failures;
  }
  if (its.empty()) return s;
  s.median = lower_quantile(its, 0.5);
  s.q1 = lower_quantile(its, 0.25);
  s.q3 = lower_quantile(its, 0.75);
  return s;
}

int default_jobs() {
  if (const char* env = std::getenv("HESSAVG_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

namespace {

struct Instance {
  Setup setup;
  GeneratedData data;
  std::unique_ptr<RegularizedLogistic> objective;
  ReferenceSolution ref;
};

RunOutcome to_outcome(const RunResult& r, int slot, std::uint64_t seed) {
  RunOutcome o;
  o.slot = slot;
  o.seed = seed;
  o.iterations = r.iterations_to_tol;
  o.error = r.abort_reason;
  return o;
}

// Runs tasks[0..count) on `jobs` threads; each task writes only its own slot.
template <class F>
void parallel_for(std::size_t count, int jobs, const F& task, const Progress& progress) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
      const std::size_t k = ++done;
      if (progress) {
        std::lock_guard lock(mu);
        progress(k, count);
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::jthread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

BenchResult run_grid(const ExperimentGrid& grid, int jobs, const Progress& progress) {
  grid.validate();
  if (jobs <= 0) jobs = default_jobs();

  std::vector<Instance> instances;
  for (auto c : grid.coherence_modes)
    for (double k : grid.kappa_list) instances.push_back(Instance{Setup{c, k}, {}, nullptr, {}});
  parallel_for(
      instances.size(), jobs,
      [&](std::size_t i) {
        Instance& inst = instances[i];
        inst.data = generate(data_config(grid, inst.setup));
        inst.objective = std::make_unique<RegularizedLogistic>(inst.data.dataset, grid.reg_nu);
        inst.ref = solve_reference(*inst.objective, Vector::Zero(static_cast<Eigen::Index>(grid.d)));
      },
      {});

  BenchResult result;
  struct Task {
    std::size_t instance;
    std::size_t cell;  // index into result.cells, or npos for BFGS
    int slot;
  };
  constexpr auto kBfgs = static_cast<std::size_t>(-1);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const double kappa_A = std::pow(static_cast<double>(grid.d), inst.setup.kappa_exp);
    if (grid.bfgs) {
      BfgsResult b;
      b.setup = inst.setup;
      b.kappa_A = kappa_A;
      b.measured_coherence = inst.data.report.measured_coherence;
      b.measured_condition = inst.data.report.measured_condition;
      result.bfgs.push_back(b);
      tasks.push_back({i, kBfgs, static_cast<int>(result.bfgs.size() - 1)});
    }
    for (double s : grid.s_list)
      for (const auto& o : grid.oracle_kinds)
        for (const auto& v : grid.variants) {
          CellResult cell;
          cell.key = CellKey{inst.setup, s, o, v};
          cell.kappa_A = kappa_A;
          cell.s = sample_size(grid, s);
          cell.runs.resize(static_cast<std::size_t>(grid.num_seeds));
          result.cells.push_back(std::move(cell));
          for (int slot = 0; slot < grid.num_seeds; ++slot) tasks.push_back({i, result.cells.size() - 1, slot});
        }
  }

  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(grid.d));
  parallel_for(
      tasks.size(), jobs,
      [&](std::size_t k) {
        const Task& task = tasks[k];
        const Instance& inst = instances[task.instance];
        if (task.cell == kBfgs) {
          auto& b = result.bfgs[static_cast<std::size_t>(task.slot)];
          try {
            b.run = to_outcome(bfgs_run(*inst.objective, x0, grid.beta, grid.rho, grid.max_iter, grid.tol, inst.ref), 0, 0);
          } catch (const std::exception& e) {
            b.run.error = e.what();
          }
          return;
        }
        CellResult& cell = result.cells[task.cell];
        const std::uint64_t seed = run_seed(grid, cell.key, task.slot);
        RunOutcome& out = cell.runs[static_cast<std::size_t>(task.slot)];
        try {
          out = to_outcome(run(*inst.objective, x0, solver_config(grid, cell.key, seed), inst.ref), task.slot, seed);
        } catch (const std::exception& e) {
          out.slot = task.slot;
          out.seed = seed;
          out.iterations.reset();
          out.error = e.what();
        }
      },
      progress);

  for (auto& cell : result.cells) cell.summary = summarize(cell.runs);
  return result;
}

std::string cell_text(const std::optional<int>& v) { return v ? std::to_string(*v) : "dnf"; }

std::string results_csv(const BenchResult& result) {
  std::string out = std::string(io::kCsvVersionLine) + "\n";
  out += "coherence,kappa_A,s,oracle,variant,median,q1,q3,runs,failures\n";
  for (const auto& b : result.bfgs) {
    const std::optional<int> it = b.run.iterations;
    out += std::string(to_string(b.setup.coherence)) + "," + io::format_double(b.kappa_A) + ",0,none,bfgs," +
           cell_text(it) + "," + cell_text(it) + "," + cell_text(it) + ",1," + (b.run.error.empty() ? "0" : "1") +
           "\n";
  }
  for (const auto& c : result.cells) {
    out += std::string(to_string(c.key.setup.coherence)) + "," + io::format_double(c.kappa_A) + "," +
           std::to_string(c.s) + "," + c.key.oracle + "," + c.key.variant + "," + cell_text(c.summary.median) + "," +
           cell_text(c.summary.q1) + "," + cell_text(c.summary.q3) + "," + std::to_string(c.summary.runs) + "," +
           std::to_string(c.summary.failures) + "\n";
  }
  return out;
}

std::string runs_csv(const BenchResult& result) {
  std::string out = std::string(io::kCsvVersionLine) + "\n";
  out += "coherence,kappa_A,s,oracle,variant,slot,seed,iterations,error\n";
  for (const auto& c : result.cells)
    for (const auto& r : c.runs) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out += std::string(to_string(c.key.setup.coherence)) + "," + io::format_double(c.kappa_A) + "," +
             std::to_string(c.s) + "," + c.key.oracle + "," + c.key.variant + "," + std::to_string(r.slot) + "," +
             std::to_string(r.seed) + "," + cell_text(r.iterations) + "," + err + "\n";
    }
  return out;
}

std::string results_json(const BenchResult& result) {
  auto iters = [](const std::optional<int>& v) -> json { return v ? json(*v) : json("dnf"); };
  json j;
  j["bfgs"] = json::array();
  for (const auto& b : result.bfgs) {
    j["bfgs"].push_back({{"coherence", std::string(to_string(b.setup.coherence))},
                         {"kappa_A", b.kappa_A},
                         {"measured_coherence", b.measured_coherence},
                         {"measured_condition", b.measured_condition},
                         {"iterations", iters(b.run.iterations)},
                         {"error", b.run.error}});
  }
  j["cells"] = json::array();
  for (const auto& c : result.cells) {
    json runs = json::array();
    for (const auto& r : c.runs) runs.push_back({{"slot", r.slot}, {"seed", r.seed}, {"iterations", iters(r.iterations)}});
    j["cells"].push_back({{"coherence", std::string(to_string(c.key.setup.coherence))},
                          {"kappa_A", c.kappa_A},
                          {"s", c.s},
                          {"oracle", c.key.oracle},
                          {"variant", c.key.variant},
                          {"median", iters(c.summary.median)},
                          {"q1", iters(c.summary.q1)},
                          {"q3", iters(c.summary.q3)},
                          {"runs", c.summary.runs},
                          {"failures", c.summary.failures},
                          {"per_run", runs}});
  }
  return j.dump(2) + "\n";
}

}  // namespace hessavg::bench
