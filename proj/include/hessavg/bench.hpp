#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hessavg/datagen.hpp"
#include "hessavg/solver.hpp"

namespace hessavg::bench {

// Experiment grid. kappa_list holds exponents (kappa_A =
// d^k) and s_list holds multiples of d.
struct ExperimentGrid {
  std::vector<Coherence> coherence_modes{Coherence::Low};
  std::vector<double> kappa_list{1.0};
  std::vector<double> s_list{1.0};
  std::vector<std::string> oracle_kinds{"subsample"};
  std::vector<std::string> variants{"noavg", "unifavg", "weightavg"};
  bool bfgs = true;
  int num_seeds = 50;
  std::uint64_t base_seed = 0;
  double tol = 1e-6;
  int max_iter = 999;

  std::size_t n = 1000;
  std::size_t d = 100;
  double reg_nu = 1e-3;
  std::uint64_t data_seed = 42;
  double beta = 0.1;
  double rho = 0.5;
  std::size_t less_nnz = 0;  // 0: ceil(0.1 d)

  void validate() const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
ExperimentGrid grid_from_json(const std::string& text);
std::string grid_to_json(const ExperimentGrid& grid);

// One dataset per (coherence, kappa exponent).
struct Setup {
  Coherence coherence = Coherence::Low;
  double kappa_exp = 1.0;
};

struct CellKey {
  Setup setup;
  double s_mult = 1.0;
  std::string oracle;
  std::string variant;
};

std::string cell_label(const CellKey& key);
// base_seed + fnv1a64(cell label + slot). Stable when rows are added.
std::uint64_t run_seed(const ExperimentGrid& grid, const CellKey& key, int slot);

DataGenConfig data_config(const ExperimentGrid& grid, const Setup& setup);
std::size_t sample_size(const ExperimentGrid& grid, double s_mult);
SolverConfig solver_config(const ExperimentGrid& grid, const CellKey& key, std::uint64_t seed);

struct RunOutcome {
  int slot = 0;
  std::uint64_t seed = 0;
  std::optional<int> iterations;  // empty: did not reach tol within max_iter
  std::string error;              // exception text or abort reason
};

// Iteration counts summarised with the lower median / lower quartiles.
// Values past max_iter are reported as "dnf".
struct Summary {
  std::optional<int> median, q1, q3;
  int runs = 0;
  int failures = 0;
};

std::optional<int> lower_quantile(std::vector<std::optional<int>> values, double q);
Summary summarize(const std::vector<RunOutcome>& runs);

struct CellResult {
  CellKey key;
  double kappa_A = 0.0;
  std::size_t s = 0;
  Summary summary;
  std::vector<RunOutcome> runs;
};

struct BfgsResult {
  Setup setup;
  double kappa_A = 0.0;
  double measured_coherence = 0.0;
  double measured_condition = 0.0;
  RunOutcome run;
};

struct BenchResult {
  std::vector<CellResult> cells;
  std::vector<BfgsResult> bfgs;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// Runs every cell; jobs <= 0 picks HESSAVG_JOBS or 1. The result does not
// depend on jobs.
BenchResult run_grid(const ExperimentGrid& grid, int jobs, const Progress& progress = {});

// HESSAVG_JOBS if set and positive, else 1.
int default_jobs();

std::string results_csv(const BenchResult& result);
std::string runs_csv(const BenchResult& result);
std::string results_json(const BenchResult& result);

// "dnf" or the integer.
std::string cell_text(const std::optional<int>& v);

}  // namespace hessavg::bench
