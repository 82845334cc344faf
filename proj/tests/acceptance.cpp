// Acceptance run at full scale: n = 1000, d = 100, 50 seeds per cell.
// Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>
#include <thread>

#include "hessavg/bench.hpp"
#include "hessavg/datagen.hpp"
#include "hessavg/oracles.hpp"
#include "hessavg/solver.hpp"
#include "hessavg/theory.hpp"

using namespace hessavg;
using namespace hessavg::bench;

namespace {

// Bands, pinned.
constexpr int kSeeds = 50;
constexpr int kLowAvgLo = 18, kLowAvgHi = 40, kLowNoAvgMin = 150;
constexpr int kHighWeightMax = 110, kHighUnifLo = 70, kHighUnifHi = 180, kHighNoAvgMin = 200;
constexpr int kBfgsLo = 170, kBfgsHi = 270;
constexpr int kGaussAvgLo = 18, kGaussAvgHi = 35, kGaussNoAvgMin = 180;
constexpr double kRatioAvgMax = 0.2, kRatioNoAvgMin = 0.5;
constexpr int kRatioSeedsNeeded = 45;
constexpr double kSlopeTarget = -0.5, kSlopeTol = 0.15;
constexpr double kRuntimeBudgetSec = 600.0;
constexpr int kTheorySets = 20;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string txt(const std::optional<int>& v) { return cell_text(v); }

bool in_band(const std::optional<int>& v, int lo, int hi) { return v && *v >= lo && *v <= hi; }
bool at_least(const std::optional<int>& v, int lo) { return !v || *v >= lo; }  // dnf counts as large

const CellResult& find(const BenchResult& r, Coherence c, const std::string& oracle, const std::string& variant) {
  for (const auto& cell : r.cells)
    if (cell.key.setup.coherence == c && cell.key.oracle == oracle && cell.key.variant == variant) return cell;
  throw std::runtime_error("missing cell");
}

bool lt(const std::optional<int>& a, const std::optional<int>& b) {
  if (!a) return false;
  if (!b) return true;
  return *a < *b;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

TheoryInputs random_inputs(Rng& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  TheoryInputs in;
  in.kappa = std::pow(10.0, 2.0 * U(rng));
  in.lambda_min = std::pow(10.0, -U(rng));
  in.upsilon = U(rng) < 0.2 ? 0.0 : std::pow(10.0, -2.0 + 3.0 * U(rng));
  in.epsilon = 0.05 + 0.9 * U(rng);
  in.delta = std::pow(10.0, -4.0 + 3.5 * U(rng));
  in.d = 1 + static_cast<std::size_t>(1000 * U(rng));
  if (static_cast<double>(in.d) / in.delta < std::numbers::e) in.delta = static_cast<double>(in.d) / 3.0;
  in.delta = std::min(in.delta, 0.5);
  in.radius_nu = 0.05 + 0.95 * U(rng);
  in.beta = 0.01 + 0.48 * U(rng);
  in.rho = 0.1 + 0.8 * U(rng);
  in.lipschitz_L = 10.0 * U(rng);
  in.f0_gap = 10.0 * U(rng);
  const double pick = U(rng);
  if (pick < 1.0 / 3) {
    in.weights = weights::Uniform{};
  } else if (pick < 2.0 / 3) {
    in.weights = weights::Power{1.0 + 3.0 * U(rng)};
  } else {
    in.weights = weights::LogPower{};
  }
  in.psi = psi_bound(in.weights, 1000);
  return in;
}

}  // namespace

int main() {
  const int jobs = std::max<int>(default_jobs(), static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  char buf[512];

  ExperimentGrid grid;
  grid.coherence_modes = {Coherence::Low, Coherence::High};
  grid.kappa_list = {1.0};
  grid.s_list = {1.0};
  grid.oracle_kinds = {"subsample"};
  grid.variants = {"noavg", "unifavg", "weightavg"};
  grid.num_seeds = kSeeds;

  // Criterion 1 timing covers the whole low-coherence subsample cell
  // (reference solve, BFGS and 150 runs).
  ExperimentGrid low_only = grid;
  low_only.coherence_modes = {Coherence::Low};
  const auto t0 = std::chrono::steady_clock::now();
  const BenchResult low = run_grid(low_only, jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ExperimentGrid high_only = grid;
  high_only.coherence_modes = {Coherence::High};
  high_only.bfgs = false;
  const BenchResult high = run_grid(high_only, jobs);

  ExperimentGrid gauss = low_only;
  gauss.oracle_kinds = {"gauss"};
  gauss.bfgs = false;
  const BenchResult gs = run_grid(gauss, jobs);

  {
    const auto& u = find(low, Coherence::Low, "subsample", "unifavg").summary;
    const auto& w = find(low, Coherence::Low, "subsample", "weightavg").summary;
    const auto& n = find(low, Coherence::Low, "subsample", "noavg").summary;
    const bool pass = in_band(u.median, kLowAvgLo, kLowAvgHi) && in_band(w.median, kLowAvgLo, kLowAvgHi) &&
                      at_least(n.median, kLowNoAvgMin) && secs <= kRuntimeBudgetSec && u.failures == 0 &&
                      w.failures == 0;
    std::snprintf(buf, sizeof buf, "low coherence, subsample s=d: unifavg %s, weightavg %s in [%d, %d]; noavg %s >= %d; %.1f s",
                  txt(u.median).c_str(), txt(w.median).c_str(), kLowAvgLo, kLowAvgHi, txt(n.median).c_str(),
                  kLowNoAvgMin, secs);
    report(1, pass, buf);
  }
  {
    const auto& u = find(high, Coherence::High, "subsample", "unifavg").summary;
    const auto& w = find(high, Coherence::High, "subsample", "weightavg").summary;
    const auto& n = find(high, Coherence::High, "subsample", "noavg").summary;
    const bool order = lt(w.median, u.median) && lt(u.median, n.median);
    const bool pass = w.median && *w.median <= kHighWeightMax && in_band(u.median, kHighUnifLo, kHighUnifHi) &&
                      at_least(n.median, kHighNoAvgMin) && order;
    std::snprintf(buf, sizeof buf,
                  "high coherence, subsample s=d: weightavg %s <= %d, unifavg %s in [%d, %d], noavg %s >= %d, ordering %s",
                  txt(w.median).c_str(), kHighWeightMax, txt(u.median).c_str(), kHighUnifLo, kHighUnifHi,
                  txt(n.median).c_str(), kHighNoAvgMin, order ? "ok" : "violated");
    report(2, pass, buf);
  }
  {
    const auto it = low.bfgs.empty() ? std::optional<int>() : low.bfgs.front().run.iterations;
    std::snprintf(buf, sizeof buf, "BFGS, low coherence: %s in [%d, %d] (deterministic, one run)", txt(it).c_str(),
                  kBfgsLo, kBfgsHi);
    report(3, in_band(it, kBfgsLo, kBfgsHi), buf);
  }
  {
    const auto& u = find(gs, Coherence::Low, "gauss", "unifavg").summary;
    const auto& w = find(gs, Coherence::Low, "gauss", "weightavg").summary;
    const auto& n = find(gs, Coherence::Low, "gauss", "noavg").summary;
    const bool pass = in_band(u.median, kGaussAvgLo, kGaussAvgHi) && in_band(w.median, kGaussAvgLo, kGaussAvgHi) &&
                      at_least(n.median, kGaussNoAvgMin);
    std::snprintf(buf, sizeof buf, "low coherence, gaussian sketch s=d: unifavg %s, weightavg %s in [%d, %d]; noavg %s >= %d",
                  txt(u.median).c_str(), txt(w.median).c_str(), kGaussAvgLo, kGaussAvgHi, txt(n.median).c_str(),
                  kGaussNoAvgMin);
    report(4, pass, buf);
  }

  // Criterion 5: replay the low-coherence subsample runs with their recorded
  // seeds and look at the error ratios.
  {
    const Setup setup{Coherence::Low, 1.0};
    const GeneratedData data = generate(data_config(low_only, setup));
    const RegularizedLogistic f(data.dataset, low_only.reg_nu);
    const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(low_only.d));
    const ReferenceSolution ref = solve_reference(f, x0);
    std::map<std::string, int> ok;
    std::map<std::string, std::vector<double>> medians;
    for (const std::string variant : {"noavg", "unifavg", "weightavg"}) {
      const CellKey key{setup, 1.0, "subsample", variant};
      for (int slot = 0; slot < kSeeds; ++slot) {
        const RunResult r = run(f, x0, solver_config(low_only, key, run_seed(low_only, key, slot)), ref);
        std::vector<double> ratios = ratio_diagnostics(r);
        if (ratios.size() > 10) ratios.erase(ratios.begin(), ratios.end() - 10);
        const double m = ratios.empty() ? 1.0 : median_of(ratios);
        medians[variant].push_back(m);
        ok[variant] += variant == "noavg" ? m >= kRatioNoAvgMin : m <= kRatioAvgMax;
      }
    }
    const bool pass = ok["unifavg"] >= kRatioSeedsNeeded && ok["weightavg"] >= kRatioSeedsNeeded &&
                      ok["noavg"] >= kRatioSeedsNeeded;
    std::snprintf(buf, sizeof buf,
                  "last-10 ratio medians: unifavg <= %.2f in %d/50 (median over seeds %.3f), weightavg <= %.2f in %d/50 "
                  "(%.3f), noavg >= %.2f in %d/50 (%.3f); need %d",
                  kRatioAvgMax, ok["unifavg"], median_of(medians["unifavg"]), kRatioAvgMax, ok["weightavg"],
                  median_of(medians["weightavg"]), kRatioNoAvgMin, ok["noavg"], median_of(medians["noavg"]),
                  kRatioSeedsNeeded);
    report(5, pass, buf);
  }

  // Criterion 6: decay of the averaged noise at a fixed point.
  {
    const GeneratedData data = generate(data_config(low_only, {Coherence::Low, 1.0}));
    const RegularizedLogistic f(data.dataset, low_only.reg_nu);
    const Vector x = solve_reference(f, Vector::Zero(100)).x_star;
    const Matrix H = f.hessian(x);
    const OracleKind kind = oracle::Subsample{50};
    AveragingState state;
    std::vector<double> lx, ly;
    double next = 100.0;
    for (int t = 0; t <= 10000; ++t) {
      Rng rng = make_stream(20240601, static_cast<std::uint64_t>(t));
      state = update(std::move(state), weights::Uniform{}, estimate(kind, f, x, rng).matrix);
      if (t + 1 >= next) {
        lx.push_back(std::log(t + 1.0));
        ly.push_back(std::log(spectral_norm_sym(state.h_tilde - H)));
        next *= 1.1;
      }
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    const double slope = sxy / sxx;
    std::snprintf(buf, sizeof buf, "slope of log||E_bar_t|| vs log t on [100, 1e4]: %.3f (target %.2f +- %.2f, %zu points)",
                  slope, kSlopeTarget, kSlopeTol, lx.size());
    report(6, std::abs(slope - kSlopeTarget) <= kSlopeTol, buf);
  }

  // Criterion 7: the property suites of the unit-test binary.
  {
    const std::string cmd = std::string(HESSAVG_TESTS_PATH) +
                            " -ts=problem,averaging,oracles,solver,bench,cli,io,kernels,datagen -s=false > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const bool pass = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    report(7, pass, "property suites (finite differences, averaging, oracle moments, skip rule, monotonicity, "
                    "one-step quadratic, parallel determinism)");
  }

  // Criterion 8: substitute-back checks on random parameter sets.
  {
    Rng rng = make_stream(8088);
    int passed = 0;
    std::string first_failure;
    for (int k = 0; k < kTheorySets; ++k) {
      const TheoryInputs in = random_inputs(rng);
      const auto checks = self_check(in, transitions(in));
      if (all_pass(checks)) {
        ++passed;
      } else if (first_failure.empty()) {
        for (const auto& c : checks)
          if (!c.pass) first_failure = "set " + std::to_string(k) + " " + c.name + ": " + c.detail;
      }
    }
    std::snprintf(buf, sizeof buf, "theory self-check: %d/%d parameter sets pass all checks%s%s", passed, kTheorySets,
                  first_failure.empty() ? "" : "; ", first_failure.c_str());
    report(8, passed == kTheorySets, buf);
  }

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "NOT ACCEPTED", failures);
  return failures == 0 ? 0 : 1;
}
