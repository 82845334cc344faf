// hessavg: dataset generation, single runs, experiment grids, theory
// diagnostics and rate extraction.
//
// Exit codes: 0 ok, 1 I/O or numerical failure, 2 usage, 3 oracle/objective
// capability mismatch, 4 theory precondition.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "hessavg/bench.hpp"
#include "hessavg/datagen.hpp"
#include "hessavg/io.hpp"
#include "hessavg/solver.hpp"
#include "hessavg/theory.hpp"

namespace fs = std::filesystem;
using namespace hessavg;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kCapability = 3, kTheory = 4 };

struct GenerateArgs {
  DataGenConfig config;
  std::string coherence = "low";
  std::string out;
};

struct SolveArgs {
  std::string data;
  std::string oracle = "subsample";
  std::optional<std::size_t> s;
  std::size_t nnz = 0;
  std::string variant = "unifavg";
  double beta = 0.1;
  double rho = 0.5;
  double tol = 1e-6;
  int max_iter = 999;
  std::uint64_t seed = 0;
  double reg_nu = 1e-3;
  std::string trace_out;
  std::string summary_out;
};

struct BenchArgs {
  std::string grid;
  std::string out = "bench_out";
  int jobs = 0;
  bool quiet = false;
};

struct DiagArgs {
  TheoryInputs in;
  std::string weights = "weightavg";
  std::optional<double> psi;
  std::string out;
  std::string curves_out;
  int curve_points = 200;
};

struct RatesArgs {
  std::string trace;
  std::string out;
};

json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

int cmd_generate(const GenerateArgs& a) {
  DataGenConfig c = a.config;
  c.coherence_mode = parse_coherence(a.coherence);
  const GeneratedData g = generate(c);
  const fs::path stem(a.out);
  io::write_dataset_csv(fs::path(a.out + ".csv"), g.dataset);
  io::write_dataset_binary(fs::path(a.out + ".bin"), g.dataset);
  io::write_gen_report(fs::path(a.out + ".report.json"), c, g.report);
  std::printf("wrote %s.{csv,bin,report.json}: coherence %.4g, condition %.4g\n", a.out.c_str(),
              g.report.measured_coherence, g.report.measured_condition);
  return kOk;
}

int cmd_solve(const SolveArgs& a) {
  const auto obj = io::load_objective(a.data, a.reg_nu);
  const auto d = obj->dimension();
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(d));
  const ReferenceSolution ref = solve_reference(*obj, x0, ReferenceOptions{1e-13, 200, a.beta, a.rho});

  SolverConfig cfg;
  cfg.beta = a.beta;
  cfg.rho_backtrack = a.rho;
  cfg.tol_hstar = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.seed = a.seed;
  cfg.weights = parse_variant(a.variant);
  cfg.oracle = make_oracle(a.oracle, a.s.value_or(a.oracle == "exact" ? 0 : d), d, a.nnz);
  const RunResult r = run(*obj, x0, cfg, ref);

  json summary;
  summary["iterations_to_tol"] = r.iterations_to_tol ? json(*r.iterations_to_tol) : json(nullptr);
  summary["converged"] = r.converged;
  summary["oracle"] = oracle_name(cfg.oracle);
  summary["s"] = sketch_size(cfg.oracle);
  summary["variant"] = variant_name(cfg.weights);
  summary["seed"] = a.seed;
  summary["final_hstar_error"] = r.records.back().hstar_error;
  summary["skipped"] = std::count_if(r.records.begin(), r.records.end(), [](const auto& x) { return x.skipped; });
  if (!r.abort_reason.empty()) summary["abort_reason"] = r.abort_reason;

  if (!a.trace_out.empty()) {
    io::write_trace_csv(a.trace_out, r.records);
    fs::path sp = a.summary_out.empty() ? fs::path(a.trace_out).replace_extension(".summary.json") : fs::path(a.summary_out);
    io::write_text(sp, summary.dump(2) + "\n");
  } else if (!a.summary_out.empty()) {
    io::write_text(a.summary_out, summary.dump(2) + "\n");
  }
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_bench(const BenchArgs& a) {
  const auto grid = bench::grid_from_json(io::slurp(a.grid));
  const int jobs = a.jobs > 0 ? a.jobs : bench::default_jobs();
  bench::Progress progress;
  if (!a.quiet)
    progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu / %zu runs", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  const auto result = bench::run_grid(grid, jobs, progress);
  const fs::path out(a.out);
  io::write_text(out / "results.csv", bench::results_csv(result));
  io::write_text(out / "runs.csv", bench::runs_csv(result));
  io::write_text(out / "results.json", bench::results_json(result));

  for (const auto& b : result.bfgs)
    std::printf("%-5s kappa_A=%-8.4g bfgs                  %s\n", std::string(to_string(b.setup.coherence)).c_str(),
                b.kappa_A, bench::cell_text(b.run.iterations).c_str());
  for (const auto& c : result.cells)
    std::printf("%-5s kappa_A=%-8.4g s=%-5zu %-11s %-10s median %-4s  [%s, %s]\n",
                std::string(to_string(c.key.setup.coherence)).c_str(), c.kappa_A, c.s, c.key.oracle.c_str(),
                c.key.variant.c_str(), bench::cell_text(c.summary.median).c_str(),
                bench::cell_text(c.summary.q1).c_str(), bench::cell_text(c.summary.q3).c_str());
  return kOk;
}

int cmd_diag(DiagArgs a) {
  a.in.weights = parse_variant(a.weights);
  a.in.psi = a.psi ? *a.psi : psi_bound(a.in.weights, 1000);
  const TransitionReport r = transitions(a.in);
  const auto checks = self_check(a.in, r);

  json j;
  j["t1"] = r.t1;
  j["t2"] = r.t2;
  j["t2_clamped"] = r.t2_clamped;
  j["t_total"] = r.t_total;
  j["j_transition"] = r.j_transition;
  j["k_transition"] = number_or_inf(r.k_transition);
  j["i1"] = r.i1;
  j["i_total"] = r.i_total;
  j["u_transition"] = r.u_transition;
  j["v_transition"] = number_or_inf(r.v_transition);
  j["phi"] = phi_rate(a.in);
  j["psi"] = a.in.psi;
  j["weights"] = variant_name(a.in.weights);
  j["kappa_note"] = "kappa is lambda_max/lambda_min of the Hessian, not kappa_A of the data";
  json sc = json::object();
  for (const auto& c : checks) sc[c.name] = c.pass ? "pass" : "fail: " + c.detail;
  j["self_check"] = sc;
  j["self_check_pass"] = all_pass(checks);

  const std::string text = j.dump(2) + "\n";
  if (!a.out.empty()) io::write_text(a.out, text);
  std::cout << text;

  if (!a.curves_out.empty()) {
    std::string csv = std::string(io::kCsvVersionLine) + "\nt,rho_t,theta_t\n";
    const double tmax = 1e6;
    for (int k = 0; k < a.curve_points; ++k) {
      const double t = std::floor(std::expm1(std::log1p(tmax) * k / std::max(1, a.curve_points - 1)));
      csv += io::format_double(t) + "," + io::format_double(rho_t(a.in, r.t_total, r.j_transition, t)) + "," +
             io::format_double(theta_t(a.in, r.i_total, r.u_transition, t)) + "\n";
    }
    io::write_text(a.curves_out, csv);
  }
  return all_pass(checks) ? kOk : kTheory;
}

int cmd_rates(const RatesArgs& a) {
  const auto recs = io::read_trace_csv(a.trace);
  if (recs.size() < 2) {
    std::fprintf(stderr, "hessavg rates: trace needs at least 2 rows\n");
    return kUsage;
  }
  std::string csv = std::string(io::kCsvVersionLine) + "\nt,ratio\n";
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    if (recs[i].hstar_error == 0.0) continue;
    const double r = recs[i + 1].hstar_error / recs[i].hstar_error;
    ratios.push_back(r);
    csv += std::to_string(recs[i].t) + "," + io::format_double(r) + "\n";
  }
  if (!a.out.empty())
    io::write_text(a.out, csv);
  else
    std::cout << csv;
  if (!ratios.empty()) {
    std::vector<double> tail(ratios.end() - static_cast<long>(std::min<std::size_t>(10, ratios.size())), ratios.end());
    std::nth_element(tail.begin(), tail.begin() + static_cast<long>((tail.size() - 1) / 2), tail.end());
    std::fprintf(stderr, "median of last %zu ratios: %.4g\n", tail.size(), tail[(tail.size() - 1) / 2]);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Newton with Hessian averaging: experiments and diagnostics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic logistic-regression dataset");
  g->add_option("--n", gen.config.n, "Number of data points")->check(CLI::PositiveNumber);
  g->add_option("--d", gen.config.d, "Dimension")->check(CLI::PositiveNumber);
  g->add_option("--coherence", gen.coherence, "low or high")->check(CLI::IsMember({"low", "high"}));
  g->add_option("--kappa", gen.config.kappa_A, "Condition number of A")->check(CLI::Range(1.0, 1e300));
  g->add_option("--reg-nu", gen.config.reg_nu, "Ridge parameter");
  g->add_option("--seed", gen.config.seed, "Random seed");
  g->add_option("--out", gen.out, "Output path stem (writes .csv, .bin, .report.json)")->required();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run one stochastic Newton solve and write its trace");
  s->add_option("--data", sol.data, "Dataset (.csv, .bin) or quadratic stub (.json)")->required();
  s->add_option("--oracle", sol.oracle)->check(CLI::IsMember({"exact", "subsample", "gauss", "countsketch", "less"}));
  s->add_option("--s", sol.s, "Sample or sketch size (default d)");
  s->add_option("--nnz", sol.nnz, "Nonzeros per row for less (default ceil(0.1 d))");
  s->add_option("--variant", sol.variant, "noavg, unifavg, weightavg or power:<p>");
  s->add_option("--beta", sol.beta);
  s->add_option("--rho", sol.rho);
  s->add_option("--tol", sol.tol);
  s->add_option("--max-iter", sol.max_iter);
  s->add_option("--seed", sol.seed);
  s->add_option("--reg-nu", sol.reg_nu, "Ridge parameter for logistic datasets");
  s->add_option("--trace-out", sol.trace_out, "Per-iteration CSV");
  s->add_option("--summary-out", sol.summary_out, "Summary JSON (default: next to the trace)");

  BenchArgs ben;
  ben.jobs = 0;
  auto* b = app.add_subcommand("bench", "Run an experiment grid");
  b->add_option("--grid", ben.grid, "Grid JSON")->required();
  b->add_option("--out", ben.out, "Output directory");
  b->add_option("--jobs", ben.jobs, "Worker threads (default HESSAVG_JOBS or 1)");
  b->add_flag("--quiet", ben.quiet);

  DiagArgs dia;
  dia.in.kappa = 10.0;
  dia.in.upsilon = 0.1;
  dia.in.epsilon = 0.5;
  dia.in.delta = 0.01;
  dia.in.d = 100;
  dia.in.radius_nu = 0.5;
  auto* di = app.add_subcommand("diag", "Transition points and rates from the theory");
  di->add_option("--kappa", dia.in.kappa, "lambda_max / lambda_min of the Hessian");
  di->add_option("--lambda-min", dia.in.lambda_min);
  di->add_option("--upsilon", dia.in.upsilon, "Noise level Upsilon_E / lambda_min");
  di->add_option("--epsilon", dia.in.epsilon);
  di->add_option("--delta", dia.in.delta);
  di->add_option("--d", dia.in.d);
  di->add_option("--radius-nu", dia.in.radius_nu);
  di->add_option("--beta", dia.in.beta);
  di->add_option("--rho", dia.in.rho);
  di->add_option("--lipschitz", dia.in.lipschitz_L);
  di->add_option("--f0-gap", dia.in.f0_gap);
  di->add_option("--psi", dia.psi, "Default: computed from the weights");
  di->add_option("--weights", dia.weights, "unifavg, weightavg or power:<p>");
  di->add_option("--out", dia.out, "Report JSON");
  di->add_option("--curves-out", dia.curves_out, "rho_t / theta_t CSV");

  RatesArgs rat;
  auto* r = app.add_subcommand("rates", "Error ratios e_{t+1}/e_t from a trace");
  r->add_option("--trace", rat.trace)->required();
  r->add_option("--out", rat.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_solve(sol);
    if (*b) return cmd_bench(ben);
    if (*di) return cmd_diag(dia);
    if (*r) return cmd_rates(rat);
  } catch (const io::IoError& e) {
    std::fprintf(stderr, "hessavg: %s\n", e.what());
    return kIo;
  } catch (const TheoryPreconditionError& e) {
    std::fprintf(stderr, "hessavg: theory precondition: %s\n", e.what());
    return kTheory;
  } catch (const CapabilityError& e) {
    std::fprintf(stderr, "hessavg: %s\n", e.what());
    return kCapability;
  } catch (const ContractViolation& e) {
    std::fprintf(stderr, "hessavg: %s\n", e.what());
    return kUsage;
  } catch (const UnsupportedOperation& e) {
    std::fprintf(stderr, "hessavg: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hessavg: %s\n", e.what());
    return kIo;
  }
  return kUsage;
}
