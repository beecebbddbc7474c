// Command-line surface: generate instances, run the solvers, cross-verify
// the operator/preconditioner algebra, and sweep per-iteration costs.
//
// Exit codes: 0 success, 1 internal error, 2 usage error, 3 non-convergence.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "rkcp/diagnostics.hpp"
#include "rkcp/io.hpp"
#include "rkcp/problemgen.hpp"
#include "rkcp/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

std::vector<rkcp::Index> parse_index_list(const std::string& csv, const std::string& flag) {
  std::vector<rkcp::Index> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw rkcp::ValidationError("bad value '" + tok + "' in " + flag);
    }
  }
  if (out.empty()) throw rkcp::ValidationError(flag + " needs at least one value");
  return out;
}

std::string manifest_echo(const rkcp::GenSpec& spec) {
  std::string dims;
  for (std::size_t a = 0; a < spec.dims.size(); ++a) {
    dims += (a ? "," : "") + std::to_string(spec.dims[a]);
  }
  std::ostringstream out;
  out << "shape=" << dims << " mode=" << spec.mode << " rank=" << spec.rank
      << " lambda=" << rkcp::format_g17(spec.lambda) << " q=" << spec.q
      << " seed=" << spec.seed << " kernel=" << rkcp::kernel_family_name(spec.kernel.family)
      << " lengthscale=" << rkcp::format_g17(spec.kernel.lengthscale)
      << " jitter=" << rkcp::format_g17(spec.kernel.jitter)
      << " noise_sigma=" << rkcp::format_g17(spec.noise_sigma);
  return out.str();
}

void write_solve_record(std::ostream& out, const std::string& cmdline,
                        const rkcp::GenSpec& spec, const std::string& solver,
                        const rkcp::ProblemInstance& p, const rkcp::SolveReport& rep,
                        int exit_code) {
  out << "# cmd: " << cmdline << "\n";
  out << "# manifest: " << manifest_echo(spec) << "\n";
  out << "solver,n,r,q,lambda,iterations,converged,final_residual,setup_flops,"
         "iter_flops_total,setup_s,solve_s\n";
  out << solver << "," << p.n() << "," << p.r() << "," << p.q() << ","
      << rkcp::format_g17(p.lambda) << "," << rep.iterations << ","
      << (rep.converged ? 1 : 0) << ","
      << rkcp::format_g17(rep.residual_history.empty() ? 0.0 : rep.residual_history.back())
      << "," << rep.flops.setup() << "," << rep.flops.iteration_total() << ","
      << rkcp::format_g17(rep.seconds.setup) << "," << rkcp::format_g17(rep.seconds.solve)
      << "\n";
  out << "# exit: " << exit_code << "\n";
}

int apply_thread_cap() {
  const char* raw = std::getenv("SOLVER_THREADS");
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (raw != nullptr) {
    try {
      std::size_t used = 0;
      threads = std::stoi(raw, &used);
      if (used != std::string(raw).size() || threads < 1) {
        throw std::invalid_argument(raw);
      }
    } catch (const std::exception&) {
      std::cerr << "SOLVER_THREADS must be a positive integer, got '" << raw << "'\n";
      return -1;
    }
  }
  Eigen::setNbThreads(threads);
  return threads;
}

struct GenFlags {
  std::string dims;
  int mode = 0;
  rkcp::Index rank = 3;
  rkcp::Index q = -1;  // default: min(10 n r, N)
  std::string kernel = "rbf";
  double lengthscale = 0.3;
  double jitter = 1e-10;
  double lambda = 0.1;
  double noise = 0.0;
  std::uint64_t seed = 42;
  std::string out;
};

rkcp::GenSpec to_gen_spec(const GenFlags& flags) {
  rkcp::GenSpec spec;
  spec.dims = parse_index_list(flags.dims, "--dims");
  spec.mode = flags.mode;
  spec.rank = flags.rank;
  spec.kernel.family = rkcp::kernel_family_from_name(flags.kernel);
  spec.kernel.lengthscale = flags.lengthscale;
  spec.kernel.jitter = flags.jitter;
  spec.lambda = flags.lambda;
  spec.noise_sigma = flags.noise;
  spec.seed = flags.seed;
  const rkcp::Shape shape(spec.dims, spec.mode);
  spec.q = flags.q >= 0
               ? flags.q
               : std::min(shape.total_size(), 10 * shape.mode_size() * spec.rank);
  if (spec.q > shape.total_size()) {
    throw rkcp::ValidationError("q=" + std::to_string(spec.q) + " exceeds N=" +
                                std::to_string(shape.total_size()));
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  if (apply_thread_cap() < 0) return kExitUsage;

  CLI::App app{"Matrix-free PCG solvers for the kernel-constrained mode-k subproblem of "
               "CP tensor decomposition with missing entries"};
  app.require_subcommand(1);

  GenFlags gen_flags;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic instance directory");
  gen->add_option("--dims", gen_flags.dims, "Tensor extents, e.g. 8,6,5")->required();
  gen->add_option("--mode", gen_flags.mode, "Kernel-constrained mode k (0-based)");
  gen->add_option("--rank", gen_flags.rank, "CP rank r");
  gen->add_option("--q", gen_flags.q, "Observed entries (default min(10 n r, N))");
  gen->add_option("--kernel", gen_flags.kernel, "Kernel family: rbf, linear, identity");
  gen->add_option("--lengthscale", gen_flags.lengthscale, "RBF lengthscale");
  gen->add_option("--jitter", gen_flags.jitter, "Diagonal jitter");
  gen->add_option("--lambda", gen_flags.lambda, "Regularization weight");
  gen->add_option("--noise", gen_flags.noise, "Observation noise sigma");
  gen->add_option("--seed", gen_flags.seed, "Generator seed");
  gen->add_option("--out", gen_flags.out, "Output directory")->required();

  struct {
    std::string in;
    std::string solver;
    std::string mvp;
    std::string precond;
    double tol = 1e-10;
    int max_iters = 0;
    int refresh = 50;
    std::string report;
  } solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "Run one solver on an instance directory");
  solve->add_option("--in", solve_flags.in, "Instance directory (from gen)")->required();
  solve->add_option("--solver", solve_flags.solver,
                    "dense, jacobi-onfly, block-preagg or inverse-free")
      ->required();
  solve->add_option("--mvp", solve_flags.mvp,
                    "Expert override: dense, onfly or preagg (with --precond)");
  solve->add_option("--precond", solve_flags.precond,
                    "Expert override: identity, jacobi or block (with --mvp)");
  solve->add_option("--tol", solve_flags.tol, "Relative residual tolerance");
  solve->add_option("--max-iters", solve_flags.max_iters, "Iteration cap (0: 10 n r)");
  solve->add_option("--refresh", solve_flags.refresh, "Inverse-free refresh interval");
  solve->add_option("--report", solve_flags.report, "Report CSV path (default stdout)");

  struct {
    std::uint64_t seed = 42;
    std::string dims = "8,6,5";
    int mode = 0;
    rkcp::Index rank = 3;
    rkcp::Index q = 60;
    double lambda = 0.1;
    double perturb = 0.0;
    bool quick = false;
  } verify_flags;
  CLI::App* verify = app.add_subcommand(
      "verify", "Cross-validate operators, preconditioners and solvers");
  verify->add_option("--seed", verify_flags.seed, "Instance seed");
  verify->add_option("--dims", verify_flags.dims, "Agreement-check tensor extents");
  verify->add_option("--mode", verify_flags.mode, "Mode k");
  verify->add_option("--rank", verify_flags.rank, "CP rank");
  verify->add_option("--q", verify_flags.q, "Observed entries");
  verify->add_option("--lambda", verify_flags.lambda, "Regularization weight");
  verify->add_option("--perturb", verify_flags.perturb,
                     "Negative control: disturb the slice Grams by this amount");
  verify->add_flag("--quick", verify_flags.quick, "Only the 1x1 closed-form instance");

  struct {
    std::string sweep;
    std::string values;
    std::string configs = "jacobi-onfly,block-preagg,inverse-free";
    int iters = 10;
    std::string dims = "32,10,8";
    int mode = 0;
    rkcp::Index rank = 3;
    rkcp::Index q = 500;
    double lambda = 0.1;
    std::uint64_t seed = 42;
    std::string out;
  } bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "Fixed-iteration cost sweep, CSV output");
  bench->add_option("--sweep", bench_flags.sweep, "Swept variable: q, n or r")->required();
  bench->add_option("--values", bench_flags.values, "Swept values, e.g. 500,1000,2000")
      ->required();
  bench->add_option("--configs", bench_flags.configs, "Comma-separated solver configs");
  bench->add_option("--iters", bench_flags.iters, "Forced iterations per point");
  bench->add_option("--dims", bench_flags.dims, "Base tensor extents");
  bench->add_option("--mode", bench_flags.mode, "Mode k");
  bench->add_option("--rank", bench_flags.rank, "Base CP rank");
  bench->add_option("--q", bench_flags.q, "Base observed entries");
  bench->add_option("--lambda", bench_flags.lambda, "Regularization weight");
  bench->add_option("--seed", bench_flags.seed, "Generator seed");
  bench->add_option("--out", bench_flags.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string cmdline;
  for (int i = 0; i < argc; ++i) {
    cmdline += (i ? " " : "") + std::string(argv[i]);
  }

  try {
    if (gen->parsed()) {
      const rkcp::GenSpec spec = to_gen_spec(gen_flags);
      const rkcp::GeneratedInstance instance = rkcp::generate(spec);
      std::filesystem::create_directories(gen_flags.out);
      rkcp::write_instance(instance.instance, instance.ground_truth, spec, gen_flags.out);
      std::cout << "wrote instance to " << gen_flags.out << " (" << manifest_echo(spec)
                << ")\n";
      return kExitOk;
    }

    if (solve->parsed()) {
      const rkcp::LoadedInstance loaded = rkcp::read_instance(solve_flags.in);
      rkcp::SolveConfig cfg;
      cfg.tol = solve_flags.tol;
      cfg.max_iters = solve_flags.max_iters;
      cfg.refresh_interval = solve_flags.refresh;

      rkcp::SolveReport rep;
      std::string solver_name;
      if (!solve_flags.mvp.empty() || !solve_flags.precond.empty()) {
        if (solve_flags.mvp.empty() || solve_flags.precond.empty()) {
          throw rkcp::ValidationError("--mvp and --precond must be given together");
        }
        rkcp::MvpKind mvp_kind;
        if (solve_flags.mvp == "dense") mvp_kind = rkcp::MvpKind::Dense;
        else if (solve_flags.mvp == "onfly") mvp_kind = rkcp::MvpKind::OnFly;
        else if (solve_flags.mvp == "preagg") mvp_kind = rkcp::MvpKind::PreAggregated;
        else throw rkcp::ValidationError("unknown --mvp '" + solve_flags.mvp +
                                         "' (expected dense, onfly or preagg)");
        rkcp::PrecondKind precond_kind;
        if (solve_flags.precond == "identity") precond_kind = rkcp::PrecondKind::Identity;
        else if (solve_flags.precond == "jacobi") precond_kind = rkcp::PrecondKind::Jacobi;
        else if (solve_flags.precond == "block") precond_kind = rkcp::PrecondKind::BlockJacobi;
        else throw rkcp::ValidationError("unknown --precond '" + solve_flags.precond +
                                         "' (expected identity, jacobi or block)");
        rep = rkcp::pcg_standard(loaded.instance, mvp_kind, precond_kind, cfg);
        solver_name = solve_flags.mvp + "+" + solve_flags.precond;
      } else {
        const rkcp::SolverKind kind = rkcp::solver_kind_from_name(solve_flags.solver);
        rep = rkcp::run_solver(loaded.instance, kind, cfg);
        solver_name = solve_flags.solver;
      }

      const int code = rep.converged ? kExitOk : kExitNotConverged;
      if (solve_flags.report.empty()) {
        write_solve_record(std::cout, cmdline, loaded.spec, solver_name, loaded.instance,
                           rep, code);
      } else {
        std::ofstream out(solve_flags.report);
        if (!out) throw rkcp::IoError("cannot open '" + solve_flags.report + "' for writing");
        write_solve_record(out, cmdline, loaded.spec, solver_name, loaded.instance, rep,
                           code);
      }
      if (!rep.converged) {
        std::cerr << "did not converge: residual "
                  << rkcp::format_g17(rep.residual_history.back()) << " after "
                  << rep.iterations << " iterations\n";
      }
      return code;
    }

    if (verify->parsed()) {
      std::vector<rkcp::CheckResult> results;
      if (verify_flags.quick) {
        results = rkcp::run_quick_check();
      } else {
        rkcp::VerifyOptions options;
        options.seed = verify_flags.seed;
        options.dims = parse_index_list(verify_flags.dims, "--dims");
        options.mode = verify_flags.mode;
        options.rank = verify_flags.rank;
        options.q = verify_flags.q;
        options.lambda = verify_flags.lambda;
        options.perturb = verify_flags.perturb;
        results = rkcp::run_verification(options);
      }
      bool all_pass = true;
      for (const rkcp::CheckResult& check : results) {
        all_pass = all_pass && check.pass;
        std::cout << (check.pass ? "PASS" : "FAIL") << " " << check.name
                  << "  max_error=" << rkcp::format_g17(check.max_error)
                  << " threshold=" << rkcp::format_g17(check.threshold) << "\n";
      }
      std::cout << (all_pass ? "all checks passed" : "CHECKS FAILED") << "\n";
      return all_pass ? kExitOk : kExitInternal;
    }

    if (bench->parsed()) {
      GenFlags base;
      base.dims = bench_flags.dims;
      base.mode = bench_flags.mode;
      base.rank = bench_flags.rank;
      base.q = bench_flags.q;
      base.lambda = bench_flags.lambda;
      base.seed = bench_flags.seed;
      const rkcp::GenSpec spec = to_gen_spec(base);

      if (bench_flags.sweep.size() != 1) {
        throw rkcp::ValidationError("--sweep must be one of q, n, r");
      }
      std::vector<rkcp::SolverKind> configs;
      {
        std::stringstream ss(bench_flags.configs);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          configs.push_back(rkcp::solver_kind_from_name(tok));
        }
      }
      const rkcp::ScalingReport report =
          rkcp::sweep(spec, bench_flags.sweep[0],
                      parse_index_list(bench_flags.values, "--values"), configs,
                      bench_flags.iters);
      if (bench_flags.out.empty()) {
        rkcp::write_scaling_csv(std::cout, report);
      } else {
        std::ofstream out(bench_flags.out);
        if (!out) throw rkcp::IoError("cannot open '" + bench_flags.out + "' for writing");
        rkcp::write_scaling_csv(out, report);
      }
      return kExitOk;
    }
  } catch (const rkcp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rkcp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
