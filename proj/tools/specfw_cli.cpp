#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specfw/bench.hpp"
#include "specfw/error.hpp"

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Flags {
  std::vector<std::string> algos{"alg1"};
  specfw::RunSpec spec;
  bool no_noise = false;
  double beta = 0.0;
  std::string out;
  std::string fault = "none";
};

specfw::Algo algo_or_throw(const std::string& name) {
  const auto a = specfw::parse_algo(name);
  if (!a) throw specfw::Error(specfw::ErrorCode::InvalidConfig, "unknown algorithm '" + name + "'");
  return *a;
}

specfw::RunSpec spec_for(const Flags& f, const std::string& algo, const char* default_out) {
  specfw::RunSpec s = f.spec;
  s.algo = algo_or_throw(algo);
  s.noise = !f.no_noise;
  if (f.beta > 0.0) s.beta = f.beta;
  s.out = f.out.empty() ? default_out : f.out;
  return s;
}

specfw::RunSpec single_spec(const Flags& f, const char* default_out) {
  if (f.algos.size() != 1)
    throw specfw::Error(specfw::ErrorCode::InvalidConfig, "this command takes exactly one --algo");
  return spec_for(f, f.algos.front(), default_out);
}

int cmd_gen(const Flags& f) {
  const specfw::RunSpec s = single_spec(f, "instance.bin");
  s.validate();
  for (int k = 0; k < s.repeats; ++k) {
    const auto path = s.repeats == 1 ? s.out : specfw::repeat_path(s.out, k);
    specfw::write_problem(specfw::make_instance(s, k), path);
    std::printf("wrote %s (n=%lld, m=%lld, rank=%lld)\n", path.string().c_str(),
                static_cast<long long>(s.n), static_cast<long long>(s.m()),
                static_cast<long long>(s.r_star));
  }
  return 0;
}

int cmd_solve(const Flags& f) {
  const specfw::RunSpec s = single_spec(f, "trace.csv");
  const specfw::SolveOutput out = specfw::run_solve(s);
  for (std::size_t k = 0; k < out.repeats.size(); ++k) {
    const auto& r = out.repeats[k];
    const specfw::CsvRow last = r.rows.empty() ? specfw::CsvRow{} : r.rows.back();
    std::printf("repeat %zu: iters=%zu f=%.12g error=%.3e gap=%.3e rank=%g | ref f=%.12g gap=%.3e%s\n",
                k, r.rows.size(), last.f_value, last.error_vs_ref, last.dual_gap, last.rank,
                r.ref.f, r.ref.gap, r.ref.budget_exceeded ? " (budget exceeded)" : "");
  }
  std::printf("wrote %s and %d per-repeat files\n", s.out.string().c_str(), s.repeats);
  return 0;
}

int cmd_compare(const Flags& f) {
  std::vector<specfw::RunSpec> specs;
  for (const std::string& a : f.algos) specs.push_back(spec_for(f, a, "compare.csv"));
  const specfw::CompareOutput out = specfw::run_compare(specs);
  for (std::size_t a = 0; a < out.algos.size(); ++a) {
    const auto& rows = out.averaged[a];
    if (rows.empty()) continue;
    std::printf("%-12s iters=%zu mean log10 error=%.2f rank-one updates=%g\n",
                std::string(specfw::to_string(out.algos[a])).c_str(), rows.size(),
                rows.back().log10_error, rows.back().rank1_updates_cum);
  }
  specfw::write_compare_csv(out, specs.front().out);
  std::printf("wrote %s\n", specs.front().out.string().c_str());
  return 0;
}

int cmd_verify(const Flags& f) {
  const specfw::RunSpec s = single_spec(f, "");
  const auto fault = specfw::parse_fault(f.fault);
  if (!fault) throw specfw::Error(specfw::ErrorCode::InvalidConfig, "unknown fault '" + f.fault + "'");
  const specfw::VerifyReport rep = specfw::run_verify(s, *fault);
  std::printf("envelope: max (f_t - f*)(t - rank(X_1) + 4)/(8 beta) = %.6g with beta = %.6g%s\n",
              rep.envelope_ratio, rep.envelope_beta,
              rep.envelope_fallback ? " (working beta failed the smoothness check)" : "");
  for (const auto& v : rep.violations)
    std::printf("VIOLATION %s repeat=%d iter=%d: %s\n", v.invariant.c_str(), v.repeat, v.iter,
                v.detail.c_str());
  if (!rep.ok()) return kExitViolation;
  std::printf("all invariants hold\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrahedron Frank-Wolfe experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

  Flags f;
  specfw::RunSpec& s = f.spec;
  app.add_option("--algo", f.algos, "alg1, fw, blockfw, alg1-away, alg1-nodrop, alg1-det")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--n", s.n, "Dimension")->capture_default_str();
  app.add_option("--rank", s.r_star, "Ground-truth rank r*")->capture_default_str();
  app.add_option("--m-factor", s.m_factor, "m = m-factor * n * r*")->capture_default_str();
  app.add_option("--tau", s.tau, "Objective scaling")->capture_default_str();
  app.add_flag("--no-noise", f.no_noise, "Noise-free observations");
  app.add_option("--seed", s.seed, "Solver seed")->capture_default_str();
  app.add_option("--instance-seed", s.instance_seed, "Instance family seed")->capture_default_str();
  app.add_option("--repeats", s.repeats, "Independent runs to average")->capture_default_str();
  app.add_option("--max-iters", s.max_iters, "Iteration budget")->capture_default_str();
  app.add_option("--gap-tol", s.gap_tol, "Stop once the dual gap is at most this")
      ->capture_default_str();
  app.add_option("--beta", f.beta, "Smoothness constant (default n^2/2)");
  app.add_option("--block-r", s.block_r, "Block-FW rank (default r*)");
  app.add_option("--block-eta", s.block_eta, "Block-FW step size")->capture_default_str();
  app.add_option("--out", f.out, "Output path");

  auto* gen = app.add_subcommand("gen", "Write serialized instances");
  auto* solve = app.add_subcommand("solve", "Run one algorithm and write CSV traces");
  auto* compare = app.add_subcommand("compare", "Run several algorithms on shared instances");
  auto* verify = app.add_subcommand("verify", "Check the solver invariants on every iterate");
  verify->add_option("--inject-fault", f.fault, "none, trace, psd or monotone (checker self-test)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(f);
    if (solve->parsed()) return cmd_solve(f);
    if (compare->parsed()) return cmd_compare(f);
    if (verify->parsed()) return cmd_verify(f);
  } catch (const specfw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == specfw::ErrorCode::IoError) return kExitIo;
    if (e.code() == specfw::ErrorCode::InvalidConfig || e.code() == specfw::ErrorCode::InvalidShape ||
        e.code() == specfw::ErrorCode::MismatchedInstances) {
      std::cerr << app.help();
      return kExitUsage;
    }
    return kExitViolation;
  }
  return kExitUsage;
}
