// eecr: energy-efficient power adaptation for sensing-based spectrum sharing.
//
//   eecr solve          [--config f] [--out f] [--trace f] [--<key> <value>]...
//   eecr sweep          ... (needs sweep_param and sweep_values)
//   eecr validate-bound ...
//
// Exit codes: 0 success, 2 usage or configuration error, 3 a solve did not
// converge, 1 any other failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eecr/error.hpp"
#include "eecr/experiments.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

// Remaining `--key value` / `--key=value` tokens become config overrides.
void apply_overrides(eecr::experiments::ExperimentConfig& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) {
      throw eecr::InvalidConfig("unexpected argument '" + tok + "'");
    }
    std::string body = tok.substr(2);
    if (const auto eq = body.find('='); eq != std::string::npos) {
      cfg.set(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw eecr::InvalidConfig("missing value for '" + tok + "'");
    cfg.set(body, extras[++i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient power adaptation for cognitive radio under imperfect sensing"};
  app.require_subcommand(1);

  std::string config_path, out_path, trace_path;
  std::uint64_t seed = 0;
  std::size_t samples = 0, workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--out", out_path, "output CSV (default: stdout)");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--samples", samples, "number of fading samples");
    sub->add_option("--workers", workers, "parallel sweep workers");
    sub->allow_extras();
  };
  auto* solve_cmd = app.add_subcommand("solve", "single EE-optimal power adaptation");
  add_common(solve_cmd);
  solve_cmd->add_option("--trace", trace_path, "Dinkelbach trace CSV (default: <out>.trace.csv)");
  auto* sweep_cmd = app.add_subcommand("sweep", "one solve per value of sweep_param");
  add_common(sweep_cmd);
  auto* bound_cmd = app.add_subcommand("validate-bound", "rate lower bound vs. Monte Carlo exact rate");
  add_common(bound_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  eecr::experiments::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    apply_overrides(cfg, sub->remaining());
    if (sub->count("--seed")) cfg.fading.seed = seed;
    if (sub->count("--samples")) cfg.set("n_samples", std::to_string(samples));
    if (sub->count("--workers")) cfg.workers = workers;
    cfg.constraints();
  } catch (const eecr::InvalidConfig& e) {
    std::cerr << "eecr: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) {
      std::cerr << "eecr: cannot open '" << out_path << "' for writing\n";
      return kExitUsage;
    }
    out = &file_out;
  }

  try {
    if (sub == solve_cmd) {
      cfg.kind = eecr::experiments::Kind::kSolve;
      if (trace_path.empty() && !out_path.empty()) trace_path = out_path + ".trace.csv";
      std::unique_ptr<std::ofstream> trace;
      if (!trace_path.empty()) {
        trace = std::make_unique<std::ofstream>(trace_path);
        if (!*trace) {
          std::cerr << "eecr: cannot open '" << trace_path << "' for writing\n";
          return kExitUsage;
        }
      }
      const auto row = eecr::experiments::run_solve(cfg, *out, trace.get());
      if (!row.result.converged) {
        std::cerr << "eecr: solve did not converge within the iteration caps\n";
        return kExitNotConverged;
      }
    } else if (sub == sweep_cmd) {
      cfg.kind = eecr::experiments::Kind::kSweep;
      const auto res = eecr::experiments::run_sweep(cfg, *out);
      if (!res.all_converged) {
        std::cerr << "eecr: at least one sweep point did not converge\n";
        return kExitNotConverged;
      }
    } else {
      cfg.kind = eecr::experiments::Kind::kValidateBound;
      eecr::experiments::run_validate_bound(cfg, *out);
    }
  } catch (const eecr::InvalidConfig& e) {
    std::cerr << "eecr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "eecr: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
