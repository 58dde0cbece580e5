// Command line front end: plan, run, check and batch.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include "ltlmas/buchi.hpp"
#include "ltlmas/report.hpp"
#include "ltlmas/scenario.hpp"

namespace fs = std::filesystem;
using namespace ltlmas;

namespace {

struct Overrides {
  std::optional<double> h;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<double> broadcast_delay;
};

Scenario load(const std::string& path, const Overrides& o) {
  Scenario s = load_scenario(path, o.seed);
  for (const auto& w : s.warnings) spdlog::warn("{}: {}", path, w);
  if (o.h) {
    if (!(*o.h > 0)) throw ScenarioError("--h", "must be positive");
    s.h = *o.h;
  }
  if (o.t_end) {
    if (*o.t_end < 0) throw ScenarioError("--t-end", "must be nonnegative");
    s.t_end = *o.t_end;
  }
  if (o.broadcast_delay) {
    if (*o.broadcast_delay < 0) throw ScenarioError("--broadcast-delay", "must be nonnegative");
    s.broadcast_delay = *o.broadcast_delay;
  }
  return s;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--h", o.h, "integration step size");
  cmd->add_option("--t-end", o.t_end, "simulated horizon in seconds");
  cmd->add_option("--seed", o.seed, "seed for unpinned model parameters");
  cmd->add_option("--broadcast-delay", o.broadcast_delay, "counter broadcast delay in seconds");
}

int run_one(const std::string& scenario, const fs::path& out, const Overrides& o) {
  Scenario s = load(scenario, o);
  spdlog::info("{}: {} agents, h = {}, t_end = {}", scenario, s.agents.size(), s.h, s.t_end);
  RunResult r = cmd_run(s, out);
  if (r.exit_code == kInfeasible) {
    spdlog::error("{}: {}", scenario, r.message);
    return r.exit_code;
  }
  for (const auto& e : r.log.events)
    if (e.kind == EventKind::GoalReached)
      spdlog::debug("t = {:.3f}: {} reached {}", e.t, s.agents[e.agent].name, s.points[e.point].id);
  if (r.exit_code == kInvariantViolated) {
    spdlog::error("{}: run stopped: {}", scenario, r.message);
    return r.exit_code;
  }
  const auto& g = r.verdict.global;
  spdlog::info("{}: collision_free={} connectivity={} lyapunov_monotone={} bounded={} min_beta_col={:.4g} "
               "min_beta_con={:.4g}",
               scenario, g.collision_free, g.connectivity_maintained, g.lyapunov_monotone, g.bounded, g.min_beta_col,
               g.min_beta_con);
  spdlog::info("{}: artifacts in {}", scenario, out.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  spdlog::cfg::load_env_levels();

  CLI::App app{"Multi-agent LTL planning and adaptive barrier control"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help message and exit");

  Overrides ov;
  std::string scenario;
  std::string out_dir;
  bool automata = false;

  auto* plan = app.add_subcommand("plan", "synthesize and print every agent's plan");
  plan->add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  plan->add_option("--out", out_dir, "also write plans.tsv into this directory");
  plan->add_option("--seed", ov.seed, "seed for unpinned model parameters");
  plan->add_flag("--automata", automata, "print each formula's Buchi automaton");

  auto* run = app.add_subcommand("run", "plan, simulate and write all artifacts");
  run->add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  add_overrides(run, ov);

  auto* check = app.add_subcommand("check", "recompute the verdict from exported artifacts");
  check->add_option("--out", out_dir, "directory written by run")->required()->check(CLI::ExistingDirectory);

  std::vector<std::string> scenarios;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* batch = app.add_subcommand("batch", "run several scenarios, each into <out>/<scenario stem>");
  batch->add_option("--scenario", scenarios, "scenario files")->required()->check(CLI::ExistingFile);
  batch->add_option("--out", out_dir, "output root directory")->required();
  batch->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  add_overrides(batch, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share the generic error code; --help exits cleanly
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*plan) {
      Scenario s = load(scenario, ov);
      std::optional<fs::path> dir;
      if (!out_dir.empty()) dir = out_dir;
      int code = cmd_plan(s, std::cout, dir);
      if (automata) {
        auto fs_ = formulas(s);
        for (std::size_t i = 0; i < fs_.size(); ++i)
          std::cout << "# " << s.agents[i].name << ": " << to_string(fs_[i]) << '\n' << to_text(ltl_to_buchi(fs_[i]));
      }
      return code;
    }
    if (*run) return run_one(scenario, out_dir, ov);
    if (*check) {
      CheckResult r = cmd_check(out_dir);
      std::cout << r.recomputed;
      if (r.exit_code == kMismatch) spdlog::error("recomputed verdict differs from {}/verdict.tsv", out_dir);
      else spdlog::info("verdict reproduced");
      return r.exit_code;
    }
    if (*batch) {
      std::atomic<std::size_t> next{0};
      std::mutex mu;
      int worst = kOk;
      auto worker = [&] {
        for (std::size_t k; (k = next++) < scenarios.size();) {
          int code;
          try {
            code = run_one(scenarios[k], fs::path(out_dir) / fs::path(scenarios[k]).stem(), ov);
          } catch (const std::exception& e) {
            spdlog::error("{}: {}", scenarios[k], e.what());
            code = kError;
          }
          std::lock_guard lock(mu);
          worst = std::max(worst, code);
        }
      };
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < std::min<std::size_t>(jobs, scenarios.size()); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      return worst;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kError;
  }
  return kOk;
}
