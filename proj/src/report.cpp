#include "ltlmas/report.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace ltlmas {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? sep : "") + parts[k];
  return out;
}

std::string services_field(const Letter& l) { return l.empty() ? "-" : join({l.begin(), l.end()}, ","); }

Letter parse_services(const std::string& f) {
  if (f == "-") return {};
  auto parts = split(f, ',');
  return {parts.begin(), parts.end()};
}

/// Rows of a tab-separated table, header checked and dropped.
class Table {
 public:
  Table(const fs::path& path, const std::vector<std::string>& header) : name_(path.filename().string()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    load(in, header);
  }
  Table(std::istream& in, const std::string& name, const std::vector<std::string>& header) : name_(name) {
    load(in, header);
  }

  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  void load(std::istream& in, const std::vector<std::string>& header) {
    std::string line;
    if (!std::getline(in, line) || split(line, '\t') != header) throw std::runtime_error(name_ + ": unexpected header");
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      auto f = split(line, '\t');
      if (f.size() != header.size()) throw std::runtime_error(fmt::format("{}:{}: expected {} fields", name_, row, header.size()));
      rows_.push_back(std::move(f));
    }
  }

  std::string name_;
  std::vector<std::vector<std::string>> rows_;
};

void write_row(std::ostream& out, const std::vector<std::string>& fields) { out << join(fields, "\t") << '\n'; }

std::vector<std::string> trajectory_header(std::size_t agents, std::size_t dim) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 1; i <= agents; ++i) {
    for (std::size_t d = 1; d <= dim; ++d) h.push_back(fmt::format("x{}_{}", i, d));
    for (std::size_t d = 1; d <= dim; ++d) h.push_back(fmt::format("v{}_{}", i, d));
    h.push_back(fmt::format("ahat{}", i));
    h.push_back(fmt::format("mode{}", i));
    h.push_back(fmt::format("step{}", i));
    h.push_back(fmt::format("kappa{}", i));
  }
  return h;
}

std::vector<std::string> monitor_header(std::size_t agents, std::size_t col, std::size_t con) {
  std::vector<std::string> h{"t"};
  for (std::size_t m = 1; m <= col; ++m) h.push_back(fmt::format("beta_col{}", m));
  for (std::size_t m = 1; m <= con; ++m) h.push_back(fmt::format("beta_con{}", m));
  for (std::size_t i = 1; i <= agents; ++i) h.push_back(fmt::format("goal_err{}", i));
  h.push_back("V");
  return h;
}

const std::vector<std::string> kPlanHeader{"agent", "part", "index", "point", "services"};
const std::vector<std::string> kEdgeHeader{"set", "index", "tail", "head"};
const std::vector<std::string> kEventHeader{"t", "kind", "agent", "point", "services", "kappa", "detail"};
const std::vector<std::string> kLyapunovHeader{"t", "segment", "V"};

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

EventKind parse_event_kind(const std::string& s) {
  for (auto k : {EventKind::GoalReached, EventKind::ServicesProvided, EventKind::CounterUpdate,
                 EventKind::InvariantViolation})
    if (s == to_string(k)) return k;
  throw std::runtime_error("unknown event kind '" + s + "'");
}

template <class Write>
void write_file(const fs::path& path, Write&& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  w(out);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::string verdict_text(const Verdict& v, const Scenario& s) {
  std::ostringstream os;
  write_verdict(os, v, s);
  return os.str();
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

double parse_double(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

void write_plans(std::ostream& out, const Scenario& s, const std::vector<AgentPlan>& plans) {
  write_row(out, kPlanHeader);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!plans[i].plan) continue;
    const auto& p = *plans[i].plan;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const PlanStep& st = p.at(k);
      write_row(out, {s.agents[i].name, k < p.prefix.size() ? "prefix" : "suffix", std::to_string(k + 1),
                      s.points[st.point].id, services_field(st.services)});
    }
  }
}

std::vector<PrefixSuffixPlan> read_plans(std::istream& in, const Scenario& s) {
  std::map<std::string, std::size_t> agent, point;
  for (std::size_t i = 0; i < s.agents.size(); ++i) agent[s.agents[i].name] = i;
  for (std::size_t k = 0; k < s.points.size(); ++k) point[s.points[k].id] = k;
  std::vector<PrefixSuffixPlan> plans(s.agents.size());
  Table table(in, "plans.tsv", kPlanHeader);
  for (const auto& r : table.rows()) {
    auto a = agent.find(r[0]);
    auto p = point.find(r[3]);
    if (a == agent.end() || p == point.end()) throw std::runtime_error("plans.tsv: unknown agent or point");
    PlanStep st{p->second, parse_services(r[4])};
    if (r[1] == "prefix") plans[a->second].prefix.push_back(st);
    else if (r[1] == "suffix") plans[a->second].suffix.push_back(st);
    else throw std::runtime_error("plans.tsv: unknown part " + r[1]);
  }
  for (const auto& p : plans)
    if (p.suffix.empty()) throw std::runtime_error("plans.tsv: agent without a suffix");
  return plans;
}

void write_edges(std::ostream& out, const TrajectoryLog& log) {
  write_row(out, kEdgeHeader);
  for (std::size_t m = 0; m < log.initial_edges.size(); ++m)
    write_row(out, {"initial", std::to_string(m + 1), std::to_string(log.initial_edges[m].tail + 1),
                    std::to_string(log.initial_edges[m].head + 1)});
  for (std::size_t m = 0; m < log.all_edges.size(); ++m)
    write_row(out, {"complete", std::to_string(m + 1), std::to_string(log.all_edges[m].tail + 1),
                    std::to_string(log.all_edges[m].head + 1)});
}

void write_trajectory(std::ostream& out, const TrajectoryLog& log) {
  write_row(out, trajectory_header(log.agents, log.dimension));
  for (const auto& s : log.samples) {
    std::vector<std::string> row{format_double(s.t)};
    for (std::size_t i = 0; i < log.agents; ++i) {
      for (Eigen::Index d = 0; d < s.x[i].size(); ++d) row.push_back(format_double(s.x[i][d]));
      for (Eigen::Index d = 0; d < s.v[i].size(); ++d) row.push_back(format_double(s.v[i][d]));
      row.push_back(format_double(s.a_hat[i]));
      row.push_back(std::to_string(s.mode[i]));
      row.push_back(std::to_string(s.s[i]));
      row.push_back(std::to_string(s.kappa[i]));
    }
    write_row(out, row);
  }
}

void write_events(std::ostream& out, const TrajectoryLog& log, const Scenario& s) {
  write_row(out, kEventHeader);
  for (const auto& e : log.events) {
    write_row(out, {format_double(e.t), to_string(e.kind), e.agent == SimEvent::kNone ? "-" : s.agents[e.agent].name,
                    e.point == SimEvent::kNone ? "-" : s.points[e.point].id, services_field(e.services),
                    std::to_string(e.kappa), e.detail.empty() ? "-" : e.detail});
  }
}

void write_monitor(std::ostream& out, const TrajectoryLog& log) {
  write_row(out, monitor_header(log.agents, log.all_edges.size(), log.initial_edges.size()));
  for (const auto& s : log.samples) {
    std::vector<std::string> row{format_double(s.t)};
    for (double b : s.beta_col) row.push_back(format_double(b));
    for (double b : s.beta_con) row.push_back(format_double(b));
    for (double g : s.goal_error) row.push_back(format_double(g));
    row.push_back(format_double(s.lyapunov));
    write_row(out, row);
  }
}

void write_lyapunov(std::ostream& out, const TrajectoryLog& log) {
  write_row(out, kLyapunovHeader);
  for (const auto& r : log.lyapunov) write_row(out, {format_double(r.t), std::to_string(r.segment), format_double(r.value)});
}

void write_verdict(std::ostream& out, const Verdict& v, const Scenario& s) {
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  const GuaranteeReport& g = v.global;
  write_row(out, {"key", "value"});
  write_row(out, {"completed", flag(v.completed)});
  write_row(out, {"collision_free", flag(g.collision_free)});
  write_row(out, {"connectivity_maintained", flag(g.connectivity_maintained)});
  write_row(out, {"lyapunov_monotone", flag(g.lyapunov_monotone)});
  write_row(out, {"adaptation_nondecreasing", flag(g.adaptation_nondecreasing)});
  write_row(out, {"bounded", flag(g.bounded)});
  write_row(out, {"min_beta_col", format_double(g.min_beta_col)});
  write_row(out, {"min_beta_con", format_double(g.min_beta_con)});
  write_row(out, {"min_iota", format_double(g.min_iota)});
  write_row(out, {"min_eta", format_double(g.min_eta)});
  write_row(out, {"max_a_hat", format_double(g.max_a_hat)});
  write_row(out, {"max_speed", format_double(g.max_speed)});
  write_row(out, {"lyapunov_steps", std::to_string(g.lyapunov_steps)});
  write_row(out, {"lyapunov_within_tolerance", std::to_string(g.lyapunov_within_tolerance)});
  write_row(out, {"lyapunov_max_increase", format_double(g.lyapunov_max_increase)});
  write_row(out, {"lyapunov_initial", format_double(g.lyapunov_initial)});
  for (std::size_t i = 0; i < v.agents.size(); ++i) {
    const auto& a = v.agents[i];
    const std::string& name = s.agents[i].name;
    write_row(out, {name + ".plan_followed", flag(a.plan_followed)});
    write_row(out, {name + ".services_only_when_active", flag(a.services_only_when_active)});
    write_row(out, {name + ".satisfaction", to_string(a.satisfaction)});
    write_row(out, {name + ".planned_visits", std::to_string(a.planned_visits)});
    write_row(out, {name + ".progress", format_double(a.progress)});
  }
}

TrajectoryLog read_run(const fs::path& dir, const Scenario& s) {
  TrajectoryLog log;
  log.agents = s.agents.size();
  log.dimension = s.dimension;
  log.h = s.h;
  log.completed = true;

  Table edges(dir / "edges.tsv", kEdgeHeader);
  for (const auto& r : edges.rows()) {
    Edge e{parse_size(r[2]) - 1, parse_size(r[3]) - 1};
    if (r[0] == "initial") log.initial_edges.push_back(e);
    else if (r[0] == "complete") log.all_edges.push_back(e);
    else throw std::runtime_error("edges.tsv: unknown set " + r[0]);
  }

  const auto n = static_cast<Eigen::Index>(s.dimension);
  Table traj(dir / "trajectory.tsv", trajectory_header(log.agents, s.dimension));
  Table mon(dir / "monitor.tsv", monitor_header(log.agents, log.all_edges.size(), log.initial_edges.size()));
  if (traj.rows().size() != mon.rows().size()) throw std::runtime_error("trajectory.tsv and monitor.tsv differ in length");
  for (std::size_t k = 0; k < traj.rows().size(); ++k) {
    const auto& r = traj.rows()[k];
    const auto& m = mon.rows()[k];
    Sample smp;
    smp.t = parse_double(r[0]);
    std::size_t c = 1;
    for (std::size_t i = 0; i < log.agents; ++i) {
      Vec x(n), v(n);
      for (Eigen::Index d = 0; d < n; ++d) x[d] = parse_double(r[c++]);
      for (Eigen::Index d = 0; d < n; ++d) v[d] = parse_double(r[c++]);
      smp.x.push_back(x);
      smp.v.push_back(v);
      smp.a_hat.push_back(parse_double(r[c++]));
      smp.mode.push_back(parse_int(r[c++]));
      smp.s.push_back(parse_size(r[c++]));
      smp.kappa.push_back(parse_int(r[c++]));
    }
    c = 1;
    for (std::size_t e = 0; e < log.all_edges.size(); ++e) smp.beta_col.push_back(parse_double(m[c++]));
    for (std::size_t e = 0; e < log.initial_edges.size(); ++e) smp.beta_con.push_back(parse_double(m[c++]));
    for (std::size_t i = 0; i < log.agents; ++i) smp.goal_error.push_back(parse_double(m[c++]));
    smp.lyapunov = parse_double(m[c]);
    log.samples.push_back(std::move(smp));
  }

  std::map<std::string, std::size_t> agent, point;
  for (std::size_t i = 0; i < s.agents.size(); ++i) agent[s.agents[i].name] = i;
  for (std::size_t k = 0; k < s.points.size(); ++k) point[s.points[k].id] = k;
  Table events(dir / "events.tsv", kEventHeader);
  for (const auto& r : events.rows()) {
    SimEvent e{parse_event_kind(r[1]), parse_double(r[0]), SimEvent::kNone, SimEvent::kNone, {}, 0, {}};
    if (r[2] != "-") e.agent = agent.at(r[2]);
    if (r[3] != "-") e.point = point.at(r[3]);
    e.services = parse_services(r[4]);
    e.kappa = parse_int(r[5]);
    if (r[6] != "-") e.detail = r[6];
    if (e.kind == EventKind::InvariantViolation) log.completed = false;
    log.events.push_back(std::move(e));
  }

  Table lyap(dir / "lyapunov.tsv", kLyapunovHeader);
  for (const auto& r : lyap.rows())
    log.lyapunov.push_back({parse_double(r[0]), parse_double(r[2]), parse_size(r[1])});
  return log;
}

int cmd_plan(const Scenario& s, std::ostream& out, const std::optional<fs::path>& out_dir) {
  auto plans = synthesize_plans(s);
  int code = kOk;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!plans[i].plan) {
      out << s.agents[i].name << ": infeasible (no plan satisfies " << s.agents[i].formula << ")\n";
      code = kInfeasible;
      continue;
    }
    out << s.agents[i].name << ": " << to_string(*plans[i].plan, plans[i].ts) << '\n';
  }
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_file(*out_dir / "plans.tsv", [&](std::ostream& o) { write_plans(o, s, plans); });
  }
  return code;
}

RunResult cmd_run(const Scenario& s, const fs::path& out_dir) {
  RunResult res;
  auto plans = synthesize_plans(s);
  std::vector<PrefixSuffixPlan> chosen;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!plans[i].plan) {
      res.exit_code = kInfeasible;
      res.message = s.agents[i].name + ": no plan satisfies " + s.agents[i].formula;
      return res;
    }
    chosen.push_back(*plans[i].plan);
  }
  fs::create_directories(out_dir);
  write_file(out_dir / "scenario.json", [&](std::ostream& o) { o << serialize_scenario(s); });
  write_file(out_dir / "plans.tsv", [&](std::ostream& o) { write_plans(o, s, plans); });

  EpisodeSetup setup = episode_setup(s, chosen);
  res.log = run_episode(setup, run_options(s));
  const TrajectoryLog& log = res.log;
  write_file(out_dir / "edges.tsv", [&](std::ostream& o) { write_edges(o, log); });
  write_file(out_dir / "trajectory.tsv", [&](std::ostream& o) { write_trajectory(o, log); });
  write_file(out_dir / "events.tsv", [&](std::ostream& o) { write_events(o, log, s); });
  write_file(out_dir / "monitor.tsv", [&](std::ostream& o) { write_monitor(o, log); });
  write_file(out_dir / "lyapunov.tsv", [&](std::ostream& o) { write_lyapunov(o, log); });

  auto fs_ = formulas(s);
  res.verdict = evaluate_run(log, setup, fs_);
  write_file(out_dir / "verdict.tsv", [&](std::ostream& o) { write_verdict(o, res.verdict, s); });
  if (!log.completed) {
    res.exit_code = kInvariantViolated;
    res.message = log.events.empty() ? "run aborted" : log.events.back().detail;
  }
  return res;
}

CheckResult cmd_check(const fs::path& dir) {
  CheckResult res;
  Scenario s = load_scenario(dir / "scenario.json");
  std::ifstream pin(dir / "plans.tsv");
  if (!pin) throw std::runtime_error("cannot read " + (dir / "plans.tsv").string());
  auto plans = read_plans(pin, s);
  TrajectoryLog log = read_run(dir, s);
  EpisodeSetup setup = episode_setup(s, plans);
  auto fs_ = formulas(s);
  res.verdict = evaluate_run(log, setup, fs_);
  res.recomputed = verdict_text(res.verdict, s);
  std::ifstream vin(dir / "verdict.tsv");
  std::stringstream buf;
  if (vin) buf << vin.rdbuf();
  res.recorded = buf.str();
  if (res.recomputed != res.recorded) res.exit_code = kMismatch;
  return res;
}

}  // namespace ltlmas
