#include "ltlmas/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <Eigen/Cholesky>
#include <json.hpp>

#include "ltlmas/graph.hpp"

namespace ltlmas {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ScenarioError(path.empty() ? key : path + "." + key, "missing field");
  return obj.at(key);
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path, "expected an object");
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ScenarioError(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  double v = number(j, path);
  if (!(v > 0)) throw ScenarioError(path, "must be positive");
  return v;
}

double nonnegative(const json& j, const std::string& path) {
  double v = number(j, path);
  if (v < 0) throw ScenarioError(path, "must be nonnegative");
  return v;
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> vector(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw ScenarioError(path, fmt::format("expected {} numbers", n));
  std::vector<double> v;
  for (std::size_t k = 0; k < n; ++k) v.push_back(number(j[k], fmt::format("{}[{}]", path, k)));
  return v;
}

double optional_number(const json& obj, const std::string& path, const char* key, double fallback,
                       double (*conv)(const json&, const std::string&)) {
  return obj.contains(key) ? conv(obj.at(key), join(path, key)) : fallback;
}

struct Defaults {
  double radius = 1.0;
  double sensing_radius = 4.0;
  double goal = 3.0;
  double damping = 25.0;
  double adaptation = 0.1;
  std::vector<double> gravity;
  std::string bound = "norm";
};

void read_gains(const json& j, const std::string& path, double& goal, double& damping, double& adaptation) {
  object(j, path);
  check_keys(j, path, {"goal", "damping", "adaptation"});
  goal = optional_number(j, path, "goal", goal, positive);
  damping = optional_number(j, path, "damping", damping, positive);
  adaptation = optional_number(j, path, "adaptation", adaptation, positive);
}

std::string bound_name(const json& j, const std::string& path) {
  std::string b = text(j, path);
  if (b != "norm" && b != "unit") throw ScenarioError(path, "expected \"norm\" or \"unit\"");
  return b;
}

double draw_open_unit_plus_one(std::mt19937_64& gen) {
  // 53 random mantissa bits; 0 is excluded by resampling.
  for (;;) {
    double u = static_cast<double>(gen() >> 11) * 0x1p-53;
    if (u > 0) return 1.0 + u;
  }
}

std::vector<std::vector<double>> read_inertia(const json& j, const std::string& path, std::size_t n) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  if (j.is_number()) {
    double b = positive(j, path);
    for (std::size_t k = 0; k < n; ++k) m[k][k] = b;
    return m;
  }
  if (!j.is_array() || j.size() != n) throw ScenarioError(path, fmt::format("expected a number or {} rows", n));
  for (std::size_t r = 0; r < n; ++r) m[r] = vector(j[r], fmt::format("{}[{}]", path, r), n);
  Eigen::MatrixXd b(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c];
  if (!b.isApprox(b.transpose()) || b.llt().info() != Eigen::Success)
    throw ScenarioError(path, "inertia must be symmetric positive definite");
  return m;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) b(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return b;
}

void check_geometry(const Scenario& s) {
  const std::size_t n = s.agents.size();
  std::vector<Vec> x;
  std::vector<double> r, d;
  for (const auto& a : s.agents) {
    x.push_back(to_vec(a.position));
    r.push_back(a.radius);
    d.push_back(a.sensing_radius);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d[i] <= r[i] + r[j])
        throw ScenarioError(fmt::format("agents[{}].sensing_radius", i),
                            fmt::format("must exceed the radii of {} and {}", s.agents[i].name, s.agents[j].name));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto args = barrier_args(x[i], x[j], r[i], r[j], std::min(d[i], d[j]));
      if (!(args.iota > 0))
        throw ScenarioError("agents", fmt::format("agents {} and {} overlap initially", s.agents[i].name,
                                                  s.agents[j].name));
    }
  EdgeSet e0 = sense_edges(x, d);
  if (n > 1 && !is_connected(e0, n)) throw ScenarioError("agents", "initial sensing graph is not connected");
  for (const auto& e : e0) {
    auto args = barrier_args(x[e.tail], x[e.head], r[e.tail], r[e.head], std::min(d[e.tail], d[e.head]));
    if (!(args.eta > 0))
      throw ScenarioError("agents", fmt::format("agents {} and {} start exactly at sensing range",
                                                s.agents[e.tail].name, s.agents[e.head].name));
  }
}

}  // namespace

Scenario parse_scenario(const std::string& source, std::optional<std::uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what());
  }
  object(root, "");
  check_keys(root, "", {"dimension", "seed", "integrator", "broadcast_delay", "interaction", "defaults", "points",
                        "agents"});
  Scenario s;
  const json& dim = require(root, "", "dimension");
  if (!dim.is_number_integer() || dim.get<long long>() < 1) throw ScenarioError("dimension", "expected a positive integer");
  s.dimension = dim.get<std::size_t>();
  const std::size_t n = s.dimension;

  if (root.contains("seed")) {
    const json& sj = root.at("seed");
    if (!sj.is_number_unsigned() && !(sj.is_number_integer() && sj.get<long long>() >= 0))
      throw ScenarioError("seed", "expected a nonnegative integer");
    s.seed = sj.get<std::uint64_t>();
  }
  if (seed_override) s.seed = *seed_override;

  if (root.contains("integrator")) {
    const json& ij = object(root.at("integrator"), "integrator");
    check_keys(ij, "integrator", {"h", "t_end", "log_interval"});
    s.h = optional_number(ij, "integrator", "h", s.h, positive);
    s.t_end = optional_number(ij, "integrator", "t_end", s.t_end, nonnegative);
    s.log_interval = optional_number(ij, "integrator", "log_interval", s.log_interval, positive);
  }
  s.broadcast_delay = optional_number(root, "", "broadcast_delay", 0.0, nonnegative);

  if (root.contains("interaction")) {
    const json& ij = object(root.at("interaction"), "interaction");
    check_keys(ij, "interaction", {"mu_col", "mu_con", "beta_col", "beta_con"});
    s.mu_col = optional_number(ij, "interaction", "mu_col", s.mu_col, positive);
    s.mu_con = optional_number(ij, "interaction", "mu_con", s.mu_con, positive);
    s.beta_col = optional_number(ij, "interaction", "beta_col", s.beta_col, positive);
    s.beta_con = optional_number(ij, "interaction", "beta_con", s.beta_con, positive);
  }

  Defaults def;
  def.gravity.assign(n, 0.0);
  if (root.contains("defaults")) {
    const json& dj = object(root.at("defaults"), "defaults");
    check_keys(dj, "defaults", {"radius", "sensing_radius", "gains", "gravity", "bound"});
    def.radius = optional_number(dj, "defaults", "radius", def.radius, positive);
    def.sensing_radius = optional_number(dj, "defaults", "sensing_radius", def.sensing_radius, positive);
    if (dj.contains("gains")) read_gains(dj.at("gains"), "defaults.gains", def.goal, def.damping, def.adaptation);
    if (dj.contains("gravity")) def.gravity = vector(dj.at("gravity"), "defaults.gravity", n);
    if (dj.contains("bound")) def.bound = bound_name(dj.at("bound"), "defaults.bound");
  }

  const json& pj = require(root, "", "points");
  if (!pj.is_array() || pj.empty()) throw ScenarioError("points", "expected a nonempty array");
  std::set<std::string> point_ids;
  for (std::size_t k = 0; k < pj.size(); ++k) {
    const std::string path = fmt::format("points[{}]", k);
    const json& p = object(pj[k], path);
    check_keys(p, path, {"id", "position"});
    ScenarioPoint pt{text(require(p, path, "id"), path + ".id"), vector(require(p, path, "position"), path + ".position", n)};
    if (!point_ids.insert(pt.id).second) throw ScenarioError(path + ".id", "duplicate point id " + pt.id);
    s.points.push_back(std::move(pt));
  }

  const json& aj = require(root, "", "agents");
  if (!aj.is_array() || aj.empty()) throw ScenarioError("agents", "expected a nonempty array");
  std::mt19937_64 gen(s.seed);
  std::set<std::string> names;
  for (std::size_t i = 0; i < aj.size(); ++i) {
    const std::string path = fmt::format("agents[{}]", i);
    const json& a = object(aj[i], path);
    check_keys(a, path, {"name", "priority", "position", "velocity", "a_hat", "radius", "sensing_radius", "gains",
                         "gravity", "bound", "inertia", "uncertainty", "services", "formula"});
    ScenarioAgent ag;
    // Every agent consumes four draws so pinning one agent's values does not
    // shift the others.
    double b = draw_open_unit_plus_one(gen);
    double w1 = draw_open_unit_plus_one(gen);
    double w2 = draw_open_unit_plus_one(gen);
    double amp = draw_open_unit_plus_one(gen);

    ag.name = a.contains("name") ? text(a.at("name"), path + ".name") : fmt::format("agent{}", i + 1);
    if (!names.insert(ag.name).second) throw ScenarioError(path + ".name", "duplicate agent name " + ag.name);
    if (a.contains("priority")) {
      const json& pr = a.at("priority");
      if (!pr.is_number_integer()) throw ScenarioError(path + ".priority", "expected an integer");
      ag.priority = pr.get<int>();
    } else {
      ag.priority = static_cast<int>(i) + 1;
    }
    ag.position = vector(require(a, path, "position"), path + ".position", n);
    ag.velocity = a.contains("velocity") ? vector(a.at("velocity"), path + ".velocity", n) : std::vector<double>(n, 0.0);
    ag.a_hat = optional_number(a, path, "a_hat", 0.0, number);
    ag.radius = optional_number(a, path, "radius", def.radius, positive);
    ag.sensing_radius = optional_number(a, path, "sensing_radius", def.sensing_radius, positive);
    ag.goal_gain = def.goal;
    ag.damping_gain = def.damping;
    ag.adaptation_gain = def.adaptation;
    if (a.contains("gains")) read_gains(a.at("gains"), path + ".gains", ag.goal_gain, ag.damping_gain, ag.adaptation_gain);
    ag.gravity = a.contains("gravity") ? vector(a.at("gravity"), path + ".gravity", n) : def.gravity;
    ag.bound = a.contains("bound") ? bound_name(a.at("bound"), path + ".bound") : def.bound;
    if (a.contains("inertia")) {
      ag.inertia = read_inertia(a.at("inertia"), path + ".inertia", n);
    } else {
      ag.inertia.assign(n, std::vector<double>(n, 0.0));
      for (std::size_t k = 0; k < n; ++k) ag.inertia[k][k] = b;
    }
    ag.amplitude = amp;
    ag.omega1 = w1;
    ag.omega2 = w2;
    if (a.contains("uncertainty")) {
      const std::string up = path + ".uncertainty";
      const json& u = object(a.at("uncertainty"), up);
      check_keys(u, up, {"amplitude", "omega1", "omega2"});
      ag.amplitude = optional_number(u, up, "amplitude", amp, nonnegative);
      ag.omega1 = optional_number(u, up, "omega1", w1, number);
      ag.omega2 = optional_number(u, up, "omega2", w2, number);
    }

    if (a.contains("services")) {
      const json& sv = object(a.at("services"), path + ".services");
      for (const auto& [pid, list] : sv.items()) {
        const std::string sp = path + ".services." + pid;
        if (!point_ids.contains(pid)) throw ScenarioError(sp, "unknown point " + pid);
        if (!list.is_array()) throw ScenarioError(sp, "expected an array of service names");
        std::set<std::string> uniq;
        for (std::size_t k = 0; k < list.size(); ++k) uniq.insert(text(list[k], fmt::format("{}[{}]", sp, k)));
        ag.services[pid] = {uniq.begin(), uniq.end()};
      }
    }
    ag.formula = text(require(a, path, "formula"), path + ".formula");
    Formula f = [&] {
      try {
        return parse_ltl(ag.formula);
      } catch (const ParseError& e) {
        throw ScenarioError(path + ".formula", e.what());
      }
    }();
    std::set<std::string> offered;
    for (const auto& [_, list] : ag.services) offered.insert(list.begin(), list.end());
    for (const auto& p : atoms(f))
      if (!offered.contains(p))
        s.warnings.push_back(fmt::format("{}: atom {} is not offered at any point", ag.name, p));
    s.agents.push_back(std::move(ag));
  }

  std::vector<int> prio;
  for (const auto& a : s.agents) prio.push_back(a.priority);
  std::sort(prio.begin(), prio.end());
  for (std::size_t i = 0; i < prio.size(); ++i)
    if (prio[i] != static_cast<int>(i) + 1) throw ScenarioError("agents", "priorities must be a permutation of 1..N");

  // Services are owned by one agent each.
  std::vector<AtomicProposition> props;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    std::set<std::string> own;
    for (const auto& [_, list] : s.agents[i].services) own.insert(list.begin(), list.end());
    for (const auto& p : own) props.push_back({p, i});
  }
  try {
    check_disjoint(props);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("agents", e.what());
  }

  check_geometry(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), seed);
}

std::string serialize_scenario(const Scenario& s) {
  ojson root;
  root["dimension"] = s.dimension;
  root["seed"] = s.seed;
  root["integrator"] = {{"h", s.h}, {"t_end", s.t_end}, {"log_interval", s.log_interval}};
  root["broadcast_delay"] = s.broadcast_delay;
  root["interaction"] = {{"mu_col", s.mu_col}, {"mu_con", s.mu_con}, {"beta_col", s.beta_col}, {"beta_con", s.beta_con}};
  root["points"] = ojson::array();
  for (const auto& p : s.points) root["points"].push_back({{"id", p.id}, {"position", p.position}});
  root["agents"] = ojson::array();
  for (const auto& a : s.agents) {
    ojson aj;
    aj["name"] = a.name;
    aj["priority"] = a.priority;
    aj["position"] = a.position;
    aj["velocity"] = a.velocity;
    aj["a_hat"] = a.a_hat;
    aj["radius"] = a.radius;
    aj["sensing_radius"] = a.sensing_radius;
    aj["gains"] = {{"goal", a.goal_gain}, {"damping", a.damping_gain}, {"adaptation", a.adaptation_gain}};
    aj["gravity"] = a.gravity;
    aj["bound"] = a.bound;
    aj["inertia"] = a.inertia;
    aj["uncertainty"] = {{"amplitude", a.amplitude}, {"omega1", a.omega1}, {"omega2", a.omega2}};
    ojson sv = ojson::object();
    for (const auto& [pid, list] : a.services) sv[pid] = list;
    aj["services"] = sv;
    aj["formula"] = a.formula;
    root["agents"].push_back(aj);
  }
  return root.dump(2) + "\n";
}

std::vector<Formula> formulas(const Scenario& s) {
  std::vector<Formula> out;
  for (const auto& a : s.agents) out.push_back(parse_ltl(a.formula));
  return out;
}

TransitionSystem transition_system(const Scenario& s, std::size_t agent) {
  const ScenarioAgent& a = s.agents.at(agent);
  std::vector<PointOfInterest> pts;
  std::optional<std::size_t> initial_at;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const auto& p = s.points[k];
    PointOfInterest poi{p.id, {}};
    if (auto it = a.services.find(p.id); it != a.services.end()) poi.services.insert(it->second.begin(), it->second.end());
    pts.push_back(std::move(poi));
    if (!initial_at && (to_vec(a.position) - to_vec(p.position)).norm() < a.radius) initial_at = k;
  }
  return build_transition_system(std::move(pts), initial_at);
}

std::vector<AgentPlan> synthesize_plans(const Scenario& s) {
  std::vector<AgentPlan> out;
  auto fs = formulas(s);
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    TransitionSystem ts = transition_system(s, i);
    auto plan = synthesize_plan(ts, fs[i]);
    out.push_back({std::move(ts), fs[i], std::move(plan)});
  }
  return out;
}

EpisodeSetup episode_setup(const Scenario& s, const std::vector<PrefixSuffixPlan>& plans) {
  if (plans.size() != s.agents.size()) throw std::invalid_argument("one plan per agent is required");
  EpisodeSetup e;
  for (const auto& p : s.points) e.points.push_back(to_vec(p.position));
  for (const auto& a : s.agents) {
    AgentModel m;
    m.params.radius = a.radius;
    m.params.sensing_radius = a.sensing_radius;
    m.params.gains = {a.goal_gain, a.damping_gain, a.adaptation_gain};
    m.params.bound = a.bound == "unit" ? BoundFunction::Unit : BoundFunction::PositionNorm;
    m.inertia = to_matrix(a.inertia);
    m.params.gravity = m.inertia * to_vec(a.gravity);
    m.uncertainty = {a.amplitude, a.omega1, a.omega2};
    m.priority = a.priority;
    e.agents.push_back(std::move(m));
    e.x0.push_back(to_vec(a.position));
    e.v0.push_back(to_vec(a.velocity));
    e.a_hat0.push_back(a.a_hat);
  }
  e.plans = plans;
  e.interaction = {s.mu_col, s.mu_con, s.beta_col, s.beta_con};
  return e;
}

RunOptions run_options(const Scenario& s) { return {s.t_end, s.h, s.log_interval, s.broadcast_delay}; }

}  // namespace ltlmas
