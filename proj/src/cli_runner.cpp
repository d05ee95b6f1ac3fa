#include "fpg/cli_runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fpg/constants.hpp"
#include "fpg/envs.hpp"
#include "fpg/train.hpp"

namespace fpg::cli {

namespace {

using nlohmann::json;

std::string git_describe() {
  FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r");
  if (pipe == nullptr) return "unknown";
  char buf[256];
  std::string out;
  while (fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) {
    out.pop_back();
  }
  return out.empty() ? "unknown" : out;
}

double get_or(const json& cfg, const std::string& key, double fallback) {
  return cfg.contains(key) ? cfg.at(key).get<double>() : fallback;
}

std::vector<double> number_list(const json& cfg, const std::string& key,
                                double fallback) {
  if (!cfg.contains(key)) return {fallback};
  if (cfg.at(key).is_array()) return cfg.at(key).get<std::vector<double>>();
  return {cfg.at(key).get<double>()};
}

std::vector<std::string> string_list(const json& cfg, const std::string& key,
                                     const std::string& fallback) {
  if (!cfg.contains(key)) return {fallback};
  if (cfg.at(key).is_array()) {
    return cfg.at(key).get<std::vector<std::string>>();
  }
  return {cfg.at(key).get<std::string>()};
}

struct ProblemSpec {
  std::string env_tag;
  double gamma;
  std::string gen_tag;
  double lambda;
  double floor;  // <= 0 means "1 / n_actions"
};

RegularizedProblem build_problem(const ProblemSpec& ps) {
  TabularMdp mdp = parse_env(ps.env_tag, ps.gamma);
  const double floor = ps.floor > 0.0 ? ps.floor : 1.0 / mdp.n_actions;
  RegularizedProblem prob{std::move(mdp),
                          GeneratorSpec::from_tag(ps.gen_tag, floor),
                          ps.lambda,
                          Policy::uniform(0, 0)};
  prob.pi_ref = Policy::uniform(prob.mdp.n_states, prob.mdp.n_actions);
  prob.validate();
  return prob;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string cell_id(const std::string& gen, double lambda, double eta) {
  std::string g = gen;
  std::replace(g.begin(), g.end(), ':', '-');
  return g + "_lam" + format_number(lambda) + "_eta" + format_number(eta);
}

json constants_to_json(const TheoryConstants& tc) {
  const auto num = [](double v) {
    return std::isnan(v) ? json() : json(v);
  };
  json j;
  j["omega"] = tc.omega;
  j["kappa"] = tc.kappa;
  j["iota"] = tc.iota;
  j["zeta"] = tc.zeta;
  j["d_f"] = tc.d_f;
  j["y_f"] = tc.y_f;
  j["L_f"] = tc.L_f;
  j["sigma_sq"] = tc.sigma_sq;
  j["beta"] = tc.beta;
  j["mu_bar"] = num(tc.mu_bar);
  j["tau_star"] = num(tc.tau_star);
  j["eta_default"] = tc.eta_default;
  j["H_default"] = tc.H_default;
  return j;
}

std::uint64_t base_seed(const json& cfg) {
  // The one supported environment variable: RNG seed override.
  if (const char* env = std::getenv("FPG_SEED"); env != nullptr) {
    return std::strtoull(env, nullptr, 10);
  }
  return cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 0;
}

}  // namespace

const std::vector<std::string> kLandscapeKeys = {
    "experiment", "env",  "gamma",    "generator", "lambda",
    "pi_ref_floor", "out", "grid_min", "grid_max",  "grid_step"};
const std::vector<std::string> kTrainKeys = {
    "experiment", "env",  "gamma", "generator", "lambda", "pi_ref_floor",
    "out",        "eta",  "seeds", "mode",      "B",      "H",
    "T",          "log_every", "tau", "jobs",   "project", "seed"};
const std::vector<std::string> kConstantsKeys = {
    "env", "gamma", "generator", "lambda", "pi_ref_floor", "H", "eps"};
const std::vector<std::string> kEnvKeys = {"env", "gamma"};

nlohmann::json load_config(const std::string& config_path_or_inline,
                           const std::vector<std::string>& overrides,
                           const std::vector<std::string>& allowed_keys) {
  json cfg = json::object();
  if (!config_path_or_inline.empty()) {
    if (config_path_or_inline.front() == '{') {
      cfg = json::parse(config_path_or_inline);
    } else {
      std::ifstream in(config_path_or_inline);
      if (!in) {
        throw ValidationError("cannot open config file '" +
                              config_path_or_inline + "'");
      }
      in >> cfg;
    }
  }
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("override '" + kv + "' is not key=value");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // plain string
    }
    cfg[key] = parsed;
  }
  std::vector<std::string> unknown;
  for (const auto& [key, _] : cfg.items()) {
    if (std::find(allowed_keys.begin(), allowed_keys.end(), key) ==
        allowed_keys.end()) {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
  return cfg;
}

std::string config_hash(const nlohmann::json& cfg) {
  const std::string dump = cfg.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

int run_landscape(const nlohmann::json& cfg, std::ostream& log) {
  ProblemSpec ps{cfg.value("env", std::string("bandit:0,1")),
                 get_or(cfg, "gamma", 0.0),
                 cfg.value("generator", std::string("kl")),
                 get_or(cfg, "lambda", 1.0), get_or(cfg, "pi_ref_floor", 0.0)};
  RegularizedProblem prob = build_problem(ps);
  if (prob.mdp.n_states != 1 || prob.mdp.n_actions != 2) {
    throw ValidationError(
        "landscape requires a one-state, two-action bandit environment");
  }
  const double lo = get_or(cfg, "grid_min", -10.0);
  const double hi = get_or(cfg, "grid_max", 10.0);
  const double step = get_or(cfg, "grid_step", 0.25);
  if (!(step > 0.0) || !(hi > lo)) {
    throw ValidationError("landscape: invalid grid bounds");
  }
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;

  std::vector<double> reg_value(static_cast<size_t>(n) * n);
  std::vector<double> grad_norm(static_cast<size_t>(n) * n);
  parallel_for(n * n, [&](int idx) {
    const int i = idx / n, j = idx % n;
    Logits theta(1, 2);
    theta << lo + i * step, lo + j * step;
    const LogitsEval ev = policy_from_logits(prob, theta, Exec::Serial);
    const StateCache cache = make_cache(prob, ev.pi);
    const ExactGradient eg = exact_gradient_detail(prob, cache, theta);
    reg_value[idx] = eg.v.dot(prob.mdp.rho);
    grad_norm[idx] = eg.grad.norm();
  });

  const std::string out_dir = cfg.value("out", std::string("out"));
  const std::string name = cfg.value("experiment", std::string("landscape"));
  const std::filesystem::path dir = std::filesystem::path(out_dir) / name;
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "landscape.csv");
    csv.precision(17);
    csv << "theta1,theta2,reg_value,grad_norm\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        csv << lo + i * step << ',' << lo + j * step << ','
            << reg_value[static_cast<size_t>(i) * n + j] << ','
            << grad_norm[static_cast<size_t>(i) * n + j] << '\n';
      }
    }
  }
  {
    json meta;
    meta["config"] = cfg;
    meta["config_hash"] = config_hash(cfg);
    meta["git_describe"] = git_describe();
    meta["rows"] = n * n;
    std::ofstream ms(dir / "meta.json");
    ms << meta.dump(2) << '\n';
  }
  log << "landscape: wrote " << n * n << " rows to "
      << (dir / "landscape.csv").string() << '\n';
  return 0;
}

int run_train(const nlohmann::json& cfg, std::ostream& log) {
  const std::string env_tag = cfg.value("env", std::string("nchain:10"));
  const double gamma = get_or(cfg, "gamma", 0.99);
  const double floor = get_or(cfg, "pi_ref_floor", 0.0);
  const std::vector<std::string> gens = string_list(cfg, "generator", "kl");
  const std::vector<double> lambdas = number_list(cfg, "lambda", 0.1);
  const std::vector<double> etas = number_list(cfg, "eta", 1e-3);

  std::vector<std::uint64_t> seeds;
  if (cfg.contains("seeds") && cfg.at("seeds").is_array()) {
    for (const auto& s : cfg.at("seeds")) {
      seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    const int count =
        cfg.contains("seeds") ? cfg.at("seeds").get<int>() : 1;
    for (int i = 0; i < count; ++i) seeds.push_back(i);
  }
  const std::uint64_t seed0 = base_seed(cfg);

  TrainConfig base;
  base.mode = cfg.value("mode", std::string("stochastic")) == "exact"
                  ? TrainMode::Exact
                  : TrainMode::Stochastic;
  if (seeds.empty()) throw ValidationError("train: empty seed list");
  if (base.mode == TrainMode::Exact) {
    seeds.resize(1);  // exact runs are deterministic: one run per cell
  }
  base.B = static_cast<int>(get_or(cfg, "B", 16));
  base.H = static_cast<int>(get_or(cfg, "H", 200));
  base.T = static_cast<long long>(get_or(cfg, "T", 2000));
  base.log_every = static_cast<long long>(get_or(cfg, "log_every", 10));
  base.project = cfg.value("project", true);
  if (cfg.contains("tau") && !cfg.at("tau").is_string()) {
    base.tau = cfg.at("tau").get<double>();
  }

  struct Cell {
    std::string gen;
    double lambda, eta;
  };
  std::vector<Cell> cells;
  for (const auto& g : gens) {
    for (double lam : lambdas) {
      for (double eta : etas) cells.push_back({g, lam, eta});
    }
  }

  const std::string out_dir = cfg.value("out", std::string("out"));
  const std::string name = cfg.value("experiment", std::string("train"));
  const std::filesystem::path root = std::filesystem::path(out_dir) / name;
  std::filesystem::create_directories(root);

  struct Run {
    int cell;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (size_t c = 0; c < cells.size(); ++c) {
    for (const std::uint64_t s : seeds) {
      runs.push_back({static_cast<int>(c), s});
    }
  }

  // Per-cell problem setup plus meta.json, written before the runs.
  std::vector<RegularizedProblem> problems;
  problems.reserve(cells.size());
  for (const Cell& cell : cells) {
    ProblemSpec ps{env_tag, gamma, cell.gen, cell.lambda, floor};
    problems.push_back(build_problem(ps));
    const std::filesystem::path dir =
        root / cell_id(cell.gen, cell.lambda, cell.eta);
    std::filesystem::create_directories(dir);
    json meta;
    meta["config"] = cfg;
    meta["cell"] = {{"generator", cell.gen},
                    {"lambda", cell.lambda},
                    {"eta", cell.eta}};
    meta["constants"] = constants_to_json(
        compute_constants(problems.back(), base.H));
    meta["seeds"] = seeds;
    meta["config_hash"] = config_hash(cfg);
    meta["git_describe"] = git_describe();
    std::ofstream ms(dir / "meta.json");
    ms << meta.dump(2) << '\n';
  }

  const int jobs = std::max(1, static_cast<int>(get_or(
                                    cfg, "jobs", hardware_threads())));
  std::vector<double> final_return(runs.size());
  std::exception_ptr error = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
#endif
  for (size_t i = 0; i < runs.size(); ++i) {
    try {
      const Run& run = runs[i];
      const Cell& cell = cells[run.cell];
      const RegularizedProblem& prob = problems[run.cell];
      TrainConfig tc = base;
      tc.eta = cell.eta;
      tc.seed = mix64(seed0 ^ mix64(run.seed));
      const Logits theta0 =
          Logits::Zero(prob.mdp.n_states, prob.mdp.n_actions);
      const TrainResult res = train(prob, tc, theta0);
      final_return[i] = res.record.rows.back().value;
      const std::filesystem::path dir =
          root / cell_id(cell.gen, cell.lambda, cell.eta);
      std::ofstream csv(dir / (std::to_string(run.seed) + ".csv"));
      res.record.write_csv(csv);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(fpg_run_train_error)
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  json cells_json = json::array();
  for (size_t c = 0; c < cells.size(); ++c) {
    double mean = 0.0;
    int count = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].cell == static_cast<int>(c)) {
        mean += final_return[i];
        ++count;
      }
    }
    mean /= count;
    double var = 0.0;
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].cell == static_cast<int>(c)) {
        var += (final_return[i] - mean) * (final_return[i] - mean);
      }
    }
    const double se =
        count > 1 ? std::sqrt(var / (count - 1) / count) : 0.0;
    cells_json.push_back(
        {{"id", cell_id(cells[c].gen, cells[c].lambda, cells[c].eta)},
         {"generator", cells[c].gen},
         {"lambda", cells[c].lambda},
         {"eta", cells[c].eta},
         {"mean_final_return", mean},
         {"stderr_final_return", se}});
  }
  json summary;
  summary["experiment"] = name;
  summary["config_hash"] = config_hash(cfg);
  summary["cells"] = cells_json;
  std::ofstream ss(root / "summary.json");
  ss << summary.dump(2) << '\n';

  log << "train: " << runs.size() << " runs over " << cells.size()
      << " cells -> " << root.string() << '\n';
  return 0;
}

int run_constants(const nlohmann::json& cfg, std::ostream& out) {
  ProblemSpec ps{cfg.value("env", std::string("bandit:0,1")),
                 get_or(cfg, "gamma", 0.9),
                 cfg.value("generator", std::string("kl")),
                 get_or(cfg, "lambda", 1.0), get_or(cfg, "pi_ref_floor", 0.0)};
  RegularizedProblem prob = build_problem(ps);
  const int H = static_cast<int>(get_or(cfg, "H", 200));
  const double eps = get_or(cfg, "eps", 1e-2);
  const TheoryConstants tc = compute_constants(prob, H, eps);
  json j = constants_to_json(tc);
  j["generator"] = prob.gen.tag();
  j["lambda"] = prob.lambda;
  j["gamma"] = prob.mdp.gamma;
  j["pi_ref_floor"] = prob.gen.pi_ref_floor();
  if (!std::isnan(tc.mu_bar)) {
    const Schedule sch =
        recommend_schedule(prob, tc, eps, static_cast<int>(get_or(cfg, "B", 16)));
    j["recommended"] = {{"eta", sch.eta}, {"H", sch.H}, {"T", sch.T},
                        {"eps", eps}};
  }
  out << j.dump(2) << '\n';
  return 0;
}

int run_env(const nlohmann::json& cfg, std::ostream& out) {
  const TabularMdp mdp = parse_env(cfg.value("env", std::string("bandit:0,1")),
                                   get_or(cfg, "gamma", 0.99));
  out << mdp_to_json(mdp) << '\n';
  return 0;
}

}  // namespace fpg::cli
