#include "dvrp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dvrp/bench.hpp"
#include "dvrp/exact.hpp"
#include "dvrp/instance_io.hpp"

namespace dvrp {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw SchemaError(path, "expected an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

template <class T>
void take(const json& obj, const std::string& path, const char* key, T& dst) {
  if (!obj.contains(key)) {
    return;
  }
  const std::string where = path.empty() ? key : path + "." + key;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) {
      throw SchemaError(where, "expected a number");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
      throw SchemaError(where, "expected an integer");
    }
  }
  dst = v.get<T>();
}

void take_range(const json& obj, const std::string& path, const char* key, std::pair<double, double>& dst) {
  if (!obj.contains(key)) {
    return;
  }
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw SchemaError(path + "." + key, "expected [low, high]");
  }
  dst = {v[0].get<double>(), v[1].get<double>()};
}

void read_generator(const json& g, const std::string& path, GeneratorConfig& cfg) {
  check_keys(g, path, {"customers", "vehicles", "coord_range", "depot_range", "demand_rate", "capacity",
                       "speed", "tw_start_range", "tw_width_mean", "tw_width_std", "tw_width_min",
                       "seed"});
  take(g, path, "customers", cfg.n_customers);
  take(g, path, "vehicles", cfg.n_vehicles);
  take_range(g, path, "coord_range", cfg.coord_range);
  take_range(g, path, "depot_range", cfg.depot_range);
  take(g, path, "demand_rate", cfg.demand_rate);
  take(g, path, "capacity", cfg.capacity);
  take(g, path, "speed", cfg.speed);
  take_range(g, path, "tw_start_range", cfg.tw_start_range);
  take(g, path, "tw_width_mean", cfg.tw_width_mean);
  take(g, path, "tw_width_std", cfg.tw_width_std);
  take(g, path, "tw_width_min", cfg.tw_width_min);
  take(g, path, "seed", cfg.seed);
}

void apply_reward_flags(RewardWeights& w, const std::vector<double>& a, const std::optional<double>& gamma) {
  if (!a.empty()) {
    if (a.size() != w.a.size()) {
      throw CLI::ValidationError("--reward-weights", "expects 7 values");
    }
    std::copy(a.begin(), a.end(), w.a.begin());
  }
  if (gamma) {
    w.gamma = *gamma;
  }
}

std::string fixed2(double v) { return fmt::format("{:.2f}", v); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + path);
  }
  return f;
}

// Nearest-rank percentile of an unsorted sample.
double percentile(std::vector<double> xs, double p) {
  if (xs.empty()) {
    return 0.0;
  }
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(xs.size())));
  return xs[std::clamp<std::size_t>(rank, 1, xs.size()) - 1];
}

void write_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "episode,fulfilment,distance,loss,epsilon\n";
  for (const auto& c : curve) {
    out << fmt::format("{},{:.6f},{:.6f},{},{:.6f}\n", c.episode, c.fulfilment, c.distance,
                       std::isnan(c.loss) ? std::string("nan") : fmt::format("{:.9g}", c.loss),
                       c.epsilon);
  }
}

void metrics_line(std::ostream& out, const std::string& command, const Instance& inst,
                  const std::string& algo, const Solution& sol) {
  out << fmt::format(
      "status=ok command={} instance={} algorithm={} customers={} served={} fulfilment={:.4f} "
      "vehicles={} distance={:.2f} wall_time_sec={}\n",
      command, inst.name(), algo, inst.size(), sol.served_count(), sol.fulfilment, sol.vehicles_used,
      sol.total_distance, fixed2(sol.wall_time_sec));
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  check_keys(j, "", {"train", "generator", "reward", "ga"});
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "train", {"episodes", "batch", "buffer", "updates_per_episode", "learning_rate", "seed",
                            "training_instances", "epsilon"});
    take(t, "train", "episodes", cfg.train.n_episodes);
    take(t, "train", "batch", cfg.train.batch);
    take(t, "train", "buffer", cfg.train.buffer);
    take(t, "train", "updates_per_episode", cfg.train.updates_per_episode);
    take(t, "train", "learning_rate", cfg.train.learning_rate);
    take(t, "train", "seed", cfg.train.seed);
    take(t, "train", "training_instances", cfg.train.training_instances);
    if (t.contains("epsilon")) {
      const json& e = t.at("epsilon");
      check_keys(e, "train.epsilon", {"start", "end", "decay_episodes"});
      take(e, "train.epsilon", "start", cfg.train.epsilon.start);
      take(e, "train.epsilon", "end", cfg.train.epsilon.end);
      take(e, "train.epsilon", "decay_episodes", cfg.train.epsilon.decay_episodes);
    }
  }
  if (j.contains("generator")) {
    read_generator(j.at("generator"), "generator", cfg.train.generator);
  }
  if (j.contains("reward")) {
    const json& r = j.at("reward");
    check_keys(r, "reward", {"weights", "gamma"});
    if (r.contains("weights")) {
      const json& w = r.at("weights");
      if (!w.is_array() || w.size() != cfg.weights.a.size() ||
          !std::all_of(w.begin(), w.end(), [](const json& x) { return x.is_number(); })) {
        throw SchemaError("reward.weights", "expected 7 numbers");
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        cfg.weights.a[i] = w[i].get<double>();
      }
    }
    take(r, "reward", "gamma", cfg.weights.gamma);
  }
  if (j.contains("ga")) {
    const json& g = j.at("ga");
    check_keys(g, "ga", {"population", "vehicle_weight", "mutation_prob", "stall_generations",
                         "max_generations", "seed"});
    take(g, "ga", "population", cfg.ga.population);
    take(g, "ga", "vehicle_weight", cfg.ga.vehicle_weight);
    take(g, "ga", "mutation_prob", cfg.ga.mutation_prob);
    take(g, "ga", "stall_generations", cfg.ga.stall_generations);
    take(g, "ga", "max_generations", cfg.ga.max_generations);
    take(g, "ga", "seed", cfg.ga.seed);
  }
  cfg.train.weights = cfg.weights;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, fmt::format("{}: {}", path, e.what()));
  }
  return run_config_from_json(j);
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic vehicle routing with time windows: RL dispatcher, GA baseline, exact oracle"};
  app.name("dvrp");
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<double> reward_a;
  std::optional<double> gamma;
  std::string instance_path;
  std::optional<std::size_t> first_n;
  std::string algorithm = "rl";
  std::string weights_path;
  std::string out_path;
  double dynamicity = 0.0;
  std::uint64_t reveal_seed = 0;

  auto add_reward = [&](CLI::App* c) {
    c->add_option("--reward-weights", reward_a, "Seven reward weights a1..a7")->delimiter(',');
    c->add_option("--gamma", gamma, "Terminal bonus discount");
  };
  auto add_instance = [&](CLI::App* c) {
    c->add_option("--instance", instance_path, "Solomon text or native JSON instance")->required();
    c->add_option("--first-n", first_n, "Keep only the first N customers");
  };

  auto* train_cmd = app.add_subcommand("train", "Train the value network");
  std::string curve_path;
  std::string resume_path;
  train_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
  train_cmd->add_option("--seed", seed, "Master seed");
  train_cmd->add_option("--out", out_path, "Output weights file")->required();
  train_cmd->add_option("--curve", curve_path, "Training curve CSV");
  train_cmd->add_option("--resume", resume_path, "Continue from these weights");
  train_cmd->add_option("--episodes", "Override the episode count");
  add_reward(train_cmd);

  auto add_solver = [&](CLI::App* c) {
    add_instance(c);
    c->add_option("--algorithm", algorithm, "rl or ga")->check(CLI::IsMember({"rl", "ga"}));
    c->add_option("--weights", weights_path, "Value network weights (rl)");
    c->add_option("--seed", seed, "GA seed");
    c->add_option("--config", config_path, "Run configuration (JSON)");
    c->add_option("--out", out_path, "Output solution file");
    add_reward(c);
  };
  auto* solve_cmd = app.add_subcommand("solve", "Solve a static instance");
  add_solver(solve_cmd);

  auto* dyn_cmd = app.add_subcommand("dynamic", "Solve with customers revealed over time");
  std::string row_path;
  std::string timing_path;
  add_solver(dyn_cmd);
  dyn_cmd->add_option("--dynamicity", dynamicity, "Fraction of hidden customers")->check(CLI::Range(0.0, 1.0));
  dyn_cmd->add_option("--reveal-seed", reveal_seed, "Seed for reveal times");
  dyn_cmd->add_option("--row-out", row_path, "CSV with one dynamic result row");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark a directory of instances");
  std::string dir;
  std::string pattern = ".*";
  std::vector<std::string> algorithms{"rl", "ga"};
  int repetitions = 1;
  std::string rows_path;
  std::string report_path;
  std::string reference_path;
  std::string ratio_path;
  bench_cmd->add_option("--dir", dir, "Instance directory")->required();
  bench_cmd->add_option("--pattern", pattern, "Regular expression on file names");
  bench_cmd->add_option("--algorithms", algorithms, "Comma-separated list of rl, ga")->delimiter(',');
  bench_cmd->add_option("--repetitions", repetitions)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--first-n", first_n, "Keep only the first N customers");
  bench_cmd->add_option("--weights", weights_path, "Value network weights (rl)");
  bench_cmd->add_option("--seed", seed, "GA seed");
  bench_cmd->add_option("--config", config_path, "Run configuration (JSON)");
  bench_cmd->add_option("--dynamicity", dynamicity)->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--reveal-seed", reveal_seed);
  bench_cmd->add_option("--rows", rows_path, "Per-instance CSV");
  bench_cmd->add_option("--report", report_path, "Grouped report CSV");
  bench_cmd->add_option("--timing", timing_path, "Grouped report CSV including wall times");
  bench_cmd->add_option("--reference", reference_path, "Best-known table CSV");
  bench_cmd->add_option("--ratios", ratio_path, "Relative distance / vehicles CSV");
  add_reward(bench_cmd);

  auto* validate_cmd = app.add_subcommand("validate", "Check a solution against an instance");
  std::string solution_path;
  add_instance(validate_cmd);
  validate_cmd->add_option("--solution", solution_path, "Solution file")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimum of a tiny instance");
  std::size_t max_customers = 8;
  add_instance(oracle_cmd);
  oracle_cmd->add_option("--max-customers", max_customers);
  oracle_cmd->add_option("--out", out_path, "Output solution file");

  auto* milp_cmd = app.add_subcommand("export-milp", "Write the routing model in LP format");
  add_instance(milp_cmd);
  milp_cmd->add_option("--out", out_path, "LP file")->required();

  auto* gen_cmd = app.add_subcommand("generate", "Generate random instances");
  int count = 1;
  std::optional<int> customers;
  std::optional<int> vehicles;
  std::string out_dir;
  gen_cmd->add_option("--config", config_path, "Run configuration (JSON); uses its generator block");
  gen_cmd->add_option("--seed", seed, "Seed of the first instance");
  gen_cmd->add_option("--count", count)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--customers", customers)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--vehicles", vehicles)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dynamicity", dynamicity)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    apply_reward_flags(cfg.weights, reward_a, gamma);
    cfg.train.weights = cfg.weights;
    if (seed) {
      cfg.train.seed = *seed;
      cfg.ga.seed = *seed;
    }

    if (train_cmd->parsed()) {
      if (auto* o = train_cmd->get_option("--episodes"); o->count() > 0) {
        cfg.train.n_episodes = o->as<int>();
      }
      std::optional<Network> initial;
      if (!resume_path.empty()) {
        initial = load_weights(resume_path);
        cfg.train.start_episode = initial->episodes();
      }
      const auto result = train(cfg.train, std::move(initial));
      save_weights(out_path, result.net);
      if (!curve_path.empty()) {
        auto f = open_out(curve_path);
        write_curve(f, result.curve);
      }
      const std::size_t tail = std::min<std::size_t>(50, result.curve.size());
      double f_tail = 0.0;
      for (std::size_t i = result.curve.size() - tail; i < result.curve.size(); ++i) {
        f_tail += result.curve[i].fulfilment;
      }
      out << fmt::format("status=ok command=train episodes={} first_episode={} final50_fulfilment={:.4f}\n",
                         result.curve.size(), cfg.train.start_episode,
                         tail > 0 ? f_tail / static_cast<double>(tail) : 0.0);
      return kExitOk;
    }

    if (solve_cmd->parsed() || dyn_cmd->parsed()) {
      const bool dynamic_mode = dyn_cmd->parsed();
      Instance inst = load_instance(instance_path, first_n);
      if (dynamic_mode && dynamicity > 0.0) {
        inst = apply_dynamicity(inst, {dynamicity, reveal_seed});
      }
      const bool dynamic = dynamic_mode && inst.has_dynamic_customers();
      Solution sol;
      std::vector<double> latency;
      int replans = 0;
      if (algorithm == "rl") {
        if (weights_path.empty()) {
          throw CLI::RequiredError("--weights is required for the rl algorithm");
        }
        const Network net = load_weights(weights_path);
        auto r = solve(inst, net, dynamic, cfg.weights);
        sol = std::move(r.solution);
        latency = std::move(r.epoch_latency_sec);
      } else if (dynamic) {
        auto r = run_ga_dynamic(inst, cfg.ga);
        sol = std::move(r.solution);
        replans = r.replans;
        latency.push_back(r.replan_time_sec);
      } else {
        sol = run_ga(inst, cfg.ga);
      }
      if (!out_path.empty()) {
        write_solution(out_path, sol, false);
      }
      metrics_line(out, dynamic_mode ? "dynamic" : "solve", inst, algorithm, sol);
      if (dynamic_mode) {
        if (algorithm == "rl") {
          out << fmt::format("latency epochs={} p50_sec={:.6f} p90_sec={:.6f} p99_sec={:.6f} max_sec={:.6f}\n",
                             latency.size(), percentile(latency, 50), percentile(latency, 90),
                             percentile(latency, 99), percentile(latency, 100));
        } else {
          out << fmt::format("latency replans={} replan_time_sec={:.6f}\n", replans,
                             latency.empty() ? 0.0 : latency.front());
        }
        const auto [type, klass] = classify_instance_name(inst.name());
        const std::string header = "dynamicity,instance,type,class,customers,algorithm,vehicles,distance,fulfilment";
        const std::string row = fmt::format("{},{},{},{},{},{},{},{:.6f},{:.6f}", dynamicity, inst.name(), type,
                                            klass, inst.size(), algorithm, sol.vehicles_used,
                                            sol.total_distance, sol.fulfilment);
        out << "row " << row << ",wall_time_sec=" << fixed2(sol.wall_time_sec) << '\n';
        if (!row_path.empty()) {
          auto f = open_out(row_path);
          f << header << '\n' << row << '\n';
        }
      }
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      BenchSpec spec;
      spec.paths = list_instances(dir, pattern);
      if (spec.paths.empty()) {
        err << fmt::format("status=error command=bench reason=\"no instances in {} match {}\"\n", dir, pattern);
        return kExitError;
      }
      spec.first_n = first_n;
      spec.algorithms = algorithms;
      spec.repetitions = repetitions;
      spec.dynamicity = dynamicity;
      spec.reveal_seed = reveal_seed;
      spec.ga = cfg.ga;
      spec.weights = cfg.weights;
      std::optional<Network> net;
      if (std::find(algorithms.begin(), algorithms.end(), "rl") != algorithms.end()) {
        if (weights_path.empty()) {
          throw CLI::RequiredError("--weights is required for the rl algorithm");
        }
        net = load_weights(weights_path);
        spec.net = &*net;
      }
      const auto rows = run_bench(spec);
      const auto report = aggregate_results(rows);
      if (!rows_path.empty()) {
        auto f = open_out(rows_path);
        write_results_csv(f, rows, false);
      }
      if (!report_path.empty()) {
        auto f = open_out(report_path);
        write_report_csv(f, report, false);
      }
      if (!timing_path.empty()) {
        auto f = open_out(timing_path);
        write_report_csv(f, report, true);
      }
      if (!ratio_path.empty()) {
        if (reference_path.empty()) {
          throw CLI::RequiredError("--ratios needs --reference");
        }
        std::ifstream rin(reference_path);
        if (!rin) {
          throw std::runtime_error("cannot open " + reference_path);
        }
        auto f = open_out(ratio_path);
        write_ratio_csv(f, ratio_points(report, read_reference_table(rin)));
      }
      write_report_csv(out, report, true);
      out << fmt::format("status=ok command=bench instances={} rows={} groups={}\n", spec.paths.size(),
                         rows.size(), report.size());
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      const Instance inst = load_instance(instance_path, first_n);
      const Solution sol = read_solution(solution_path);
      const auto report = validate_solution(inst, sol);
      if (report.ok()) {
        out << fmt::format("status=ok command=validate instance={} served={} distance={:.2f}\n", inst.name(),
                           sol.served_count(), sol.total_distance);
        return kExitOk;
      }
      out << fmt::format("status=invalid command=validate instance={} violations={}\n", inst.name(),
                         report.violations.size());
      out << report.summary() << '\n';
      return kExitInvalid;
    }

    if (oracle_cmd->parsed()) {
      const Instance inst = load_instance(instance_path, first_n);
      const auto r = brute_force_optimal(inst, max_customers);
      if (!r.solution) {
        std::string ids;
        for (int id : r.witness) {
          ids += (ids.empty() ? "" : ";") + std::to_string(id);
        }
        out << fmt::format("status=infeasible command=oracle instance={} reason=\"{}\" witness={} nodes={}\n",
                           inst.name(), r.reason, ids.empty() ? "-" : ids, r.nodes);
        return kExitInfeasible;
      }
      if (!out_path.empty()) {
        write_solution(out_path, *r.solution, false);
      }
      out << fmt::format("status=ok command=oracle instance={} vehicles={} distance={:.6f} nodes={}\n",
                         inst.name(), r.solution->vehicles_used, r.solution->total_distance, r.nodes);
      return kExitOk;
    }

    if (milp_cmd->parsed()) {
      const Instance inst = load_instance(instance_path, first_n);
      const auto counts = export_milp(inst, out_path);
      out << fmt::format("status=ok command=export-milp instance={} binaries={} continuous={} constraints={}\n",
                         inst.name(), counts.binaries, counts.continuous, counts.constraints);
      return kExitOk;
    }

    if (gen_cmd->parsed()) {
      GeneratorConfig g = cfg.train.generator;
      if (seed) {
        g.seed = *seed;
      }
      if (customers) {
        g.n_customers = *customers;
      }
      if (vehicles) {
        g.n_vehicles = *vehicles;
      }
      std::filesystem::create_directories(out_dir);
      const auto set = generate_training_set(g, count);
      for (std::size_t i = 0; i < set.size(); ++i) {
        Instance inst = set[i];
        if (dynamicity > 0.0) {
          inst = apply_dynamicity(inst, {dynamicity, g.seed + i});
        }
        const auto path = (std::filesystem::path(out_dir) / (inst.name() + ".json")).string();
        write_instance(path, inst);
        out << fmt::format("status=ok command=generate file={} customers={} vehicles={}\n", path, inst.size(),
                           inst.fleet().count);
      }
      return kExitOk;
    }
  } catch (const CLI::Error& e) {
    err << "status=usage error=\"" << e.what() << "\"\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "status=parse_error error=\"" << e.what() << "\"\n";
    return kExitParse;
  } catch (const SchemaError& e) {
    err << "status=parse_error error=\"" << e.what() << "\"\n";
    return kExitParse;
  } catch (const WeightsError& e) {
    err << "status=parse_error error=\"" << e.what() << "\"\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << "status=error error=\"" << e.what() << "\"\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace dvrp
