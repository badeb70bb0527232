#include "dvrp/bench.hpp"

#include <algorithm>
#include <filesystem>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "dvrp/agent.hpp"

namespace dvrp {

std::vector<std::string> list_instances(const std::string& dir, const std::string& pattern) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir);
  }
  const std::regex re(pattern);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_search(entry.path().stem().string(), re)) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ResultRow> run_bench(const BenchSpec& spec) {
  std::vector<ResultRow> rows;
  for (const auto& path : spec.paths) {
    Instance inst = load_instance(path, spec.first_n);
    const bool dynamic = spec.dynamicity > 0.0;
    if (dynamic) {
      inst = apply_dynamicity(inst, {spec.dynamicity, spec.reveal_seed});
    }
    const auto [type, klass] = classify_instance_name(inst.name());
    for (const auto& algo : spec.algorithms) {
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        Solution sol;
        if (algo == "rl") {
          if (spec.net == nullptr) {
            throw std::invalid_argument("the rl algorithm needs network weights");
          }
          sol = solve(inst, *spec.net, dynamic, spec.weights).solution;
        } else if (algo == "ga") {
          GaConfig cfg = spec.ga;
          cfg.seed = spec.ga.seed + static_cast<std::uint64_t>(rep);
          sol = dynamic ? run_ga_dynamic(inst, cfg).solution : run_ga(inst, cfg);
        } else {
          throw std::invalid_argument("unknown algorithm: " + algo);
        }
        ResultRow row;
        row.instance = inst.name();
        row.algorithm = algo;
        row.type = type;
        row.klass = klass;
        row.customers = static_cast<int>(inst.size());
        row.vehicles = sol.vehicles_used;
        row.distance = sol.total_distance;
        row.wall_time_sec = sol.wall_time_sec;
        row.fulfilment = sol.fulfilment;
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.instance < b.instance; });
  return rows;
}

std::vector<Reference> read_reference_table(std::istream& in) {
  std::vector<Reference> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (header) {
      if (line.rfind("type,customers,class,vehicles,distance", 0) != 0) {
        throw ParseError(lineno, "reference table header must be type,customers,class,vehicles,distance");
      }
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() < 5) {
      throw ParseError(lineno, "expected 5 columns");
    }
    try {
      out.push_back({std::stoi(cells[0]), std::stoi(cells[1]), cells[2], std::stod(cells[3]),
                     std::stod(cells[4])});
    } catch (const std::exception&) {
      throw ParseError(lineno, "non-numeric cell");
    }
  }
  return out;
}

std::vector<RatioPoint> ratio_points(const std::vector<ReportRow>& report,
                                     const std::vector<Reference>& refs) {
  std::vector<RatioPoint> out;
  for (const auto& row : report) {
    for (const auto& ref : refs) {
      if (ref.type == row.type && ref.customers == row.customers && ref.klass == row.klass) {
        out.push_back({row.type, row.customers, row.klass, row.algorithm,
                       row.distance / ref.distance, row.vehicles / ref.vehicles});
        break;
      }
    }
  }
  return out;
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioPoint>& points) {
  out << "type,customers,class,algorithm,rel_distance,rel_vehicles\n";
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{},{:.6f},{:.6f}\n", p.type, p.customers, p.klass, p.algorithm,
                       p.rel_distance, p.rel_vehicles);
  }
}

}  // namespace dvrp
