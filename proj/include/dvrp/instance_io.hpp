#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvrp/core.hpp"

namespace dvrp {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Malformed native file; what() starts with the offending field path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Solomon / Gehring-Homberger layout. The depot is customer row 0 and its due
// date becomes the depot due date; speed is one distance unit per time unit.
Instance parse_solomon(std::istream& in, std::optional<std::size_t> first_n = std::nullopt);
Instance load_solomon(const std::string& path, std::optional<std::size_t> first_n = std::nullopt);

struct GeneratorConfig {
  int n_customers = 20;
  int n_vehicles = 4;
  std::pair<double, double> coord_range{-100.0, 100.0};
  std::pair<double, double> depot_range{-25.0, 25.0};
  double demand_rate = 0.1;  // exponential rate, mean demand 1/rate
  double capacity = 200.0;
  double speed = 10.0;
  std::pair<double, double> tw_start_range{0.0, 200.0};
  double tw_width_mean = 35.0;
  double tw_width_std = 5.0;
  double tw_width_min = 1.0;
  std::uint64_t seed = 0;
};

Instance generate_training_instance(const GeneratorConfig& cfg);

// The fixed training set: `count` instances from consecutive seeds.
std::vector<Instance> generate_training_set(GeneratorConfig cfg, int count);

struct DynamicityConfig {
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

// Hides round(fraction * n) customers behind a positive reveal time. A hidden
// customer is revealed no later than the last moment a vehicle leaving the
// depot could still arrive by its window opening.
Instance apply_dynamicity(const Instance& inst, const DynamicityConfig& cfg);

// Same instance with every reveal time cleared.
Instance as_static(const Instance& inst);

// Native self-describing formats (JSON).
nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json solution_to_json(const Solution& sol, bool include_timing = true);
Solution solution_from_json(const nlohmann::json& j);

void write_instance(const std::string& path, const Instance& inst);
Instance read_instance_native(const std::string& path);
void write_solution(const std::string& path, const Solution& sol, bool include_timing = true);
Solution read_solution(const std::string& path);

// Loads either format: native JSON when the file starts with '{', Solomon text otherwise.
Instance load_instance(const std::string& path, std::optional<std::size_t> first_n = std::nullopt);

// One per-instance result line, mirroring the benchmark table columns.
struct ResultRow {
  std::string instance;
  std::string algorithm;
  int type = 0;           // 1 = small capacity, 2 = large capacity
  std::string klass;      // C, R, RC or "-" for generated data
  int customers = 0;
  double vehicles = 0.0;
  double distance = 0.0;
  double wall_time_sec = 0.0;
  double fulfilment = 0.0;
};

// Averaged row over every instance of one (type, customers, class, algorithm) group.
struct ReportRow {
  int type = 0;
  int customers = 0;
  std::string klass;
  std::string algorithm;
  int instances = 0;
  double vehicles = 0.0;
  double distance = 0.0;
  double wall_time_sec = 0.0;
  double fulfilment = 0.0;
};

// Infers type and class from Solomon-style names (C101, RC2_4_1, ...).
std::pair<int, std::string> classify_instance_name(const std::string& name);

std::vector<ReportRow> aggregate_results(const std::vector<ResultRow>& rows);

// CSV writers. Timing columns are written only when include_timing is set, so
// that reports without them are reproducible byte for byte.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing);
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool include_timing);
std::vector<ResultRow> read_results_csv(std::istream& in);

}  // namespace dvrp
