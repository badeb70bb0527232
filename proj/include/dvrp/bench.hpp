#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dvrp/ga.hpp"
#include "dvrp/instance_io.hpp"
#include "dvrp/reward.hpp"
#include "dvrp/valuenet.hpp"

namespace dvrp {

// Instance files in dir whose file name matches the regular expression, sorted by name.
std::vector<std::string> list_instances(const std::string& dir, const std::string& pattern = ".*");

struct BenchSpec {
  std::vector<std::string> paths;
  std::optional<std::size_t> first_n;
  std::vector<std::string> algorithms{"rl", "ga"};
  int repetitions = 1;
  double dynamicity = 0.0;
  std::uint64_t reveal_seed = 0;
  const Network* net = nullptr;  // required for "rl"
  GaConfig ga;
  RewardWeights weights;
};

// One row per (instance, algorithm, repetition), ordered by instance name.
std::vector<ResultRow> run_bench(const BenchSpec& spec);

// Best-known values per group, from a CSV with header type,customers,class,vehicles,distance.
struct Reference {
  int type = 0;
  int customers = 0;
  std::string klass;
  double vehicles = 0.0;
  double distance = 0.0;
};

std::vector<Reference> read_reference_table(std::istream& in);

// Distance and vehicle count of each report row relative to the reference.
struct RatioPoint {
  int type = 0;
  int customers = 0;
  std::string klass;
  std::string algorithm;
  double rel_distance = 0.0;
  double rel_vehicles = 0.0;
};

std::vector<RatioPoint> ratio_points(const std::vector<ReportRow>& report,
                                     const std::vector<Reference>& refs);
void write_ratio_csv(std::ostream& out, const std::vector<RatioPoint>& points);

}  // namespace dvrp
