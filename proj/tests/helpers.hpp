#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dvrp/core.hpp"

namespace dvrp::testing {

struct C {
  double x, y, demand, tw_min, tw_max, service = 0.0, reveal = 0.0;
};

inline Instance make_instance(std::vector<C> cs, int vehicles = 2, double capacity = 100.0,
                              double speed = 1.0, Location depot = {0.0, 0.0},
                              std::optional<double> depot_due = std::nullopt,
                              std::string name = "toy") {
  std::vector<Customer> out;
  int id = 1;
  for (const auto& c : cs) {
    out.push_back({id++, {c.x, c.y}, c.demand, c.tw_min, c.tw_max, c.service, c.reveal});
  }
  return Instance(std::move(name), depot, depot_due, std::move(out), {vehicles, capacity, speed});
}

inline std::string data_dir() { return DVRP_DATA_DIR; }
inline std::string solomon(const std::string& name) { return data_dir() + "/solomon/" + name + ".txt"; }

}  // namespace dvrp::testing
