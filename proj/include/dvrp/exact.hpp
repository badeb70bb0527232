#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvrp/core.hpp"

namespace dvrp {

class OracleLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  std::optional<Solution> solution;
  // When no plan serves everyone: ids of customers no vehicle can serve even
  // on a dedicated trip (empty if the fleet is simply too small).
  std::vector<int> witness;
  std::string reason;
  std::size_t nodes = 0;
};

// Minimum total distance serving every customer. Throws OracleLimitError when
// the instance has more than max_customers customers. Reveal times are ignored.
OracleResult brute_force_optimal(const Instance& inst, std::size_t max_customers = 8);

struct MilpCounts {
  std::size_t binaries = 0;
  std::size_t continuous = 0;
  std::size_t constraints = 0;
};

// Writes the routing model in CPLEX LP format. Variables: a_i_j_k (k drives
// i -> j), f_i_k (i is k's first stop), l_i_k (last stop), t_i_k (service
// start). Customers are numbered 1..n in instance order, vehicles 0..K-1.
// Throws ContractViolation for instances with dynamic customers.
MilpCounts export_milp(const Instance& inst, std::ostream& out);
MilpCounts export_milp(const Instance& inst, const std::string& path);

}  // namespace dvrp
