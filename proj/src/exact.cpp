#include "dvrp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace dvrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Search {
 public:
  explicit Search(const Instance& in) : in_(in), n_(in.size()) {
    due_ = in.depot_due() ? *in.depot_due() : kInf;
  }

  void run() {
    if (n_ == 0) {
      best_ = 0.0;
      return;
    }
    anchor_ = 0;
    routes_used_ = 1;
    dfs(std::nullopt, 0.0, 0.0, 0.0, false);
  }

  bool found() const { return std::isfinite(best_); }
  const std::vector<std::vector<std::size_t>>& best_routes() const { return best_routes_; }
  std::size_t nodes() const { return nodes_; }

  bool can_append(std::optional<std::size_t> at, double time, double load, std::size_t j) const {
    const auto& c = in_.customer(j);
    if (load + c.demand > in_.fleet().capacity + 1e-9 * in_.fleet().capacity) {
      return false;
    }
    const double leg = at ? in_.travel(*at, j) : in_.depot_travel(j);
    const double start = std::max(time + leg, c.tw_min);
    if (start > c.tw_max + 1e-9 * std::max(1.0, c.tw_max)) {
      return false;
    }
    return start + c.service_duration + in_.depot_travel(j) <= due_ + 1e-9 * std::max(1.0, due_);
  }

 private:
  Location loc(std::optional<std::size_t> at) const {
    return at ? in_.customer(*at).loc : in_.depot();
  }

  // Minimum spanning tree over the current position, the unvisited customers
  // and the depot: the rest of any completion has to connect all of them.
  double mst_bound(std::optional<std::size_t> at) const {
    std::vector<Location> pts{loc(at), in_.depot()};
    for (std::size_t j = 0; j < n_; ++j) {
      if (!(visited_ >> j & 1U)) {
        pts.push_back(in_.customer(j).loc);
      }
    }
    const std::size_t m = pts.size();
    std::vector<double> key(m, kInf);
    std::vector<bool> in_tree(m, false);
    key[0] = 0.0;
    double total = 0.0;
    for (std::size_t it = 0; it < m; ++it) {
      std::size_t u = m;
      for (std::size_t v = 0; v < m; ++v) {
        if (!in_tree[v] && (u == m || key[v] < key[u])) {
          u = v;
        }
      }
      in_tree[u] = true;
      total += key[u];
      for (std::size_t v = 0; v < m; ++v) {
        if (!in_tree[v]) {
          key[v] = std::min(key[v], distance(pts[u], pts[v]));
        }
      }
    }
    return total;
  }

  void dfs(std::optional<std::size_t> at, double time, double load, double cost, bool has_anchor) {
    ++nodes_;
    if (cost + mst_bound(at) >= best_ - 1e-9) {
      return;
    }
    // Every route is opened for the smallest customer left at that moment;
    // once it can no longer be appended the branch is dead.
    if (!has_anchor && !can_append(at, time, load, anchor_)) {
      return;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if ((visited_ >> j & 1U) || !can_append(at, time, load, j)) {
        continue;
      }
      const auto& c = in_.customer(j);
      const double leg = at ? in_.dist(*at, j) : in_.depot_dist(j);
      const double start = std::max(time + leg / in_.fleet().speed, c.tw_min);
      visited_ |= 1U << j;
      current_.push_back(j);
      dfs(j, start + c.service_duration, load + c.demand, cost + leg, has_anchor || j == anchor_);
      current_.pop_back();
      visited_ &= ~(1U << j);
    }
    if (!at || !has_anchor) {
      return;
    }
    const double closed = cost + in_.depot_dist(*at);
    const std::uint32_t all = n_ == 32 ? ~0U : (1U << n_) - 1U;
    if (visited_ == all) {
      if (closed < best_ - 1e-9) {
        best_ = closed;
        best_routes_ = done_;
        best_routes_.push_back(current_);
      }
      return;
    }
    if (routes_used_ >= static_cast<std::size_t>(in_.fleet().count)) {
      return;
    }
    const auto saved_anchor = anchor_;
    auto saved_current = current_;
    done_.push_back(current_);
    current_.clear();
    ++routes_used_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!(visited_ >> j & 1U)) {
        anchor_ = j;
        break;
      }
    }
    dfs(std::nullopt, 0.0, 0.0, closed, false);
    --routes_used_;
    current_ = std::move(saved_current);
    done_.pop_back();
    anchor_ = saved_anchor;
  }

  const Instance& in_;
  std::size_t n_;
  double due_;
  std::uint32_t visited_ = 0;
  std::size_t anchor_ = 0;
  std::size_t routes_used_ = 0;
  std::vector<std::size_t> current_;
  std::vector<std::vector<std::size_t>> done_;
  double best_ = kInf;
  std::vector<std::vector<std::size_t>> best_routes_;
  std::size_t nodes_ = 0;
};

std::string num(double v) {
  return fmt::format("{:.17g}", v);
}

// Accumulates "+ c name" terms and wraps long rows.
class Row {
 public:
  void add(double coef, const std::string& name) {
    if (coef == 0.0) {
      return;
    }
    text_ += coef < 0 ? " - " : " + ";
    const double mag = std::abs(coef);
    if (mag != 1.0) {
      text_ += num(mag) + " ";
    }
    text_ += name;
    if (++terms_ % 6 == 0) {
      text_ += "\n   ";
    }
  }
  const std::string& str() const { return text_; }
  bool empty() const { return terms_ == 0; }

 private:
  std::string text_;
  int terms_ = 0;
};

}  // namespace

OracleResult brute_force_optimal(const Instance& inst, std::size_t max_customers) {
  if (inst.size() > max_customers || inst.size() > 31) {
    throw OracleLimitError(fmt::format(
        "instance has {} customers; the exact oracle is limited to {}", inst.size(),
        std::min<std::size_t>(max_customers, 31)));
  }
  OracleResult result;
  Search search(inst);
  for (std::size_t j = 0; j < inst.size(); ++j) {
    if (!search.can_append(std::nullopt, 0.0, 0.0, j)) {
      result.witness.push_back(inst.customer(j).id);
    }
  }
  if (!result.witness.empty()) {
    result.reason = "customers cannot be served even on a dedicated trip";
    return result;
  }
  search.run();
  result.nodes = search.nodes();
  if (!search.found()) {
    result.reason = fmt::format("no plan serves every customer with {} vehicles",
                                inst.fleet().count);
    return result;
  }
  std::vector<Route> routes;
  const auto& best = search.best_routes();
  for (std::size_t r = 0; r < best.size(); ++r) {
    routes.push_back(schedule_route(inst, static_cast<int>(r), best[r]));
  }
  result.solution = assemble_solution(inst, std::move(routes));
  return result;
}

MilpCounts export_milp(const Instance& inst, std::ostream& out) {
  if (inst.has_dynamic_customers()) {
    throw ContractViolation("MILP export needs a static instance (all reveal times zero)");
  }
  const std::size_t n = inst.size();
  const std::size_t K = static_cast<std::size_t>(inst.fleet().count);
  const double v = inst.fleet().speed;
  double T = inst.horizon();
  for (const auto& c : inst.customers()) {
    T = std::max(T, c.tw_max);
  }
  auto a = [](std::size_t i, std::size_t j, std::size_t k) { return fmt::format("a_{}_{}_{}", i + 1, j + 1, k); };
  auto f = [](std::size_t i, std::size_t k) { return fmt::format("f_{}_{}", i + 1, k); };
  auto l = [](std::size_t i, std::size_t k) { return fmt::format("l_{}_{}", i + 1, k); };
  auto t = [](std::size_t i, std::size_t k) { return fmt::format("t_{}_{}", i + 1, k); };
  // f_i_k plus every arc into i: 1 iff k visits i.
  auto visits = [&](Row& row, double coef, std::size_t i, std::size_t k) {
    row.add(coef, f(i, k));
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        row.add(coef, a(j, i, k));
      }
    }
  };

  MilpCounts counts;
  out << "\\ routing model for " << inst.name() << "\n";
  out << "Minimize\n obj:";
  Row obj;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) {
          obj.add(inst.dist(i, j), a(i, j, k));
        }
      }
      obj.add(inst.depot_dist(i), f(i, k));
      obj.add(inst.depot_dist(i), l(i, k));
    }
  }
  out << (obj.empty() ? " 0 f_dummy" : obj.str()) << "\n";
  out << "Subject To\n";
  auto emit = [&](const std::string& name, const Row& row, const char* sense, double rhs) {
    out << " " << name << ":" << (row.empty() ? " 0 " + t(0, 0) : row.str()) << " " << sense << " "
        << num(rhs) << "\n";
    ++counts.constraints;
  };

  for (std::size_t i = 0; i < n; ++i) {
    Row row;
    for (std::size_t k = 0; k < K; ++k) {
      visits(row, 1.0, i, k);
    }
    emit(fmt::format("serve_{}", i + 1), row, "=", 1.0);
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      Row row;
      visits(row, 1.0, i, k);
      row.add(-1.0, l(i, k));
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
          row.add(-1.0, a(i, j, k));
        }
      }
      emit(fmt::format("flow_{}_{}", i + 1, k), row, "=", 0.0);
    }
    Row trip;
    Row single;
    Row cap;
    for (std::size_t i = 0; i < n; ++i) {
      trip.add(1.0, f(i, k));
      trip.add(-1.0, l(i, k));
      single.add(1.0, f(i, k));
      visits(cap, inst.customer(i).demand, i, k);
    }
    emit(fmt::format("depot_{}", k), trip, "=", 0.0);
    emit(fmt::format("leave_{}", k), single, "<=", 1.0);
    emit(fmt::format("cap_{}", k), cap, "<=", inst.fleet().capacity);
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = inst.customer(i);
      Row open;
      open.add(1.0, t(i, k));
      visits(open, -c.tw_min, i, k);
      emit(fmt::format("open_{}_{}", i + 1, k), open, ">=", 0.0);

      Row close;
      close.add(1.0, t(i, k));
      visits(close, T, i, k);
      emit(fmt::format("close_{}_{}", i + 1, k), close, "<=", c.tw_max + T);

      Row first;
      first.add(1.0, t(i, k));
      first.add(-inst.depot_dist(i) / v, f(i, k));
      emit(fmt::format("first_{}_{}", i + 1, k), first, ">=", 0.0);

      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          continue;
        }
        const double gap = c.service_duration + inst.dist(i, j) / v;
        const double big = T + gap;
        Row link;
        link.add(1.0, t(j, k));
        link.add(-1.0, t(i, k));
        link.add(-big, a(i, j, k));
        emit(fmt::format("link_{}_{}_{}", i + 1, j + 1, k), link, ">=", gap - big);
      }
      if (inst.depot_due()) {
        Row due;
        due.add(1.0, t(i, k));
        due.add(c.service_duration + inst.depot_dist(i) / v, l(i, k));
        emit(fmt::format("due_{}_{}", i + 1, k), due, "<=", *inst.depot_due());
      }
    }
  }

  out << "Bounds\n";
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      out << " 0 <= " << t(i, k) << " <= " << num(T) << "\n";
      ++counts.continuous;
    }
  }
  out << "Binary\n";
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) {
          out << " " << a(i, j, k) << "\n";
          ++counts.binaries;
        }
      }
      out << " " << f(i, k) << "\n " << l(i, k) << "\n";
      counts.binaries += 2;
    }
  }
  out << "End\n";
  return counts;
}

MilpCounts export_milp(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  return export_milp(inst, out);
}

}  // namespace dvrp
