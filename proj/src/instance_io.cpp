#include "dvrp/instance_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

namespace dvrp {

ParseError::ParseError(std::size_t line, const std::string& what)
  : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

SchemaError::SchemaError(std::string path, const std::string& what)
  : std::runtime_error(fmt::format("{}: {}", path, what)), path_(std::move(path)) {}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    out.push_back(tok);
  }
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

double to_number(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, fmt::format("non-numeric cell '{}'", tok));
  }
  return v;
}

}  // namespace

Instance parse_solomon(std::istream& in, std::optional<std::size_t> first_n) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }

  std::size_t pos = 0;
  auto next_nonblank = [&]() -> std::optional<std::size_t> {
    while (pos < lines.size() && blank(lines[pos])) {
      ++pos;
    }
    if (pos == lines.size()) {
      return std::nullopt;
    }
    return pos++;
  };

  auto name_line = next_nonblank();
  if (!name_line) {
    throw ParseError(lines.size() + 1, "empty input");
  }
  const auto name_tokens = split_ws(lines[*name_line]);
  const std::string name = name_tokens.front();

  // Vehicle header: a line mentioning NUMBER and CAPACITY, then the values.
  std::optional<std::size_t> fleet_header;
  while (auto l = next_nonblank()) {
    const auto u = upper(lines[*l]);
    if (u.find("NUMBER") != std::string::npos && u.find("CAPACITY") != std::string::npos) {
      fleet_header = *l;
      break;
    }
  }
  if (!fleet_header) {
    throw ParseError(lines.size() + 1, "missing vehicle NUMBER/CAPACITY header");
  }
  auto fleet_line = next_nonblank();
  if (!fleet_line) {
    throw ParseError(lines.size() + 1, "missing vehicle count and capacity values");
  }
  const auto fleet_tokens = split_ws(lines[*fleet_line]);
  if (fleet_tokens.size() < 2) {
    throw ParseError(*fleet_line + 1, "expected vehicle count and capacity");
  }
  const double count = to_number(fleet_tokens[0], *fleet_line + 1);
  const double capacity = to_number(fleet_tokens[1], *fleet_line + 1);
  if (count < 1 || count != std::floor(count) || !(capacity > 0)) {
    throw ParseError(*fleet_line + 1, "vehicle count must be a positive integer, capacity positive");
  }

  std::optional<std::size_t> cust_header;
  while (auto l = next_nonblank()) {
    const auto u = upper(lines[*l]);
    // The column header, not the bare "CUSTOMER" section title.
    if (u.find("CUST") != std::string::npos && u.find("COORD") != std::string::npos) {
      cust_header = *l;
      break;
    }
  }
  if (!cust_header) {
    throw ParseError(lines.size() + 1, "missing CUSTOMER table header");
  }

  struct Row {
    std::size_t line;
    std::array<double, 7> v;
  };
  std::vector<Row> rows;
  const std::size_t wanted = first_n ? *first_n + 1 : std::numeric_limits<std::size_t>::max();
  while (rows.size() < wanted) {
    auto l = next_nonblank();
    if (!l) {
      break;
    }
    const auto tokens = split_ws(lines[*l]);
    if (tokens.size() < 7) {
      throw ParseError(*l + 1, fmt::format("expected 7 columns, found {}", tokens.size()));
    }
    Row row{*l + 1, {}};
    for (std::size_t k = 0; k < 7; ++k) {
      row.v[k] = to_number(tokens[k], *l + 1);
    }
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw ParseError(lines.size() + 1, "no depot row");
  }
  if (first_n && rows.size() < wanted) {
    throw ParseError(lines.size() + 1,
                     fmt::format("requested {} customers but file has {}", *first_n, rows.size() - 1));
  }

  const auto& depot_row = rows.front();
  std::vector<Customer> customers;
  customers.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& v = rows[r].v;
    Customer c;
    c.id = static_cast<int>(v[0]);
    c.loc = {v[1], v[2]};
    c.demand = v[3];
    c.tw_min = v[4];
    c.tw_max = v[5];
    c.service_duration = v[6];
    if (!(c.tw_min < c.tw_max)) {
      throw ParseError(rows[r].line, "ready time must be before due date");
    }
    customers.push_back(c);
  }

  std::string inst_name = name;
  if (first_n) {
    inst_name += fmt::format(".{}", *first_n);
  }
  try {
    return Instance(inst_name, {depot_row.v[1], depot_row.v[2]}, depot_row.v[5],
                    std::move(customers),
                    FleetSpec{static_cast<int>(count), capacity, 1.0});
  } catch (const std::invalid_argument& e) {
    throw ParseError(depot_row.line, e.what());
  }
}

Instance load_solomon(const std::string& path, std::optional<std::size_t> first_n) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open {}", path));
  }
  return parse_solomon(in, first_n);
}

Instance generate_training_instance(const GeneratorConfig& cfg) {
  if (cfg.n_customers < 0 || cfg.n_vehicles < 1 || !(cfg.demand_rate > 0.0) ||
      cfg.coord_range.first >= cfg.coord_range.second ||
      cfg.depot_range.first >= cfg.depot_range.second ||
      cfg.tw_start_range.first >= cfg.tw_start_range.second || !(cfg.tw_width_min > 0.0)) {
    throw std::invalid_argument("invalid generator configuration");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coord(cfg.coord_range.first, cfg.coord_range.second);
  std::uniform_real_distribution<double> depot(cfg.depot_range.first, cfg.depot_range.second);
  std::exponential_distribution<double> demand(cfg.demand_rate);
  std::uniform_real_distribution<double> start(cfg.tw_start_range.first, cfg.tw_start_range.second);
  std::normal_distribution<double> width(cfg.tw_width_mean, cfg.tw_width_std);

  const double dx = depot(rng);
  const double dy = depot(rng);
  std::vector<Customer> customers;
  customers.reserve(static_cast<std::size_t>(cfg.n_customers));
  for (int i = 0; i < cfg.n_customers; ++i) {
    Customer c;
    c.id = i + 1;
    c.loc.x = coord(rng);
    c.loc.y = coord(rng);
    c.demand = demand(rng);
    c.tw_min = start(rng);
    c.tw_max = c.tw_min + std::max(cfg.tw_width_min, width(rng));
    customers.push_back(c);
  }
  return Instance(fmt::format("train-{}", cfg.seed), {dx, dy}, std::nullopt, std::move(customers),
                  FleetSpec{cfg.n_vehicles, cfg.capacity, cfg.speed});
}

std::vector<Instance> generate_training_set(GeneratorConfig cfg, int count) {
  std::vector<Instance> out;
  const auto base = cfg.seed;
  for (int i = 0; i < count; ++i) {
    cfg.seed = base + static_cast<std::uint64_t>(i);
    out.push_back(generate_training_instance(cfg));
  }
  return out;
}

Instance apply_dynamicity(const Instance& inst, const DynamicityConfig& cfg) {
  if (!(cfg.fraction >= 0.0 && cfg.fraction <= 1.0)) {
    throw std::invalid_argument("dynamicity fraction must lie in [0, 1]");
  }
  if (inst.has_dynamic_customers()) {
    throw std::invalid_argument("apply_dynamicity expects a static instance");
  }
  const std::size_t n = inst.size();
  const auto hidden = static_cast<std::size_t>(std::llround(cfg.fraction * static_cast<double>(n)));
  if (hidden == 0) {
    return inst;
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto customers = inst.customers();
  for (std::size_t k = 0; k < hidden; ++k) {
    auto& c = customers[order[k]];
    const double travel = inst.depot_travel(order[k]);
    double latest = c.tw_min - travel;
    if (latest <= 0.0) {
      // Window opens before a vehicle could get there; fall back to the
      // latest reveal that still allows arrival before the window closes.
      latest = c.tw_max - travel;
    }
    if (latest <= 0.0) {
      latest = kTolerance * std::max(1.0, inst.horizon());
    }
    // (0, latest]: strictly positive reveal time.
    c.reveal_time = latest * (1.0 - unit(rng));
  }
  return Instance(inst.name(), inst.depot(), inst.depot_due(), std::move(customers), inst.fleet());
}

Instance as_static(const Instance& inst) {
  if (!inst.has_dynamic_customers()) {
    return inst;
  }
  auto customers = inst.customers();
  for (auto& c : customers) {
    c.reveal_time = 0.0;
  }
  return Instance(inst.name(), inst.depot(), inst.depot_due(), std::move(customers), inst.fleet());
}

// ---------------------------------------------------------------------------
// Native JSON

namespace {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const nlohmann::json& at(const std::string& key) const {
    if (!j_.is_object()) {
      throw SchemaError(path_, "expected an object");
    }
    auto it = j_.find(key);
    if (it == j_.end()) {
      throw SchemaError(child(key), "missing field");
    }
    return *it;
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) {
      throw SchemaError(child(key), "expected a number");
    }
    return v.get<double>();
  }
  int integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) {
      throw SchemaError(child(key), "expected an integer");
    }
    return v.get<int>();
  }
  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) {
      throw SchemaError(child(key), "expected a string");
    }
    return v.get<std::string>();
  }
  Reader object(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_object()) {
      throw SchemaError(child(key), "expected an object");
    }
    return Reader(v, child(key));
  }
  std::vector<Reader> array(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) {
      throw SchemaError(child(key), "expected an array");
    }
    std::vector<Reader> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.emplace_back(v[i], fmt::format("{}[{}]", child(key), i));
    }
    return out;
  }
  const nlohmann::json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_ + "." + key; }

  void expect_format(const std::string& format) const {
    if (string("format") != format) {
      throw SchemaError(child("format"), fmt::format("expected '{}'", format));
    }
    if (integer("version") != 1) {
      throw SchemaError(child("version"), "unsupported version");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open {}", path));
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", fmt::format("{}: invalid JSON ({})", path, e.what()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(fmt::format("cannot write {}", path));
  }
  out << text << '\n';
}

}  // namespace

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["format"] = "dvrp-instance";
  j["version"] = 1;
  j["name"] = inst.name();
  j["depot"] = {{"x", inst.depot().x}, {"y", inst.depot().y}};
  j["depot_due"] = inst.depot_due() ? nlohmann::json(*inst.depot_due()) : nlohmann::json(nullptr);
  j["fleet"] = {{"count", inst.fleet().count},
                {"capacity", inst.fleet().capacity},
                {"speed", inst.fleet().speed}};
  auto& cs = j["customers"] = nlohmann::json::array();
  for (const auto& c : inst.customers()) {
    cs.push_back({{"id", c.id},
                  {"x", c.loc.x},
                  {"y", c.loc.y},
                  {"demand", c.demand},
                  {"tw_min", c.tw_min},
                  {"tw_max", c.tw_max},
                  {"service_duration", c.service_duration},
                  {"reveal_time", c.reveal_time}});
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  Reader root(j, "$");
  root.expect_format("dvrp-instance");
  const auto depot = root.object("depot");
  std::optional<double> due;
  if (!root.at("depot_due").is_null()) {
    due = root.number("depot_due");
  }
  const auto fleet = root.object("fleet");
  std::vector<Customer> customers;
  for (const auto& c : root.array("customers")) {
    Customer cu;
    cu.id = c.integer("id");
    cu.loc = {c.number("x"), c.number("y")};
    cu.demand = c.number("demand");
    cu.tw_min = c.number("tw_min");
    cu.tw_max = c.number("tw_max");
    cu.service_duration = c.number("service_duration");
    cu.reveal_time = c.number("reveal_time");
    customers.push_back(cu);
  }
  try {
    return Instance(root.string("name"), {depot.number("x"), depot.number("y")}, due,
                    std::move(customers),
                    FleetSpec{fleet.integer("count"), fleet.number("capacity"), fleet.number("speed")});
  } catch (const std::invalid_argument& e) {
    throw SchemaError("$", e.what());
  }
}

nlohmann::json solution_to_json(const Solution& sol, bool include_timing) {
  nlohmann::json j;
  j["format"] = "dvrp-solution";
  j["version"] = 1;
  auto& routes = j["routes"] = nlohmann::json::array();
  for (const auto& r : sol.routes) {
    nlohmann::json visits = nlohmann::json::array();
    for (const auto& v : r.visits) {
      visits.push_back({{"customer_id", v.customer_id},
                        {"arrival", v.arrival},
                        {"service_start", v.service_start},
                        {"departure", v.departure}});
    }
    routes.push_back({{"vehicle_id", r.vehicle_id},
                      {"depot_departure", r.depot_departure},
                      {"depot_return", r.depot_return},
                      {"load", r.load},
                      {"distance", r.distance},
                      {"visits", std::move(visits)}});
  }
  j["unserved"] = sol.unserved;
  j["total_distance"] = sol.total_distance;
  j["vehicles_used"] = sol.vehicles_used;
  j["fulfilment"] = sol.fulfilment;
  if (include_timing) {
    j["wall_time_sec"] = sol.wall_time_sec;
  }
  return j;
}

Solution solution_from_json(const nlohmann::json& j) {
  Reader root(j, "$");
  root.expect_format("dvrp-solution");
  Solution sol;
  for (const auto& r : root.array("routes")) {
    Route route;
    route.vehicle_id = r.integer("vehicle_id");
    route.depot_departure = r.number("depot_departure");
    route.depot_return = r.number("depot_return");
    route.load = r.number("load");
    route.distance = r.number("distance");
    for (const auto& v : r.array("visits")) {
      route.visits.push_back(
        {v.integer("customer_id"), v.number("arrival"), v.number("service_start"), v.number("departure")});
    }
    sol.routes.push_back(std::move(route));
  }
  const auto& unserved = root.at("unserved");
  if (!unserved.is_array()) {
    throw SchemaError("$.unserved", "expected an array");
  }
  for (std::size_t i = 0; i < unserved.size(); ++i) {
    if (!unserved[i].is_number_integer()) {
      throw SchemaError(fmt::format("$.unserved[{}]", i), "expected an integer");
    }
    sol.unserved.insert(unserved[i].get<int>());
  }
  sol.total_distance = root.number("total_distance");
  sol.vehicles_used = root.integer("vehicles_used");
  sol.fulfilment = root.number("fulfilment");
  if (root.has("wall_time_sec")) {
    sol.wall_time_sec = root.number("wall_time_sec");
  }
  return sol;
}

void write_instance(const std::string& path, const Instance& inst) {
  write_text(path, instance_to_json(inst).dump(2));
}

Instance read_instance_native(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

void write_solution(const std::string& path, const Solution& sol, bool include_timing) {
  write_text(path, solution_to_json(sol, include_timing).dump(2));
}

Solution read_solution(const std::string& path) {
  return solution_from_json(read_json_file(path));
}

Instance load_instance(const std::string& path, std::optional<std::size_t> first_n) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open {}", path));
  }
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  in.close();
  if (c == '{') {
    auto inst = read_instance_native(path);
    if (first_n) {
      if (*first_n > inst.size()) {
        throw SchemaError("$.customers", "fewer customers than requested");
      }
      std::vector<Customer> cs(inst.customers().begin(),
                               inst.customers().begin() + static_cast<std::ptrdiff_t>(*first_n));
      return Instance(inst.name(), inst.depot(), inst.depot_due(), std::move(cs), inst.fleet());
    }
    return inst;
  }
  return load_solomon(path, first_n);
}

// ---------------------------------------------------------------------------
// Results tables

std::pair<int, std::string> classify_instance_name(const std::string& name) {
  std::size_t i = 0;
  std::string klass;
  while (i < name.size() && std::isalpha(static_cast<unsigned char>(name[i]))) {
    klass += static_cast<char>(std::toupper(static_cast<unsigned char>(name[i])));
    ++i;
  }
  if ((klass == "C" || klass == "R" || klass == "RC") && i < name.size() &&
      (name[i] == '1' || name[i] == '2')) {
    return {name[i] - '0', klass};
  }
  return {0, "-"};
}

std::vector<ReportRow> aggregate_results(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<int, int, std::string, std::string>;
  std::map<Key, ReportRow> groups;
  for (const auto& r : rows) {
    auto& g = groups[Key{r.type, r.customers, r.klass, r.algorithm}];
    g.type = r.type;
    g.customers = r.customers;
    g.klass = r.klass;
    g.algorithm = r.algorithm;
    ++g.instances;
    g.vehicles += r.vehicles;
    g.distance += r.distance;
    g.wall_time_sec += r.wall_time_sec;
    g.fulfilment += r.fulfilment;
  }
  std::vector<ReportRow> out;
  for (auto& [key, g] : groups) {
    const double n = g.instances;
    g.vehicles /= n;
    g.distance /= n;
    g.wall_time_sec /= n;
    g.fulfilment /= n;
    out.push_back(g);
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing) {
  out << "instance,algorithm,type,class,customers,vehicles,distance,fulfilment";
  out << (include_timing ? ",wall_time_sec\n" : "\n");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}", r.instance, r.algorithm, r.type, r.klass,
                       r.customers, r.vehicles, r.distance, r.fulfilment);
    out << (include_timing ? fmt::format(",{:.2f}\n", r.wall_time_sec) : "\n");
  }
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool include_timing) {
  out << "type,customers,class,algorithm,instances,vehicles,distance,fulfilment";
  out << (include_timing ? ",wall_time_sec\n" : "\n");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{:.2f},{:.2f},{:.4f}", r.type, r.customers, r.klass,
                       r.algorithm, r.instances, r.vehicles, r.distance, r.fulfilment);
    out << (include_timing ? fmt::format(",{:.2f}\n", r.wall_time_sec) : "\n");
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line)) {
    return rows;
  }
  const bool timing = line.find("wall_time_sec") != std::string::npos;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      cells.push_back(cell);
    }
    if (cells.size() != (timing ? 9u : 8u)) {
      throw ParseError(lineno, "wrong number of result columns");
    }
    ResultRow r;
    r.instance = cells[0];
    r.algorithm = cells[1];
    r.type = static_cast<int>(to_number(cells[2], lineno));
    r.klass = cells[3];
    r.customers = static_cast<int>(to_number(cells[4], lineno));
    r.vehicles = to_number(cells[5], lineno);
    r.distance = to_number(cells[6], lineno);
    r.fulfilment = to_number(cells[7], lineno);
    if (timing) {
      r.wall_time_sec = to_number(cells[8], lineno);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dvrp
