#include "mlat/config.hpp"

#include "mlat/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mlat {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const YAML::Mark m = node.Mark();
    std::string where = origin_;
    if (!m.is_null()) where += ":" + std::to_string(m.line + 1);
    throw ConfigError(where + ": " + what);
  }

  void expect_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, section + " must be a mapping");
    for (const auto& kv : map) {
      const std::string key = kv.first.Scalar();
      if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
    }
  }

  YAML::Node required(const YAML::Node& map, const std::string& key, const std::string& section) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, section + " is missing '" + key + "'");
    return n;
  }

  mp::Value decimal(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    try {
      return mp::Value::parse(node.Scalar());
    } catch (const ConfigError& e) {
      fail(node, what + ": " + e.what());
    }
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    const std::string& text = node.Scalar();
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) fail(node, what + ": not a number '" + text + "'");
    return value;
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be an integer");
    const std::string& text = node.Scalar();
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) fail(node, what + ": not an integer '" + text + "'");
    return value;
  }

  Vec3 vec3(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() != 3) fail(node, what + " must be a list of 3 numbers");
    return {decimal(node[0], what), decimal(node[1], what), decimal(node[2], what)};
  }

 private:
  std::string origin_;
};

void read_sensors(const Reader& in, const YAML::Node& node, edlen::SensorBudget& sensors) {
  in.expect_keys(node, "budget.sensors", {"temperature_c", "humidity_pct", "pressure_pa"});
  if (node["temperature_c"]) sensors.temperature_c = in.number(node["temperature_c"], "sensors.temperature_c");
  if (node["humidity_pct"]) sensors.humidity_pct = in.number(node["humidity_pct"], "sensors.humidity_pct");
  if (node["pressure_pa"]) sensors.pressure_pa = in.number(node["pressure_pa"], "sensors.pressure_pa");
}

void read_air(const Reader& in, const YAML::Node& node, edlen::AirConditions& air) {
  in.expect_keys(node, "budget.air", {"temperature_c", "pressure_pa", "humidity_pct"});
  if (node["temperature_c"]) air.temperature_c = in.number(node["temperature_c"], "air.temperature_c");
  if (node["pressure_pa"]) air.pressure_pa = in.number(node["pressure_pa"], "air.pressure_pa");
  if (node["humidity_pct"]) air.humidity_pct = in.number(node["humidity_pct"], "air.humidity_pct");
}

UncertaintyBudget read_budget(const Reader& in, const YAML::Node& node) {
  in.expect_keys(node, "budget",
                 {"delta1_um", "delta2_um", "misalignment_deg", "U_RP_um", "setup_radius_mm", "sensor_preset",
                  "sensors", "air", "lambda_vacuum_um", "U_Edlen_um_per_m"});
  UncertaintyBudget b;
  if (node["delta1_um"]) b.delta1_um = in.number(node["delta1_um"], "delta1_um");
  if (node["delta2_um"]) b.delta2_um = in.number(node["delta2_um"], "delta2_um");
  if (node["misalignment_deg"]) b.misalignment_deg = in.number(node["misalignment_deg"], "misalignment_deg");
  if (node["U_RP_um"]) b.smr_position_override_um = in.number(node["U_RP_um"], "U_RP_um");
  if (node["setup_radius_mm"]) b.setup_radius_mm = in.number(node["setup_radius_mm"], "setup_radius_mm");
  if (const YAML::Node preset = node["sensor_preset"]) {
    const std::string name = preset.IsScalar() ? preset.Scalar() : "";
    if (name == "datasheet") {
      b.sensors = edlen::SensorBudget::datasheet();
    } else if (name == "budget_table") {
      b.sensors = edlen::SensorBudget::budget_table();
    } else {
      in.fail(preset, "sensor_preset must be 'datasheet' or 'budget_table'");
    }
  }
  if (node["sensors"]) read_sensors(in, node["sensors"], b.sensors);
  if (node["air"]) read_air(in, node["air"], b.nominal_air);
  if (node["lambda_vacuum_um"]) b.sensors.lambda_vacuum_um = in.number(node["lambda_vacuum_um"], "lambda_vacuum_um");
  if (node["U_Edlen_um_per_m"]) b.edlen_override_um_per_m = in.number(node["U_Edlen_um_per_m"], "U_Edlen_um_per_m");
  try {
    b.validate();
  } catch (const Error& e) {
    in.fail(node, std::string("budget: ") + e.what());
  }
  return b;
}

NetworkConfig read_network(const Reader& in, const YAML::Node& root) {
  NetworkConfig net;
  if (root["name"]) net.name = root["name"].Scalar();
  if (const YAML::Node ws = root["workspace_m"]) {
    if (!ws.IsSequence() || ws.size() != 3) in.fail(ws, "workspace_m must be a list of 3 numbers");
    for (size_t k = 0; k < 3; ++k) net.workspace_m[k] = in.number(ws[k], "workspace_m");
  }

  const YAML::Node stations = in.required(root, "stations", "configuration");
  if (!stations.IsSequence()) in.fail(stations, "stations must be a list");
  for (const auto& s : stations) {
    in.expect_keys(s, "station", {"id", "position_m", "dead_zone_mm"});
    Station st;
    st.id = in.integer(in.required(s, "id", "station"), "station id");
    st.position = in.vec3(in.required(s, "position_m", "station"), "station position_m");
    st.dead_zone = in.decimal(in.required(s, "dead_zone_mm", "station"), "dead_zone_mm").scaled(-3);
    net.stations.push_back(std::move(st));
  }

  const YAML::Node points = in.required(root, "points", "configuration");
  if (!points.IsSequence()) in.fail(points, "points must be a list");
  for (const auto& p : points) {
    in.expect_keys(p, "point", {"id", "position_m"});
    TargetPoint tp;
    tp.id = in.integer(in.required(p, "id", "point"), "point id");
    tp.position = in.vec3(in.required(p, "position_m", "point"), "point position_m");
    net.points.push_back(std::move(tp));
  }
  return net;
}

Vec3 vec(const char* x, const char* y, const char* z) {
  return {mp::Value::parse(x), mp::Value::parse(y), mp::Value::parse(z)};
}

std::vector<Station> table1_stations() {
  return {
      {1, vec("0", "0", "0"), mp::Value::parse("0.020458")},
      {2, vec("-10.5", "0", "0"), mp::Value::parse("0.045455")},
      {3, vec("0", "2", "0"), mp::Value::parse("0.100256")},
      {4, vec("0", "-2", "2"), mp::Value::parse("0.052230")},
      {5, vec("10.5", "0", "2"), mp::Value::parse("0.012230")},
  };
}

// M1..M11 along x = 0, 2, ..., 20 m. Odd-numbered points sit on the line
// y = -1.5, z = 0.5, so |M1 - Mi| for odd i is exactly 2(i - 1) m; the
// even-numbered ones alternate between (y, z) = (1.5, 0.5) and (-1.5, 2.5).
std::vector<TargetPoint> default_points(int count) {
  std::vector<TargetPoint> pts;
  for (int k = 0; k < count; ++k) {
    const char* y = "-1.5";
    const char* z = "0.5";
    if (k % 4 == 1) y = "1.5";
    if (k % 4 == 3) z = "2.5";
    pts.push_back({k + 1, {mp::Value::from_integer(2 * k), mp::Value::parse(y), mp::Value::parse(z)}});
  }
  return pts;
}

}  // namespace

RunInputs parse_config(std::string_view text, std::string_view origin) {
  const Reader in{std::string(origin)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError(std::string(origin) + ": top level must be a mapping");
  in.expect_keys(root, "configuration", {"name", "workspace_m", "stations", "points", "budget"});

  RunInputs out;
  out.network = read_network(in, root);
  try {
    out.network.validate_structure();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  if (root["budget"]) out.budget = read_budget(in, root["budget"]);
  return out;
}

RunInputs load_config(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot read configuration file " + path.string());
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str(), path.string());
}

NetworkConfig table1_network() {
  NetworkConfig net;
  net.name = "table1";
  net.workspace_m = {22.0, 4.0, 3.0};
  net.stations = table1_stations();
  net.points = default_points(11);
  return net;
}

NetworkConfig teaching_network() {
  NetworkConfig net;
  net.name = "teaching3";
  net.workspace_m = {22.0, 4.0, 3.0};
  net.stations = table1_stations();
  net.stations.resize(3);
  net.points = default_points(7);
  return net;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mlat
