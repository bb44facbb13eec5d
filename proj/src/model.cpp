#include "mlat/model.hpp"

#include "mlat/errors.hpp"

#include <set>
#include <utility>

namespace mlat {

namespace {

void require_dimensions(int stations, int points) {
  if (stations < 3) {
    throw ConfigError("gauge: the reference frame needs at least 3 stations, got " + std::to_string(stations));
  }
  if (points < 1) throw ConfigError("network needs at least 1 target point, got " + std::to_string(points));
}

std::string station_name(int index) { return "P" + std::to_string(index + 1); }

}  // namespace

int count_unknowns(int stations, int points) {
  require_dimensions(stations, points);
  return 4 * stations + 3 * points - 6;
}

int count_equations(int stations, int points) {
  require_dimensions(stations, points);
  return stations * points;
}

int degrees_of_freedom(int stations, int points) {
  const int dof = count_equations(stations, points) - count_unknowns(stations, points);
  if (dof < 0) {
    throw ConfigError("underdetermined system: " + std::to_string(count_equations(stations, points)) +
                      " equations for " + std::to_string(count_unknowns(stations, points)) + " unknowns");
  }
  return dof;
}

void NetworkConfig::validate() const {
  validate_structure();
  degrees_of_freedom(station_count(), point_count());
}

void NetworkConfig::validate_structure() const {
  require_dimensions(station_count(), point_count());
  for (int j = 0; j < station_count(); ++j) {
    const Station& s = stations[static_cast<size_t>(j)];
    if (s.id != j + 1) throw ConfigError("station ids must be 1..POS in order; found " + std::to_string(s.id));
    if (s.dead_zone.negative()) throw ConfigError("dead zone of " + station_name(j) + " is negative");
    for (int axis = ParameterLayout::free_axes(j); axis < 3; ++axis) {
      if (!s.position[static_cast<size_t>(axis)].is_zero()) {
        throw ConfigError("gauge: " + station_name(j) + " coordinate " + "xyz"[axis] +
                          " must be 0 (P1 at the origin, P2 on the X axis, P3 in the XY plane)");
      }
    }
  }
  for (int i = 0; i < point_count(); ++i) {
    if (points[static_cast<size_t>(i)].id != i + 1) {
      throw ConfigError("point ids must be 1..PTS in order; found " + std::to_string(points[static_cast<size_t>(i)].id));
    }
  }
}

// ---------------------------------------------------------------- layout

ParameterLayout::ParameterLayout(int stations, int points)
    : stations_(stations), points_(points), size_(count_unknowns(stations, points)) {}

int ParameterLayout::station_offset(int index) const {
  // Stations 0, 1, 2 occupy 1, 2, 3 slots; later ones 4 each.
  if (index <= 3) return index * (index + 1) / 2;
  return 6 + 4 * (index - 3);
}

std::optional<int> ParameterLayout::station_coordinate(int index, int axis) const {
  if (axis >= free_axes(index)) return std::nullopt;
  return station_offset(index) + axis;
}

int ParameterLayout::dead_zone(int index) const { return station_offset(index) + free_axes(index); }

int ParameterLayout::point_coordinate(int index, int axis) const {
  return station_offset(stations_) + 3 * index + axis;
}

// ---------------------------------------------------------------- vector

ParameterVector::ParameterVector(ParameterLayout layout, std::vector<mp::Value> values)
    : layout_(layout), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != layout_.size()) {
    throw StructuralError("parameter vector has " + std::to_string(values_.size()) + " entries, layout expects " +
                          std::to_string(layout_.size()));
  }
}

mp::Value ParameterVector::station_coordinate(int index, int axis) const {
  const auto slot = layout_.station_coordinate(index, axis);
  return slot ? (*this)[*slot] : mp::Value();
}

ParameterVector ParameterVector::rounded(const mp::Context& ctx) const {
  std::vector<mp::Value> out;
  out.reserve(values_.size());
  for (const auto& v : values_) out.push_back(ctx.round(v));
  return ParameterVector(layout_, std::move(out));
}

NetworkEstimate nominal_estimate(const NetworkConfig& config) {
  NetworkEstimate e;
  for (const auto& s : config.stations) {
    e.stations.push_back(s.position);
    e.dead_zones.push_back(s.dead_zone);
  }
  for (const auto& p : config.points) e.points.push_back(p.position);
  return e;
}

ParameterVector pack(const NetworkConfig& config, const NetworkEstimate& estimate) {
  const int pos = config.station_count();
  const int pts = config.point_count();
  if (static_cast<int>(estimate.stations.size()) != pos || static_cast<int>(estimate.dead_zones.size()) != pos ||
      static_cast<int>(estimate.points.size()) != pts) {
    throw StructuralError("estimate dimensions do not match network " + std::to_string(pos) + " stations / " +
                          std::to_string(pts) + " points");
  }
  const ParameterLayout layout(pos, pts);
  std::vector<mp::Value> values(static_cast<size_t>(layout.size()));
  for (int j = 0; j < pos; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      const mp::Value& c = estimate.stations[static_cast<size_t>(j)][static_cast<size_t>(axis)];
      if (const auto slot = layout.station_coordinate(j, axis)) {
        values[static_cast<size_t>(*slot)] = c;
      } else if (!c.is_zero()) {
        throw StructuralError("gauge-fixed coordinate " + std::string(1, "xyz"[axis]) + " of " + station_name(j) +
                              " must be 0");
      }
    }
    values[static_cast<size_t>(layout.dead_zone(j))] = estimate.dead_zones[static_cast<size_t>(j)];
  }
  for (int i = 0; i < pts; ++i) {
    for (int axis = 0; axis < 3; ++axis) {
      values[static_cast<size_t>(layout.point_coordinate(i, axis))] =
          estimate.points[static_cast<size_t>(i)][static_cast<size_t>(axis)];
    }
  }
  return ParameterVector(layout, std::move(values));
}

NetworkEstimate unpack(const ParameterVector& params, const NetworkConfig& config) {
  const ParameterLayout& layout = params.layout();
  if (layout.stations() != config.station_count() || layout.points() != config.point_count()) {
    throw StructuralError("parameter layout does not match the network configuration");
  }
  NetworkEstimate e;
  for (int j = 0; j < layout.stations(); ++j) {
    e.stations.push_back({params.station_coordinate(j, 0), params.station_coordinate(j, 1),
                          params.station_coordinate(j, 2)});
    e.dead_zones.push_back(params.dead_zone(j));
  }
  for (int i = 0; i < layout.points(); ++i) {
    e.points.push_back({params.point_coordinate(i, 0), params.point_coordinate(i, 1), params.point_coordinate(i, 2)});
  }
  return e;
}

void validate_observations(const ParameterLayout& layout, std::span<const Observation> observations) {
  std::set<std::pair<int, int>> seen;
  for (const auto& o : observations) {
    if (o.station_id < 1 || o.station_id > layout.stations()) {
      throw LookupError("observation refers to unknown station " + std::to_string(o.station_id));
    }
    if (o.point_id < 1 || o.point_id > layout.points()) {
      throw LookupError("observation refers to unknown point " + std::to_string(o.point_id));
    }
    if (!seen.emplace(o.station_id, o.point_id).second) {
      throw StructuralError("duplicate observation for station " + std::to_string(o.station_id) + " / point " +
                            std::to_string(o.point_id));
    }
    if (o.length.negative()) throw ConfigError("observation length must be non-negative");
  }
}

// ---------------------------------------------------------------- residuals

namespace {

struct Geometry {
  int station;
  int point;
  std::array<mp::Value, 3> delta;  // M - P
  mp::Value norm;
};

Geometry evaluate(const ParameterVector& params, const Observation& obs, const mp::Context& ctx) {
  const ParameterLayout& layout = params.layout();
  if (obs.station_id < 1 || obs.station_id > layout.stations()) {
    throw LookupError("unknown station id " + std::to_string(obs.station_id));
  }
  if (obs.point_id < 1 || obs.point_id > layout.points()) {
    throw LookupError("unknown point id " + std::to_string(obs.point_id));
  }
  Geometry g{obs.station_id - 1, obs.point_id - 1, {}, {}};
  mp::Value sum;
  for (int axis = 0; axis < 3; ++axis) {
    mp::Value d = ctx.sub(params.point_coordinate(g.point, axis), params.station_coordinate(g.station, axis));
    sum = ctx.add(sum, ctx.mul(d, d));
    g.delta[static_cast<size_t>(axis)] = std::move(d);
  }
  g.norm = ctx.sqrt(sum);
  return g;
}

mp::Value residual_from(const Geometry& g, const ParameterVector& params, const Observation& obs,
                        const mp::Context& ctx) {
  return ctx.sub(ctx.sub(g.norm, params.dead_zone(g.station)), obs.length);
}

}  // namespace

mp::Value residual(const ParameterVector& params, const Observation& obs, const mp::Context& ctx) {
  const Geometry g = evaluate(params, obs, ctx);
  return residual_from(g, params, obs, ctx);
}

LinearizedObservation linearize(const ParameterVector& params, const Observation& obs, const mp::Context& ctx) {
  const Geometry g = evaluate(params, obs, ctx);
  if (g.norm.is_zero()) {
    throw GeometryError("point M" + std::to_string(obs.point_id) + " coincides with station P" +
                        std::to_string(obs.station_id));
  }
  const ParameterLayout& layout = params.layout();
  LinearizedObservation lin;
  lin.residual = residual_from(g, params, obs, ctx);
  for (int axis = 0; axis < 3; ++axis) {
    const mp::Value u = ctx.div(g.delta[static_cast<size_t>(axis)], g.norm);
    lin.index[static_cast<size_t>(lin.count)] = layout.point_coordinate(g.point, axis);
    lin.partial[static_cast<size_t>(lin.count)] = u;
    ++lin.count;
    if (const auto slot = layout.station_coordinate(g.station, axis)) {
      lin.index[static_cast<size_t>(lin.count)] = *slot;
      lin.partial[static_cast<size_t>(lin.count)] = -u;
      ++lin.count;
    }
  }
  lin.index[static_cast<size_t>(lin.count)] = layout.dead_zone(g.station);
  lin.partial[static_cast<size_t>(lin.count)] = mp::Value::from_integer(-1);
  ++lin.count;
  return lin;
}

std::vector<mp::Value> jacobian_row(const ParameterVector& params, const Observation& obs, const mp::Context& ctx) {
  const LinearizedObservation lin = linearize(params, obs, ctx);
  std::vector<mp::Value> row(static_cast<size_t>(params.size()));
  for (int k = 0; k < lin.count; ++k) {
    row[static_cast<size_t>(lin.index[static_cast<size_t>(k)])] = lin.partial[static_cast<size_t>(k)];
  }
  return row;
}

mp::Value distance(const Vec3& a, const Vec3& b, const mp::Context& ctx) {
  mp::Value sum;
  for (size_t axis = 0; axis < 3; ++axis) {
    const mp::Value d = ctx.sub(a[axis], b[axis]);
    sum = ctx.add(sum, ctx.mul(d, d));
  }
  return ctx.sqrt(sum);
}

}  // namespace mlat
