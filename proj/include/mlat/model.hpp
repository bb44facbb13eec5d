#pragma once

// Multilateration network, gauge-fixed parameterization and observation model.
//
// A tracking interferometer at station P_j reads L = |M_i - P_j| - Dz_j, where
// Dz_j is that station's dead zone. Unknowns are every dead zone, every target
// point and the free station coordinates left after fixing the frame:
//   P1 = (0, 0, 0), P2 = (x2, 0, 0), P3 = (x3, y3, 0), P4.. fully free.
// All lengths are metres.

#include "mlat/precision.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlat {

using Vec3 = std::array<mp::Value, 3>;

struct Station {
  int id = 0;  // 1-based
  Vec3 position;
  mp::Value dead_zone;
};

struct TargetPoint {
  int id = 0;  // 1-based
  Vec3 position;
};

struct NetworkConfig {
  std::string name;
  std::vector<Station> stations;
  std::vector<TargetPoint> points;
  std::array<double, 3> workspace_m{};  // informational

  int station_count() const { return static_cast<int>(stations.size()); }
  int point_count() const { return static_cast<int>(points.size()); }

  /// Throws ConfigError unless ids are 1..n in order, POS >= 3, PTS >= 1,
  /// dead zones are non-negative and stations 1-3 already satisfy the gauge.
  void validate_structure() const;
  /// validate_structure() plus dof >= 0.
  void validate() const;
};

struct Observation {
  int station_id = 0;
  int point_id = 0;
  mp::Value length;
};

int count_unknowns(int stations, int points);
int count_equations(int stations, int points);
/// Throws ConfigError (underdetermined) when negative.
int degrees_of_freedom(int stations, int points);

/// Index map of the flat unknown vector: per station its free coordinates then
/// its dead zone, then three coordinates per point.
class ParameterLayout {
 public:
  ParameterLayout(int stations, int points);

  int stations() const { return stations_; }
  int points() const { return points_; }
  int size() const { return size_; }

  /// Free coordinates of station `index` (0-based): 0, 1, 2, then 3.
  static int free_axes(int index) { return index < 3 ? index : 3; }

  /// Slot of a station coordinate, or nullopt when the gauge fixes it to 0.
  std::optional<int> station_coordinate(int index, int axis) const;
  int dead_zone(int index) const;
  int point_coordinate(int index, int axis) const;

  friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;

 private:
  int station_offset(int index) const;

  int stations_;
  int points_;
  int size_;
};

class ParameterVector {
 public:
  ParameterVector(ParameterLayout layout, std::vector<mp::Value> values);

  const ParameterLayout& layout() const { return layout_; }
  int size() const { return layout_.size(); }
  std::span<const mp::Value> values() const { return values_; }
  const mp::Value& operator[](int i) const { return values_[static_cast<size_t>(i)]; }
  mp::Value& operator[](int i) { return values_[static_cast<size_t>(i)]; }

  mp::Value station_coordinate(int index, int axis) const;
  const mp::Value& dead_zone(int index) const { return (*this)[layout_.dead_zone(index)]; }
  const mp::Value& point_coordinate(int index, int axis) const {
    return (*this)[layout_.point_coordinate(index, axis)];
  }

  /// Every entry rounded into ctx.
  ParameterVector rounded(const mp::Context& ctx) const;

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  ParameterLayout layout_;
  std::vector<mp::Value> values_;
};

/// Station positions, dead zones and point positions in unpacked form.
struct NetworkEstimate {
  std::vector<Vec3> stations;
  std::vector<mp::Value> dead_zones;
  std::vector<Vec3> points;

  friend bool operator==(const NetworkEstimate&, const NetworkEstimate&) = default;
};

NetworkEstimate nominal_estimate(const NetworkConfig& config);

/// Throws StructuralError on dimension mismatch or when a gauge-fixed
/// coordinate is non-zero.
ParameterVector pack(const NetworkConfig& config, const NetworkEstimate& estimate);
NetworkEstimate unpack(const ParameterVector& params, const NetworkConfig& config);

/// Throws LookupError / StructuralError / ConfigError for unknown ids,
/// duplicate (station, point) pairs or negative lengths.
void validate_observations(const ParameterLayout& layout, std::span<const Observation> observations);

/// r = |M_i - P_j| - Dz_j - L, every operation rounded in ctx.
mp::Value residual(const ParameterVector& params, const Observation& obs, const mp::Context& ctx);

/// Dense row of partial derivatives of residual() with respect to params.
/// Throws GeometryError when point and station coincide.
std::vector<mp::Value> jacobian_row(const ParameterVector& params, const Observation& obs, const mp::Context& ctx);

/// Residual plus the (at most seven) non-zero partials of one observation.
struct LinearizedObservation {
  mp::Value residual;
  std::array<int, 7> index{};
  std::array<mp::Value, 7> partial;
  int count = 0;
};

LinearizedObservation linearize(const ParameterVector& params, const Observation& obs, const mp::Context& ctx);

/// |a - b| in ctx.
mp::Value distance(const Vec3& a, const Vec3& b, const mp::Context& ctx);

}  // namespace mlat
