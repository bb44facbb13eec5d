#include "mlat/metrology.hpp"

#include "mlat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RngStream::derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(root);
  for (const std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p));
  return h;
}

double combine_rss(std::span<const double> components) {
  if (components.empty()) throw DomainError("combine_rss: no components");
  double sum = 0.0;
  for (const double c : components) {
    if (!(c >= 0.0)) throw DomainError("combine_rss: components must be non-negative");
    sum += c * c;
  }
  return std::sqrt(sum);
}

double combine_rss(std::initializer_list<double> components) {
  return combine_rss(std::span<const double>(components.begin(), components.size()));
}

double sample_uniform(double lo, double hi, RngStream& rng) {
  if (!(lo <= hi)) throw DomainError("sample_uniform: lower bound exceeds upper bound");
  if (lo == hi) return lo;
  return std::clamp(lo + (hi - lo) * rng.next_unit(), lo, hi);
}

Vec3d sample_ball_offset(double radius, RngStream& rng) {
  if (!(radius >= 0.0)) throw DomainError("sample_in_sphere: radius must be non-negative");
  const double r2 = radius * radius;
  for (;;) {
    Vec3d v;
    for (double& c : v) c = radius * (2.0 * rng.next_unit() - 1.0);
    if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= r2) return v;
  }
}

Vec3d sample_in_sphere(const Vec3d& center, double radius, RngStream& rng) {
  const Vec3d off = sample_ball_offset(radius, rng);
  return {center[0] + off[0], center[1] + off[1], center[2] + off[2]};
}

// ---------------------------------------------------------------- budget

double UncertaintyBudget::smr_position_um() const {
  if (smr_position_override_um) return *smr_position_override_um;
  return combine_rss({delta1_um, delta2_um});
}

double UncertaintyBudget::edlen_um_per_m() const {
  if (edlen_override_um_per_m) return *edlen_override_um_per_m;
  return edlen::length_uncertainty_per_meter(nominal_air, sensors);
}

void UncertaintyBudget::validate() const {
  auto non_negative = [](const char* name, double v) {
    if (!(v >= 0.0)) throw ConfigError(std::string("uncertainty budget: ") + name + " must be >= 0");
  };
  non_negative("delta1", delta1_um);
  non_negative("delta2", delta2_um);
  non_negative("misalignment", misalignment_deg);
  non_negative("setup radius", setup_radius_mm);
  if (smr_position_override_um) non_negative("U_RP", *smr_position_override_um);
  if (edlen_override_um_per_m) non_negative("U_Edlen", *edlen_override_um_per_m);
  if (!edlen_override_um_per_m) {
    nominal_air.validate();
    sensors.validate();
  }
}

UncertaintyBudget UncertaintyBudget::zero() {
  UncertaintyBudget b;
  b.delta1_um = 0.0;
  b.delta2_um = 0.0;
  b.misalignment_deg = 0.0;
  b.sensors.temperature_c = 0.0;
  b.sensors.humidity_pct = 0.0;
  b.sensors.pressure_pa = 0.0;
  b.setup_radius_mm = 0.0;
  return b;
}

// ---------------------------------------------------------------- simulation

mp::Value simulate_length(const TargetPoint& point, const Station& station, const UncertaintyBudget& budget,
                          int repeats, RngStream& rng, const mp::Context& ctx) {
  if (repeats < 1) throw ConfigError("simulate_length: repeats must be >= 1");
  const double smr_radius_m = budget.smr_position_um() * 1e-6;
  const double edlen_um_per_m = budget.edlen_um_per_m();
  const mp::Value one = mp::Value::from_integer(1);

  // Mean as first reading plus the average offset from it: identical readings
  // give that reading back exactly.
  mp::Value first;
  mp::Value offset_sum;
  for (int k = 0; k < repeats; ++k) {
    const Vec3d off = sample_ball_offset(smr_radius_m, rng);
    Vec3 smr;
    for (size_t axis = 0; axis < 3; ++axis) smr[axis] = ctx.add(point.position[axis], mp::Value::from_double(off[axis]));
    const mp::Value d = distance(smr, station.position, ctx);

    const double e = sample_uniform(-edlen_um_per_m, edlen_um_per_m, rng);
    const mp::Value scale = ctx.add(one, mp::Value::from_double(e).scaled(-6));
    const mp::Value reading = ctx.sub(ctx.mul(d, scale), station.dead_zone);
    if (reading.negative() || reading.is_zero()) {
      throw GeometryError("simulated length from P" + std::to_string(station.id) + " to M" + std::to_string(point.id) +
                          " is not positive (dead zone exceeds distance)");
    }
    if (k == 0) {
      first = reading;
    } else {
      offset_sum = ctx.add(offset_sum, ctx.sub(reading, first));
    }
  }
  return ctx.add(first, ctx.div(offset_sum, mp::Value::from_integer(repeats)));
}

ParameterVector randomize_setup(const NetworkConfig& config, double setup_radius_mm, RngStream& rng,
                                const mp::Context& ctx) {
  if (!(setup_radius_mm >= 0.0)) throw DomainError("randomize_setup: U_l must be non-negative");
  const double radius_m = setup_radius_mm * 1e-3;
  NetworkEstimate e = nominal_estimate(config);
  for (size_t j = 0; j < e.stations.size(); ++j) {
    const Vec3d off = sample_ball_offset(radius_m, rng);
    const int free = ParameterLayout::free_axes(static_cast<int>(j));
    for (int axis = 0; axis < free; ++axis) {
      auto& c = e.stations[j][static_cast<size_t>(axis)];
      c = ctx.add(c, mp::Value::from_double(off[static_cast<size_t>(axis)]));
    }
    e.dead_zones[j] = ctx.add(e.dead_zones[j], mp::Value::from_double(sample_uniform(-radius_m, radius_m, rng)));
  }
  for (auto& p : e.points) {
    const Vec3d off = sample_ball_offset(radius_m, rng);
    for (size_t axis = 0; axis < 3; ++axis) p[axis] = ctx.add(p[axis], mp::Value::from_double(off[axis]));
  }
  return pack(config, e);
}

}  // namespace mlat
