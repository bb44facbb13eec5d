#pragma once

#include "mlat/edlen.hpp"
#include "mlat/model.hpp"
#include "mlat/precision.hpp"

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string_view>

namespace mlat {

using Vec3d = std::array<double, 3>;

/// Seeded stream of 64-bit words from std::mt19937_64, whose output sequence is
/// fixed by the C++ standard. Conversion to doubles is done here (53-bit
/// mantissa fill) rather than through <random> distributions, whose output is
/// implementation-defined, so sequences match across platforms.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent stream for a task: the root seed mixed with a path of task
  /// indices through splitmix64.
  static RngStream derive(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_seed(root, path));
  }
  static std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

  std::uint64_t seed() const { return seed_; }
  std::string_view algorithm() const { return kAlgorithm; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Root of the sum of squares. Throws DomainError on an empty list or a
/// negative component.
double combine_rss(std::span<const double> components);
double combine_rss(std::initializer_list<double> components);

/// Uniform on [lo, hi]. Throws DomainError when lo > hi.
double sample_uniform(double lo, double hi, RngStream& rng);

/// Uniform in the closed ball of the given radius about the origin, by
/// rejection from the enclosing cube. A candidate is kept only if its own
/// squared norm does not exceed radius², so the support holds exactly in
/// double arithmetic. Throws DomainError on a negative radius.
Vec3d sample_ball_offset(double radius, RngStream& rng);
Vec3d sample_in_sphere(const Vec3d& center, double radius, RngStream& rng);

struct UncertaintyBudget {
  double delta1_um = 8.0;          // SMR positioning on its support
  double delta2_um = 2.7;          // optical aberration / coaxiality at the assumed misalignment
  double misalignment_deg = 2.5;   // beam-to-SMR misalignment behind delta2
  std::optional<double> smr_position_override_um;
  edlen::AirConditions nominal_air{};
  edlen::SensorBudget sensors = edlen::SensorBudget::datasheet();
  std::optional<double> edlen_override_um_per_m;
  double setup_radius_mm = 1.0;    // U_l

  /// U_RP: RSS of delta1 and delta2 unless overridden, μm.
  double smr_position_um() const;
  /// U_Edlen from the sensor budget at the nominal air conditions unless overridden, μm/m.
  double edlen_um_per_m() const;

  void validate() const;

  /// Every contribution zero, including the setup radius.
  static UncertaintyBudget zero();
};

/// Mean of `repeats` simulated interferometer readings of point M from
/// station P: per repeat the SMR centre is drawn uniformly in the U_RP ball
/// around M, the distance to P is scaled by (1 + e·1e-6) with e uniform in
/// ±U_Edlen μm/m, and the dead zone is subtracted. Arithmetic runs in ctx.
/// Throws GeometryError if a reading is not positive.
mp::Value simulate_length(const TargetPoint& point, const Station& station, const UncertaintyBudget& budget,
                          int repeats, RngStream& rng, const mp::Context& ctx);

/// Setup values for the solver: every point and every free station coordinate
/// is displaced by one draw in the U_l ball (fixed station coordinates stay 0),
/// every dead zone by a uniform draw in ±U_l. Arithmetic runs in ctx.
ParameterVector randomize_setup(const NetworkConfig& config, double setup_radius_mm, RngStream& rng,
                                const mp::Context& ctx);

}  // namespace mlat
