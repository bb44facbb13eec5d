#pragma once

// Refractive index of air by the modified Edlén equations of Bönsch and
// Potulski (Metrologia 35, 1998) and the interferometric length uncertainty
// produced by environment-sensor uncertainties.

namespace mlat::edlen {

inline constexpr double kDefaultVacuumWavelengthUm = 0.632991368;

struct AirConditions {
  double temperature_c = 20.0;
  double pressure_pa = 101325.0;
  double humidity_pct = 50.0;  // relative humidity

  /// Throws DomainError naming the field outside
  /// temperature [0, 40] °C, pressure [6e4, 1.2e5] Pa, humidity [0, 100] %.
  void validate() const;
};

struct SensorBudget {
  double temperature_c = 0.2;  // ± U_t
  double humidity_pct = 0.8;   // ± U_f
  double pressure_pa = 150.0;  // ± U_p
  double lambda_vacuum_um = kDefaultVacuumWavelengthUm;

  void validate() const;

  /// Sensor uncertainties as quoted for commercial sensors (U_t = 0.2 °C).
  static SensorBudget datasheet();
  /// Same sensors with the temperature entry of the budget table (U_t = 0.169 °C).
  static SensorBudget budget_table();
};

/// Saturation pressure of water vapour over water, Pa (Davis 1992 / CIPM-2007 form).
double saturation_vapour_pressure(double temperature_c);

/// n - 1 for moist air at 400 ppm CO2. Evaluating the refractivity directly
/// keeps the ~1e-9 differences used by the budget free of cancellation.
double refractivity(const AirConditions& cond, double lambda_vacuum_um = kDefaultVacuumWavelengthUm);

double refractive_index(const AirConditions& cond, double lambda_vacuum_um = kDefaultVacuumWavelengthUm);

/// Half-range of the index over the 8 corners (±U_t, ±U_f, ±U_p) around the
/// nominal conditions: max |n_corner - n_nominal| * 1e6, in μm/m. Humidity
/// corners are clamped to [0, 100] %RH.
double length_uncertainty_per_meter(const AirConditions& nominal, const SensorBudget& budget);

struct BudgetBreakdown {
  double refractive_index = 0.0;
  double temperature_um_per_m = 0.0;  // each sensor varied alone
  double humidity_um_per_m = 0.0;
  double pressure_um_per_m = 0.0;
  double combined_um_per_m = 0.0;  // corner sweep
};

BudgetBreakdown budget_breakdown(const AirConditions& nominal, const SensorBudget& budget);

}  // namespace mlat::edlen
