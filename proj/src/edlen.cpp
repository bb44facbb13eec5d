#include "mlat/edlen.hpp"

#include "mlat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace mlat::edlen {

namespace {

constexpr double kMinTemperature = 0.0;
constexpr double kMaxTemperature = 40.0;
constexpr double kMinPressure = 6.0e4;
constexpr double kMaxPressure = 1.2e5;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void check_range(const char* field, double value, double lo, double hi, const char* unit) {
  if (!(value >= lo && value <= hi)) {
    throw DomainError(std::string(field) + " " + num(value) + " " + unit + " outside [" + num(lo) + ", " + num(hi) +
                      "] " + unit);
  }
}

void check_non_negative(const char* field, double value) {
  if (!(value >= 0.0)) throw DomainError(std::string(field) + " uncertainty must be >= 0");
}

}  // namespace

void AirConditions::validate() const {
  check_range("temperature", temperature_c, kMinTemperature, kMaxTemperature, "degC");
  check_range("pressure", pressure_pa, kMinPressure, kMaxPressure, "Pa");
  check_range("humidity", humidity_pct, 0.0, 100.0, "%RH");
}

void SensorBudget::validate() const {
  check_non_negative("temperature", temperature_c);
  check_non_negative("humidity", humidity_pct);
  check_non_negative("pressure", pressure_pa);
  if (!(lambda_vacuum_um > 0.2 && lambda_vacuum_um < 2.0)) {
    throw DomainError("vacuum wavelength " + num(lambda_vacuum_um) + " um outside the formula's range");
  }
}

SensorBudget SensorBudget::datasheet() { return SensorBudget{0.2, 0.8, 150.0, kDefaultVacuumWavelengthUm}; }

SensorBudget SensorBudget::budget_table() { return SensorBudget{0.169, 0.8, 150.0, kDefaultVacuumWavelengthUm}; }

double saturation_vapour_pressure(double temperature_c) {
  const double t = temperature_c + 273.15;
  return std::exp(1.2378847e-5 * t * t - 1.9121316e-2 * t + 33.93711047 - 6.3431645e3 / t);
}

double refractivity(const AirConditions& cond, double lambda_vacuum_um) {
  cond.validate();
  const double sigma2 = 1.0 / (lambda_vacuum_um * lambda_vacuum_um);  // μm^-2

  // Dry air at 15 °C, 100 kPa and the formula's reference 400 ppm CO2, so the
  // CO2 correction factor is 1.
  const double n_standard = 1e-8 * (8091.37 + 2333983.0 / (130.0 - sigma2) + 15518.0 / (38.9 - sigma2));

  const double t = cond.temperature_c;
  const double p = cond.pressure_pa;
  const double n_tp = p * n_standard / 93214.60 * (1.0 + 1e-8 * (0.5953 - 0.009876 * t) * p) / (1.0 + 0.0036610 * t);

  const double vapour_pa = cond.humidity_pct / 100.0 * saturation_vapour_pressure(t);
  return n_tp - vapour_pa * (3.8020 - 0.0384 * sigma2) * 1e-10;
}

double refractive_index(const AirConditions& cond, double lambda_vacuum_um) {
  return 1.0 + refractivity(cond, lambda_vacuum_um);
}

namespace {

double max_deviation(const AirConditions& nominal, const SensorBudget& budget, bool vary_t, bool vary_f,
                     bool vary_p) {
  nominal.validate();
  budget.validate();
  const double n0 = refractivity(nominal, budget.lambda_vacuum_um);
  double worst = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    AirConditions c = nominal;
    const double st = (corner & 1) ? 1.0 : -1.0;
    const double sf = (corner & 2) ? 1.0 : -1.0;
    const double sp = (corner & 4) ? 1.0 : -1.0;
    if (vary_t) c.temperature_c += st * budget.temperature_c;
    if (vary_f) c.humidity_pct = std::clamp(c.humidity_pct + sf * budget.humidity_pct, 0.0, 100.0);
    if (vary_p) c.pressure_pa += sp * budget.pressure_pa;
    worst = std::max(worst, std::abs(refractivity(c, budget.lambda_vacuum_um) - n0));
  }
  return worst * 1e6;
}

}  // namespace

double length_uncertainty_per_meter(const AirConditions& nominal, const SensorBudget& budget) {
  return max_deviation(nominal, budget, true, true, true);
}

BudgetBreakdown budget_breakdown(const AirConditions& nominal, const SensorBudget& budget) {
  BudgetBreakdown b;
  b.refractive_index = refractive_index(nominal, budget.lambda_vacuum_um);
  b.temperature_um_per_m = max_deviation(nominal, budget, true, false, false);
  b.humidity_um_per_m = max_deviation(nominal, budget, false, true, false);
  b.pressure_um_per_m = max_deviation(nominal, budget, false, false, true);
  b.combined_um_per_m = length_uncertainty_per_meter(nominal, budget);
  return b;
}

}  // namespace mlat::edlen
