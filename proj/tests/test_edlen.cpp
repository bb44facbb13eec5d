#include "mlat/edlen.hpp"
#include "mlat/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace mlat;
using namespace mlat::edlen;

namespace {

// Modified Edlén equations (Bönsch & Potulski 1998), evaluated step by step
// in long double: standard dry air, then temperature and pressure, then the
// water vapour term, with Davis' saturation pressure.
long double oracle_refractivity(long double t, long double p, long double rh, long double lambda_um) {
  const long double s2 = 1.0L / (lambda_um * lambda_um);
  const long double ns = (8091.37L + 2333983.0L / (130.0L - s2) + 15518.0L / (38.9L - s2)) * 1e-8L;
  const long double x = (1.0L + 1e-8L * (0.5953L - 0.009876L * t) * p) / (1.0L + 0.0036610L * t);
  const long double ntp = ns * p * x / 93214.60L;
  const long double T = t + 273.15L;
  const long double es = std::exp(1.2378847e-5L * T * T - 1.9121316e-2L * T + 33.93711047L - 6.3431645e3L / T);
  const long double f = rh / 100.0L * es;
  return ntp - f * (3.8020L - 0.0384L * s2) * 1e-10L;
}

AirConditions air(double t, double p, double rh) { return AirConditions{t, p, rh}; }

}  // namespace

TEST_CASE("refractive index matches the oracle") {
  for (const double t : {0.0, 10.0, 20.0, 26.5, 40.0}) {
    for (const double p : {60000.0, 90000.0, 101325.0, 120000.0}) {
      for (const double rh : {0.0, 35.0, 100.0}) {
        for (const double lambda : {0.532, kDefaultVacuumWavelengthUm, 1.064}) {
          const double ours = refractivity(air(t, p, rh), lambda);
          const long double ref = oracle_refractivity(t, p, rh, lambda);
          CHECK(std::abs(static_cast<long double>(ours) - ref) <= 1e-15L);
        }
      }
    }
  }
}

TEST_CASE("dry reference air value") {
  const double n = refractive_index(air(20.0, 101325.0, 0.0));
  CHECK(std::abs(n - 1.000271) <= 2e-6);
  CHECK(n > 1.0);
}

TEST_CASE("saturation vapour pressure near table values") {
  CHECK(std::abs(saturation_vapour_pressure(20.0) - 2339.0) <= 2.0);
  CHECK(std::abs(saturation_vapour_pressure(0.0) - 611.2) <= 1.0);
  CHECK(saturation_vapour_pressure(30.0) > saturation_vapour_pressure(25.0));
}

TEST_CASE("index is monotone in temperature, pressure and humidity") {
  CHECK(refractive_index(air(20, 101325, 50)) > refractive_index(air(25, 101325, 50)));
  CHECK(refractive_index(air(20, 90000, 50)) < refractive_index(air(20, 101325, 50)));
  CHECK(refractive_index(air(20, 101325, 80)) < refractive_index(air(20, 101325, 20)));
}

TEST_CASE("out-of-range conditions name the field") {
  CHECK_THROWS_WITH_AS(refractive_index(air(20, 200000, 50)), doctest::Contains("pressure"), DomainError);
  CHECK_THROWS_WITH_AS(refractive_index(air(-5, 101325, 50)), doctest::Contains("temperature"), DomainError);
  CHECK_THROWS_WITH_AS(refractive_index(air(20, 101325, 120)), doctest::Contains("humidity"), DomainError);
  SensorBudget b;
  b.pressure_pa = -1;
  CHECK_THROWS_WITH_AS(length_uncertainty_per_meter(AirConditions{}, b), doctest::Contains("pressure"), DomainError);
  CHECK_THROWS_AS(length_uncertainty_per_meter(air(20, 119950, 50), SensorBudget{}), DomainError);
}

TEST_CASE("zero budget gives zero uncertainty") {
  const SensorBudget zero{0.0, 0.0, 0.0, kDefaultVacuumWavelengthUm};
  CHECK(length_uncertainty_per_meter(AirConditions{}, zero) == 0.0);
}

TEST_CASE("sensor budget presets") {
  CHECK(SensorBudget::datasheet().temperature_c == 0.2);
  CHECK(SensorBudget::budget_table().temperature_c == 0.169);
  CHECK(SensorBudget::datasheet().humidity_pct == 0.8);
  CHECK(SensorBudget::datasheet().pressure_pa == 150.0);
  for (const SensorBudget& b : {SensorBudget::datasheet(), SensorBudget::budget_table()}) {
    const double u = length_uncertainty_per_meter(AirConditions{}, b);
    CHECK(u >= 0.3);
    CHECK(u <= 1.0);
  }
  CHECK(length_uncertainty_per_meter(AirConditions{}, SensorBudget::budget_table()) <
        length_uncertainty_per_meter(AirConditions{}, SensorBudget::datasheet()));
}

TEST_CASE("per-sensor contributions follow the index sensitivities") {
  // Oracle: central-difference sensitivities of the oracle index times the
  // sensor half-ranges.
  const long double h = 1e-3L;
  const long double dn_dt = (oracle_refractivity(20 + h, 101325, 50, kDefaultVacuumWavelengthUm) -
                             oracle_refractivity(20 - h, 101325, 50, kDefaultVacuumWavelengthUm)) /
                            (2 * h);
  const long double dn_dp = (oracle_refractivity(20, 101325 + 1, 50, kDefaultVacuumWavelengthUm) -
                             oracle_refractivity(20, 101325 - 1, 50, kDefaultVacuumWavelengthUm)) /
                            2.0L;
  const long double dn_df = (oracle_refractivity(20, 101325, 51, kDefaultVacuumWavelengthUm) -
                             oracle_refractivity(20, 101325, 49, kDefaultVacuumWavelengthUm)) /
                            2.0L;
  const BudgetBreakdown b = budget_breakdown(AirConditions{}, SensorBudget::datasheet());
  CHECK(b.temperature_um_per_m == doctest::Approx(static_cast<double>(std::abs(dn_dt) * 0.2L * 1e6L)).epsilon(1e-3));
  CHECK(b.pressure_um_per_m == doctest::Approx(static_cast<double>(std::abs(dn_dp) * 150.0L * 1e6L)).epsilon(1e-3));
  CHECK(b.humidity_um_per_m == doctest::Approx(static_cast<double>(std::abs(dn_df) * 0.8L * 1e6L)).epsilon(1e-3));
  CHECK(b.refractive_index == refractive_index(AirConditions{}));

  // Temperature and pressure pull the index in opposite directions, so the
  // worst corner adds their magnitudes.
  const double linear = b.temperature_um_per_m + b.pressure_um_per_m + b.humidity_um_per_m;
  CHECK(b.combined_um_per_m == doctest::Approx(linear).epsilon(1e-3));
  CHECK(b.combined_um_per_m >= std::max({b.temperature_um_per_m, b.pressure_um_per_m, b.humidity_um_per_m}));
}

TEST_CASE("humidity corners stay physical") {
  CHECK_NOTHROW(length_uncertainty_per_meter(air(20, 101325, 0), SensorBudget{}));
  CHECK_NOTHROW(length_uncertainty_per_meter(air(20, 101325, 100), SensorBudget{}));
}
