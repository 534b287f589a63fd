#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "basislab/data.hpp"
#include "basislab/geo.hpp"

namespace basislab::sim {

struct RegionBox {
  double lat_lo = 40.0, lat_hi = 46.0;
  double lon_lo = -98.0, lon_hi = -88.0;
};

struct NewPlantSpec {
  geo::GeoPoint location;
  YearMonth start_month;
  double post_effect = 0.0;  // tau, cents/bushel, applies within 100 mi from
                             // the first day of start_month onward
};

// Data-generating process with closed-form band effects. Band effects must be
// nonincreasing with distance and are zero beyond 100 miles.
struct SyntheticScenario {
  uint64_t seed = 42;
  RegionBox box;
  int n_plants = 3;
  int n_elevators = 200;
  double base_basis = -50.0;        // cents/bushel
  double seasonal_amplitude = 0.0;  // cents/bushel, sinusoid peaking mid-summer
  double noise_sd = 0.0;            // cents/bushel
  double ar1_rho = 0.0;             // temporal noise correlation, [0,1)
  double missing_rate = 0.0;        // fraction of dropped daily quotes, [0,1)
  std::array<double, 5> band_effects{};  // indexed by geo::Band order
  std::optional<NewPlantSpec> new_plant;
  Date start_date = Date(2017, 1, 1);
  Date end_date = Date(2024, 9, 30);
};

void validate(const SyntheticScenario& scenario);

struct Layout {
  std::vector<geo::Plant> plants;  // existing plants, plus the new plant last
  std::vector<geo::Elevator> elevators;
};

struct SyntheticData {
  data::PricePanel cash;
  std::vector<data::FuturesQuote> futures;
};

struct OracleReport {
  std::array<double, 5> band_effects{};
  std::optional<double> new_plant_att;
};

// Seeded uniform placement inside the box; identical scenario gives
// bit-identical output.
Layout generate_layout(const SyntheticScenario& scenario);

// cash(e,d) = active futures(d) + base + seasonal(d) + effect(distance to
// nearest existing plant) [+ tau in the new plant's post period] + noise.
// Futures are a seeded random walk quoted on two contracts with alternating
// volume leadership.
SyntheticData generate_basis_panel(const SyntheticScenario& scenario, const Layout& layout);

// True effect for a band, straight from the scenario. Exact, never estimated.
double oracle_att(const SyntheticScenario& scenario, geo::Band band);
OracleReport oracle_report(const SyntheticScenario& scenario);

double seasonal_term(const SyntheticScenario& scenario, Date d);

// Flat key=value config file; unknown keys are rejected.
SyntheticScenario load_scenario(const std::filesystem::path& path);
std::string scenario_text(const SyntheticScenario& scenario);

}  // namespace basislab::sim
