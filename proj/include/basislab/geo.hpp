#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "basislab/dates.hpp"

namespace basislab::geo {

// Statute miles; fixes the metric for all proximity rules.
inline constexpr double kEarthRadiusMiles = 3958.8;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

// Throws ValidationError when coordinates are out of range.
void validate(const GeoPoint& p);

// Great-circle distance in statute miles. Symmetric, nonnegative.
double haversine_miles(const GeoPoint& a, const GeoPoint& b);

enum class PlantStatus { Existing, New };

struct Plant {
  std::string id;
  GeoPoint location;
  std::string state;  // two-letter region code; may be empty until resolved
  double capacity_kbu_day = 0.0;
  PlantStatus status = PlantStatus::Existing;
  std::optional<YearMonth> start_month;  // present exactly when status == New
};

struct Elevator {
  std::string id;
  GeoPoint location;
  std::string state;
};

// Treatment distance bands, half-open intervals in statute miles.
enum class Band { B0_20, B20_40, B40_60, B60_80, B80_100 };

inline constexpr std::array<Band, 5> kAllBands = {Band::B0_20, Band::B20_40, Band::B40_60,
                                                  Band::B60_80, Band::B80_100};

// [lo, hi) interval of a band.
std::pair<double, double> band_interval(Band b);
const char* band_label(Band b);
Band band_from_label(const std::string& label);
// Band containing `distance_mi`, or nullopt when >= 100 mi.
std::optional<Band> band_of_distance(double distance_mi);

// Control group spans [100, 300) mi from the nearest plant; beyond that the
// elevator is excluded.
inline constexpr double kControlMinMiles = 100.0;
inline constexpr double kControlMaxMiles = 300.0;

enum class Role { Treated, Control, Excluded };

struct BandAssignment {
  std::string elevator_id;
  Role role = Role::Excluded;
  std::optional<Band> band;  // set iff role == Treated
  std::string plant_id;      // nearest anchor plant
  double distance_mi = 0.0;  // distance to the anchor
};

// Assigns every elevator to exactly one role by distance to its nearest
// anchor plant (ties broken by lexicographic plant id). `anchor_filter`
// selects which plants act as anchors; empty filter means all plants.
// Throws ValidationError when no plant passes the filter.
std::vector<BandAssignment> assign_bands(
    const std::vector<Elevator>& elevators, const std::vector<Plant>& plants,
    const std::function<bool(const Plant&)>& anchor_filter = {});

// Control pool for a new plant's DiD: elevators within `band` of any existing
// plant in the new plant's state, minus elevators within 100 mi of the new
// plant. Throws ValidationError when the state has no existing plant.
std::vector<Elevator> control_for_new_plant(const Plant& new_plant,
                                            const std::vector<Plant>& existing_plants,
                                            const std::vector<Elevator>& elevators, Band band);

}  // namespace basislab::geo
