#include "basislab/geo.hpp"

#include <algorithm>
#include <cmath>

#include "basislab/errors.hpp"

namespace basislab::geo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_radians(double deg) { return deg * kPi / 180.0; }

}  // namespace

void validate(const GeoPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
    throw ValidationError("latitude out of range [-90,90]: " + std::to_string(p.lat));
  }
  if (!(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw ValidationError("longitude out of range [-180,180]: " + std::to_string(p.lon));
  }
}

double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  const double phi1 = to_radians(a.lat);
  const double phi2 = to_radians(b.lat);
  const double dphi = to_radians(b.lat - a.lat);
  const double dlambda = to_radians(b.lon - a.lon);

  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(h));
}

std::pair<double, double> band_interval(Band b) {
  switch (b) {
    case Band::B0_20:
      return {0.0, 20.0};
    case Band::B20_40:
      return {20.0, 40.0};
    case Band::B40_60:
      return {40.0, 60.0};
    case Band::B60_80:
      return {60.0, 80.0};
    case Band::B80_100:
      return {80.0, 100.0};
  }
  throw ValidationError("unknown band");
}

const char* band_label(Band b) {
  switch (b) {
    case Band::B0_20:
      return "B0_20";
    case Band::B20_40:
      return "B20_40";
    case Band::B40_60:
      return "B40_60";
    case Band::B60_80:
      return "B60_80";
    case Band::B80_100:
      return "B80_100";
  }
  throw ValidationError("unknown band");
}

Band band_from_label(const std::string& label) {
  for (Band b : kAllBands) {
    if (label == band_label(b)) return b;
  }
  throw ValidationError("unknown band label: '" + label + "'");
}

std::optional<Band> band_of_distance(double distance_mi) {
  for (Band b : kAllBands) {
    auto [lo, hi] = band_interval(b);
    if (distance_mi >= lo && distance_mi < hi) return b;
  }
  return std::nullopt;
}

std::vector<BandAssignment> assign_bands(const std::vector<Elevator>& elevators,
                                         const std::vector<Plant>& plants,
                                         const std::function<bool(const Plant&)>& anchor_filter) {
  std::vector<const Plant*> anchors;
  for (const Plant& p : plants) {
    if (!anchor_filter || anchor_filter(p)) anchors.push_back(&p);
  }
  if (anchors.empty()) throw ValidationError("assign_bands: no anchor plant after filter");

  std::vector<BandAssignment> out;
  out.reserve(elevators.size());
  for (const Elevator& e : elevators) {
    const Plant* nearest = nullptr;
    double best = 0.0;
    for (const Plant* p : anchors) {
      double d = haversine_miles(e.location, p->location);
      if (!nearest || d < best || (d == best && p->id < nearest->id)) {
        nearest = p;
        best = d;
      }
    }
    BandAssignment a;
    a.elevator_id = e.id;
    a.plant_id = nearest->id;
    a.distance_mi = best;
    if (auto b = band_of_distance(best)) {
      a.role = Role::Treated;
      a.band = b;
    } else if (best >= kControlMinMiles && best < kControlMaxMiles) {
      a.role = Role::Control;
    } else {
      a.role = Role::Excluded;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Elevator> control_for_new_plant(const Plant& new_plant,
                                            const std::vector<Plant>& existing_plants,
                                            const std::vector<Elevator>& elevators, Band band) {
  std::vector<const Plant*> same_state;
  for (const Plant& p : existing_plants) {
    if (p.status == PlantStatus::Existing && p.state == new_plant.state && !new_plant.state.empty()) {
      same_state.push_back(&p);
    }
  }
  if (same_state.empty()) {
    throw ValidationError("no valid control: no existing plant in state '" + new_plant.state +
                          "' for new plant '" + new_plant.id + "'");
  }

  auto [lo, hi] = band_interval(band);
  std::vector<Elevator> out;
  for (const Elevator& e : elevators) {
    // Contamination rule: anything within 100 mi of the new plant cannot
    // serve as its control.
    if (haversine_miles(e.location, new_plant.location) < kControlMinMiles) continue;
    bool in_band = false;
    for (const Plant* p : same_state) {
      double d = haversine_miles(e.location, p->location);
      if (d >= lo && d < hi) {
        in_band = true;
        break;
      }
    }
    if (in_band) out.push_back(e);
  }
  return out;
}

}  // namespace basislab::geo
