#include "basislab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "basislab/csv.hpp"
#include "basislab/errors.hpp"

namespace basislab::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t substream_seed(uint64_t base, uint64_t stream) {
  uint64_t state = base ^ (stream * 0xD6E8FEB86659FD93ULL);
  splitmix64(state);
  return splitmix64(state);
}

// mt19937_64 with hand-rolled transforms: std::uniform_real_distribution and
// std::normal_distribution are not bit-reproducible across standard
// libraries, and panels must be.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, one value per pair of uniforms
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::string zero_padded(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

double effect_at_distance(const SyntheticScenario& scenario, double distance_mi) {
  if (auto band = geo::band_of_distance(distance_mi)) {
    return scenario.band_effects[static_cast<std::size_t>(*band)];
  }
  return 0.0;
}

}  // namespace

void validate(const SyntheticScenario& scenario) {
  if (!(scenario.box.lat_lo < scenario.box.lat_hi && scenario.box.lon_lo < scenario.box.lon_hi)) {
    throw ValidationError("scenario: empty region box");
  }
  geo::validate({scenario.box.lat_lo, scenario.box.lon_lo});
  geo::validate({scenario.box.lat_hi, scenario.box.lon_hi});
  if (scenario.n_plants < 1) throw ValidationError("scenario: n_plants must be >= 1");
  if (scenario.n_elevators < 1) throw ValidationError("scenario: n_elevators must be >= 1");
  if (scenario.noise_sd < 0.0) throw ValidationError("scenario: noise_sd must be >= 0");
  if (!(scenario.ar1_rho >= 0.0 && scenario.ar1_rho < 1.0)) {
    throw ValidationError("scenario: ar1_rho must be in [0,1)");
  }
  if (!(scenario.missing_rate >= 0.0 && scenario.missing_rate < 1.0)) {
    throw ValidationError("scenario: missing_rate must be in [0,1)");
  }
  for (std::size_t i = 1; i < scenario.band_effects.size(); ++i) {
    if (scenario.band_effects[i] > scenario.band_effects[i - 1]) {
      throw ValidationError("scenario: band effects must be nonincreasing with distance");
    }
  }
  if (scenario.band_effects.back() < 0.0) {
    throw ValidationError("scenario: band effects must be >= 0");
  }
  if (scenario.end_date < scenario.start_date) {
    throw ValidationError("scenario: end_date before start_date");
  }
  if (scenario.new_plant) geo::validate(scenario.new_plant->location);
}

Layout generate_layout(const SyntheticScenario& scenario) {
  validate(scenario);
  Layout layout;
  Rng rng(substream_seed(scenario.seed, 1));
  const RegionBox& box = scenario.box;

  for (int i = 0; i < scenario.n_plants; ++i) {
    geo::Plant p;
    p.id = "P" + zero_padded(i + 1, 2);
    p.location = {box.lat_lo + rng.uniform() * (box.lat_hi - box.lat_lo),
                  box.lon_lo + rng.uniform() * (box.lon_hi - box.lon_lo)};
    p.state = "IA";
    p.capacity_kbu_day = 30.0 + rng.uniform() * 270.0;
    p.status = geo::PlantStatus::Existing;
    layout.plants.push_back(std::move(p));
  }
  if (scenario.new_plant) {
    geo::Plant p;
    p.id = "NEW";
    p.location = scenario.new_plant->location;
    p.state = "IA";
    p.capacity_kbu_day = 120.0;
    p.status = geo::PlantStatus::New;
    p.start_month = scenario.new_plant->start_month;
    layout.plants.push_back(std::move(p));
  }

  Rng erng(substream_seed(scenario.seed, 2));
  for (int i = 0; i < scenario.n_elevators; ++i) {
    geo::Elevator e;
    e.id = "E" + zero_padded(i + 1, 4);
    e.location = {box.lat_lo + erng.uniform() * (box.lat_hi - box.lat_lo),
                  box.lon_lo + erng.uniform() * (box.lon_hi - box.lon_lo)};
    e.state = "IA";
    layout.elevators.push_back(std::move(e));
  }
  return layout;
}

SyntheticData generate_basis_panel(const SyntheticScenario& scenario, const Layout& layout) {
  validate(scenario);
  SyntheticData out;

  std::vector<Date> calendar;
  for (Date d = scenario.start_date; d <= scenario.end_date; d = d + 1) calendar.push_back(d);
  out.cash.calendar = calendar;

  // Futures: a reflected random walk quoted on two contracts. The volume
  // leader alternates by calendar month, so the active-contract selection has
  // real work to do.
  std::map<Date, double> active;
  {
    Rng rng(substream_seed(scenario.seed, 3));
    double level = 1050.0;
    for (const Date& d : calendar) {
      level += 3.0 * rng.normal();
      if (level < 100.0) level = 200.0 - level;
      const bool front_leads = d.month() % 2 == 0;
      const long long lead_vol = 1200 + static_cast<long long>(800.0 * rng.uniform());
      const long long back_vol = 200 + static_cast<long long>(700.0 * rng.uniform());
      const double carry = 7.5;
      data::FuturesQuote f1{d, "F1", front_leads ? level : level + carry,
                            front_leads ? lead_vol : back_vol};
      data::FuturesQuote f2{d, "F2", front_leads ? level + carry : level,
                            front_leads ? back_vol : lead_vol};
      out.futures.push_back(f1);
      out.futures.push_back(f2);
      active.emplace(d, level);
    }
  }

  const std::vector<geo::Plant>& plants = layout.plants;
  for (std::size_t e = 0; e < layout.elevators.size(); ++e) {
    const geo::Elevator& elevator = layout.elevators[e];

    double nearest_existing = std::numeric_limits<double>::infinity();
    for (const geo::Plant& p : plants) {
      if (p.status != geo::PlantStatus::Existing) continue;
      nearest_existing =
          std::min(nearest_existing, geo::haversine_miles(elevator.location, p.location));
    }
    const double effect = effect_at_distance(scenario, nearest_existing);

    bool near_new = false;
    Date new_effect_from;
    if (scenario.new_plant) {
      near_new = geo::haversine_miles(elevator.location, scenario.new_plant->location) <
                 geo::kControlMinMiles;
      new_effect_from = scenario.new_plant->start_month.first_day();
    }

    Rng rng(substream_seed(scenario.seed, 1000 + e));
    data::Series series;
    double noise = scenario.noise_sd * rng.normal();
    const double rho = scenario.ar1_rho;
    bool first = true;
    for (const Date& d : calendar) {
      if (!first) {
        noise = rho * noise + std::sqrt(1.0 - rho * rho) * scenario.noise_sd * rng.normal();
      }
      first = false;
      const double miss_draw = rng.uniform();
      if (scenario.missing_rate > 0.0 && miss_draw < scenario.missing_rate) continue;

      double cash = active.at(d) + scenario.base_basis + seasonal_term(scenario, d) + effect;
      if (near_new && d >= new_effect_from) cash += scenario.new_plant->post_effect;
      cash += noise;
      series.push_back({d, cash});
    }
    if (!series.empty()) out.cash.series.emplace(elevator.id, std::move(series));
  }
  return out;
}

double oracle_att(const SyntheticScenario& scenario, geo::Band band) {
  return scenario.band_effects[static_cast<std::size_t>(band)];
}

OracleReport oracle_report(const SyntheticScenario& scenario) {
  OracleReport r;
  r.band_effects = scenario.band_effects;
  if (scenario.new_plant) r.new_plant_att = scenario.new_plant->post_effect;
  return r;
}

double seasonal_term(const SyntheticScenario& scenario, Date d) {
  if (scenario.seasonal_amplitude == 0.0) return 0.0;
  const int day_of_year = d.serial() - Date(d.year(), 1, 1).serial() + 1;
  // Peak on day 196 (mid-July), matching summer basis spikes.
  return scenario.seasonal_amplitude * std::cos(2.0 * kPi * (day_of_year - 196) / 365.25);
}

namespace {

const std::array<const char*, 5> kEffectKeys = {"effect_b0_20", "effect_b20_40", "effect_b40_60",
                                                "effect_b60_80", "effect_b80_100"};

}  // namespace

SyntheticScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("scenario line is not key=value: '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  SyntheticScenario s;
  bool new_lat = false, new_lon = false, new_start = false;
  NewPlantSpec np;
  for (const auto& [key, value] : kv) {
    if (key == "seed") {
      s.seed = static_cast<uint64_t>(csv::parse_int(value, "seed"));
    } else if (key == "lat_lo") {
      s.box.lat_lo = csv::parse_double(value, key.c_str());
    } else if (key == "lat_hi") {
      s.box.lat_hi = csv::parse_double(value, key.c_str());
    } else if (key == "lon_lo") {
      s.box.lon_lo = csv::parse_double(value, key.c_str());
    } else if (key == "lon_hi") {
      s.box.lon_hi = csv::parse_double(value, key.c_str());
    } else if (key == "n_plants") {
      s.n_plants = static_cast<int>(csv::parse_int(value, key.c_str()));
    } else if (key == "n_elevators") {
      s.n_elevators = static_cast<int>(csv::parse_int(value, key.c_str()));
    } else if (key == "base_basis") {
      s.base_basis = csv::parse_double(value, key.c_str());
    } else if (key == "seasonal_amplitude") {
      s.seasonal_amplitude = csv::parse_double(value, key.c_str());
    } else if (key == "noise_sd") {
      s.noise_sd = csv::parse_double(value, key.c_str());
    } else if (key == "ar1_rho") {
      s.ar1_rho = csv::parse_double(value, key.c_str());
    } else if (key == "missing_rate") {
      s.missing_rate = csv::parse_double(value, key.c_str());
    } else if (key == "start_date") {
      s.start_date = Date::parse(value);
    } else if (key == "end_date") {
      s.end_date = Date::parse(value);
    } else if (key == "new_plant_lat") {
      np.location.lat = csv::parse_double(value, key.c_str());
      new_lat = true;
    } else if (key == "new_plant_lon") {
      np.location.lon = csv::parse_double(value, key.c_str());
      new_lon = true;
    } else if (key == "new_plant_start") {
      np.start_month = YearMonth::parse(value);
      new_start = true;
    } else if (key == "new_plant_effect") {
      np.post_effect = csv::parse_double(value, key.c_str());
    } else {
      bool matched = false;
      for (std::size_t i = 0; i < kEffectKeys.size(); ++i) {
        if (key == kEffectKeys[i]) {
          s.band_effects[i] = csv::parse_double(value, key.c_str());
          matched = true;
          break;
        }
      }
      if (!matched) throw ValidationError("unknown scenario key: '" + key + "'");
    }
  }
  if (new_lat || new_lon || new_start) {
    if (!(new_lat && new_lon && new_start)) {
      throw ValidationError("scenario: new plant needs new_plant_lat, new_plant_lon and new_plant_start");
    }
    s.new_plant = np;
  }
  validate(s);
  return s;
}

std::string scenario_text(const SyntheticScenario& s) {
  std::string out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  put("seed", std::to_string(s.seed));
  put("lat_lo", csv::format_double(s.box.lat_lo));
  put("lat_hi", csv::format_double(s.box.lat_hi));
  put("lon_lo", csv::format_double(s.box.lon_lo));
  put("lon_hi", csv::format_double(s.box.lon_hi));
  put("n_plants", std::to_string(s.n_plants));
  put("n_elevators", std::to_string(s.n_elevators));
  put("base_basis", csv::format_double(s.base_basis));
  put("seasonal_amplitude", csv::format_double(s.seasonal_amplitude));
  put("noise_sd", csv::format_double(s.noise_sd));
  put("ar1_rho", csv::format_double(s.ar1_rho));
  put("missing_rate", csv::format_double(s.missing_rate));
  for (std::size_t i = 0; i < kEffectKeys.size(); ++i) {
    put(kEffectKeys[i], csv::format_double(s.band_effects[i]));
  }
  put("start_date", s.start_date.to_string());
  put("end_date", s.end_date.to_string());
  if (s.new_plant) {
    put("new_plant_lat", csv::format_double(s.new_plant->location.lat));
    put("new_plant_lon", csv::format_double(s.new_plant->location.lon));
    put("new_plant_start", s.new_plant->start_month.to_string());
    put("new_plant_effect", csv::format_double(s.new_plant->post_effect));
  }
  return out;
}

}  // namespace basislab::sim
