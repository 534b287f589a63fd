#include "basislab/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <set>

#include "basislab/csv.hpp"
#include "basislab/data.hpp"
#include "basislab/did.hpp"
#include "basislab/errors.hpp"
#include "basislab/panel_event.hpp"
#include "basislab/sdid.hpp"
#include "basislab/simulate.hpp"

namespace basislab::cli {

namespace fs = std::filesystem;

namespace {

uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input for digest: " + path.string());
  uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string bands_text(const std::vector<geo::Band>& bands) {
  std::string out;
  for (geo::Band b : bands) {
    if (!out.empty()) out += ',';
    out += geo::band_label(b);
  }
  return out;
}

// Deterministic config echo + input digests; no timestamps, so identical
// runs produce identical manifests.
void write_manifest(const RunConfig& config, const std::string& command,
                    const std::vector<std::pair<std::string, fs::path>>& inputs) {
  std::map<std::string, std::string> kv;
  kv["command"] = command;
  kv["bands"] = bands_text(config.bands);
  kv["completeness"] = csv::format_double(config.completeness);
  kv["zeta"] = config.zeta ? csv::format_double(*config.zeta) : "auto";
  kv["hac_lag"] = config.hac_lag ? std::to_string(*config.hac_lag) : "auto";
  kv["seed"] = config.seed ? std::to_string(*config.seed) : "default";
  kv["exclude_plant"] = config.exclude_plant.value_or("");
  kv["from"] = config.from ? config.from->to_string() : "";
  kv["to"] = config.to ? config.to->to_string() : "";
  kv["top_n"] = config.top_n ? std::to_string(*config.top_n) : "";
  kv["placebo_reps"] = std::to_string(config.placebo_reps);
  kv["out_dir"] = config.out_dir.string();
  for (const auto& [name, path] : inputs) {
    kv["input." + name + ".path"] = path.string();
    kv["input." + name + ".fnv1a64"] = hex64(fnv1a64_file(path));
  }
  std::string text;
  for (const auto& [key, value] : kv) text += key + "=" + value + "\n";
  csv::write_file_atomic(config.out_dir / "manifest.txt", text);
}

void ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw ValidationError("cannot create output directory: " + config.out_dir.string());
  }
}

constexpr const char* kResultHeader = "label,coefficient,se,t,p,ci_lo,ci_hi,n";

std::string result_row(const est::EstimateResult& r) {
  return csv::join_row({r.label, csv::format_double(r.coefficient), csv::format_double(r.se),
                        csv::format_double(r.t_stat), csv::format_double(r.p_value),
                        csv::format_double(r.ci_lo), csv::format_double(r.ci_hi),
                        std::to_string(r.n_obs)});
}

struct PreparedInputs {
  std::vector<geo::Plant> plants;
  std::vector<geo::Elevator> elevators;
  data::BasisPanel daily;
  std::size_t elevators_loaded = 0;
  std::size_t elevators_kept = 0;
};

// Shared front of both estimation pipelines: load, clip, completeness
// filter, optional most-active filter, forward imputation, basis.
PreparedInputs prepare_inputs(const RunConfig& config) {
  if (config.plants.empty() || config.elevators.empty() || config.cash.empty() ||
      config.futures.empty()) {
    throw ValidationError("estimate commands need --plants, --elevators, --cash and --futures");
  }
  PreparedInputs out;
  out.plants = data::load_plants_csv(config.plants);
  out.elevators = data::load_elevators_csv(config.elevators);
  data::PricePanel cash = data::load_cash_csv(config.cash);
  std::vector<data::FuturesQuote> futures = data::load_futures_csv(config.futures);

  if (config.from || config.to) {
    const Date lo = config.from.value_or(Date(1900, 1, 1));
    const Date hi = config.to.value_or(Date(2999, 12, 31));
    cash = data::clip_range(cash, lo, hi);
    std::erase_if(futures, [&](const data::FuturesQuote& q) { return q.date < lo || q.date > hi; });
  }

  out.elevators_loaded = cash.series.size();
  cash = data::filter_completeness(cash, config.completeness);
  if (config.top_n) cash = data::filter_most_active(cash, *config.top_n);
  out.elevators_kept = cash.series.size();
  cash = data::impute_forward(cash);
  out.daily = data::compute_basis(cash, data::select_active_futures(futures));

  // Plants without a state inherit the nearest elevator's region code, so the
  // declared six-column plants schema keeps working.
  for (geo::Plant& p : out.plants) {
    if (!p.state.empty()) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const geo::Elevator& e : out.elevators) {
      const double d = geo::haversine_miles(p.location, e.location);
      if (d < best) {
        best = d;
        p.state = e.state;
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, fs::path>> estimate_inputs(const RunConfig& config) {
  return {{"plants", config.plants},
          {"elevators", config.elevators},
          {"cash", config.cash},
          {"futures", config.futures}};
}

// Concatenates per-plant event windows, namespacing unit ids by plant so a
// shared control elevator stays a distinct unit per event.
data::DidDataset pool_datasets(const std::vector<std::pair<std::string, const data::DidDataset*>>& parts) {
  data::DidDataset pooled;
  pooled.balanced = true;
  for (const auto& [prefix, part] : parts) {
    for (const data::DidRow& r : part->rows) {
      data::DidRow copy = r;
      copy.unit_id = prefix + "/" + r.unit_id;
      pooled.rows.push_back(std::move(copy));
    }
    for (const auto& [unit, _] : part->unit_index) {
      pooled.unit_index.emplace(prefix + "/" + unit,
                                static_cast<int>(pooled.unit_index.size()));
    }
    pooled.dropped_units += part->dropped_units;
    pooled.balanced = pooled.balanced && part->balanced;
  }
  return pooled;
}

struct WindowMeans {
  double pre_control = 0.0, post_control = 0.0;
  double pre_treated = 0.0, post_treated = 0.0;
};

WindowMeans window_means(const data::DidDataset& dataset) {
  double sums[2][2] = {{0, 0}, {0, 0}};
  long counts[2][2] = {{0, 0}, {0, 0}};
  for (const data::DidRow& r : dataset.rows) {
    sums[r.treatment][r.post] += r.basis;
    counts[r.treatment][r.post] += 1;
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (counts[a][b] == 0) throw EstimationError("window means: empty treatment/post cell");
    }
  }
  return {sums[0][0] / counts[0][0], sums[0][1] / counts[0][1], sums[1][0] / counts[1][0],
          sums[1][1] / counts[1][1]};
}

}  // namespace

void cmd_simulate(const RunConfig& config) {
  if (config.scenario.empty()) throw ValidationError("simulate needs --scenario");
  sim::SyntheticScenario scenario = sim::load_scenario(config.scenario);
  if (config.seed) scenario.seed = *config.seed;

  ensure_out_dir(config);
  sim::Layout layout = sim::generate_layout(scenario);
  sim::SyntheticData panel = sim::generate_basis_panel(scenario, layout);

  csv::write_file_atomic(config.out_dir / "plants.csv", data::plants_csv_text(layout.plants));
  csv::write_file_atomic(config.out_dir / "elevators.csv",
                         data::elevators_csv_text(layout.elevators));
  csv::write_file_atomic(config.out_dir / "cash.csv", data::cash_csv_text(panel.cash));
  csv::write_file_atomic(config.out_dir / "futures.csv", data::futures_csv_text(panel.futures));

  sim::OracleReport oracle = sim::oracle_report(scenario);
  std::string text = "label,value\n";
  for (geo::Band b : geo::kAllBands) {
    text += csv::join_row({geo::band_label(b),
                           csv::format_double(oracle.band_effects[static_cast<std::size_t>(b)])});
  }
  if (oracle.new_plant_att) {
    text += csv::join_row({"new_plant_att", csv::format_double(*oracle.new_plant_att)});
  }
  csv::write_file_atomic(config.out_dir / "oracle.csv", text);

  RunConfig echo = config;
  echo.seed = scenario.seed;
  write_manifest(echo, "simulate", {{"scenario", config.scenario}});
  std::cout << "simulate: " << layout.plants.size() << " plants, " << layout.elevators.size()
            << " elevators, " << panel.cash.calendar.size() << " calendar days -> "
            << config.out_dir.string() << "\n";
}

void cmd_estimate_new(const RunConfig& config) {
  PreparedInputs inputs = prepare_inputs(config);
  ensure_out_dir(config);

  std::vector<const geo::Plant*> new_plants;
  std::vector<geo::Plant> existing;
  for (const geo::Plant& p : inputs.plants) {
    if (p.status == geo::PlantStatus::New) {
      new_plants.push_back(&p);
    } else {
      existing.push_back(p);
    }
  }
  if (new_plants.empty()) throw ValidationError("estimate-new: plants file has no new plant");
  if (config.exclude_plant) {
    const bool known = std::any_of(new_plants.begin(), new_plants.end(), [&](const geo::Plant* p) {
      return p->id == *config.exclude_plant;
    });
    if (!known) {
      throw ValidationError("estimate-new: --exclude-plant '" + *config.exclude_plant +
                            "' is not a new plant id");
    }
  }

  // Contamination guard: an elevator near any new plant never serves as a
  // control for any other new plant.
  auto control_pool_for = [&](const geo::Plant& plant) {
    std::vector<geo::Elevator> pool;
    for (const geo::Elevator& e : inputs.elevators) {
      bool near_other_new = false;
      for (const geo::Plant* other : new_plants) {
        if (other->id == plant.id) continue;
        if (geo::haversine_miles(e.location, other->location) < geo::kControlMinMiles) {
          near_other_new = true;
          break;
        }
      }
      if (!near_other_new) pool.push_back(e);
    }
    return pool;
  };

  // Per (plant, band): event window over the treated elevators around the new
  // plant plus its control group around same-state existing plants. The
  // merged window (all bands at once) backs the startup-means table.
  std::map<std::string, std::map<geo::Band, data::DidDataset>> cells;
  std::map<std::string, data::DidDataset> merged_windows;

  for (const geo::Plant* plant : new_plants) {
    const std::vector<geo::Elevator> pool = control_pool_for(*plant);
    std::vector<geo::BandAssignment> all_bands_assignment;
    std::set<std::string> seen;

    for (geo::Band band : config.bands) {
      std::vector<geo::BandAssignment> assignment;
      auto [lo, hi] = geo::band_interval(band);
      for (const geo::Elevator& e : inputs.elevators) {
        const double d = geo::haversine_miles(e.location, plant->location);
        if (d >= lo && d < hi) {
          assignment.push_back({e.id, geo::Role::Treated, band, plant->id, d});
        }
      }
      for (const geo::Elevator& e : geo::control_for_new_plant(*plant, existing, pool, band)) {
        assignment.push_back({e.id, geo::Role::Control, std::nullopt, plant->id,
                              geo::haversine_miles(e.location, plant->location)});
      }
      for (const geo::BandAssignment& a : assignment) {
        if (seen.insert(a.elevator_id).second) all_bands_assignment.push_back(a);
      }
      if (!plant->start_month) throw ValidationError("new plant missing start month");
      data::DidDataset window =
          data::build_event_window(inputs.daily, *plant->start_month, assignment);
      if (window.dropped_units > 0) {
        std::cerr << "warning: " << plant->id << "/" << geo::band_label(band) << ": "
                  << window.dropped_units << " elevator(s) without window coverage dropped\n";
      }
      cells[plant->id].emplace(band, std::move(window));
    }
    merged_windows.emplace(
        plant->id, data::build_event_window(inputs.daily, *plant->start_month, all_bands_assignment));
  }

  const uint64_t placebo_seed = config.seed.value_or(20240930);

  // Scopes: pooled over all plants, optionally pooled without the flagged
  // plant, then each plant on its own.
  std::vector<std::pair<std::string, std::vector<const geo::Plant*>>> scopes;
  scopes.emplace_back("pooled", new_plants);
  if (config.exclude_plant) {
    std::vector<const geo::Plant*> rest;
    for (const geo::Plant* p : new_plants) {
      if (p->id != *config.exclude_plant) rest.push_back(p);
    }
    scopes.emplace_back("pooled_excl_" + *config.exclude_plant, std::move(rest));
  }
  for (const geo::Plant* p : new_plants) scopes.emplace_back(p->id, std::vector{p});

  // Startup means: mean basis within 100 miles (all bands merged) and its
  // control group, before and after startup, per plant and pooled.
  std::string startup_means =
      "plant,pre_control,post_control,change_control,pre_treated,post_treated,change_treated\n";
  for (const auto& [scope, plants] : scopes) {
    std::vector<std::pair<std::string, const data::DidDataset*>> parts;
    for (const geo::Plant* p : plants) parts.emplace_back(p->id, &merged_windows.at(p->id));
    data::DidDataset merged = pool_datasets(parts);
    try {
      WindowMeans m = window_means(merged);
      startup_means += csv::join_row(
          {scope, csv::format_double(m.pre_control), csv::format_double(m.post_control),
           csv::format_double(m.post_control - m.pre_control), csv::format_double(m.pre_treated),
           csv::format_double(m.post_treated),
           csv::format_double(m.post_treated - m.pre_treated)});
    } catch (const EstimationError& err) {
      std::cerr << "warning: startup_means row skipped for " << scope << ": " << err.what() << "\n";
    }
  }
  csv::write_file_atomic(config.out_dir / "startup_means.csv", startup_means);

  // Standard DiD and SC-DiD per band for every scope; did_pooled.csv carries the
  // pooled DiD rows (the plot data), did_effects.csv the full grid.
  std::string did_pooled = std::string(kResultHeader) + "\n";
  std::string did_effects = std::string(kResultHeader) + "\n";
  std::string sdid_effects = std::string(kResultHeader) + "\n";

  for (const auto& [scope, plants] : scopes) {
    for (geo::Band band : config.bands) {
      std::vector<std::pair<std::string, const data::DidDataset*>> parts;
      for (const geo::Plant* p : plants) parts.emplace_back(p->id, &cells[p->id][band]);
      data::DidDataset pooled = pool_datasets(parts);

      try {
        est::EstimateResult did = est::did_fe(pooled);
        did.label = scope + "|" + geo::band_label(band);
        did_effects += result_row(did);
        if (scope == "pooled") {
          did.label = geo::band_label(band);
          did_pooled += result_row(did);
        }
      } catch (const EstimationError& err) {
        std::cerr << "warning: did " << scope << "|" << geo::band_label(band)
                  << " skipped: " << err.what() << "\n";
      }

      try {
        est::SdidOptions options;
        options.zeta = config.zeta;
        options.placebo_reps = config.placebo_reps;
        options.seed = placebo_seed;
        est::EstimateResult att = est::sdid_att(est::pivot_did(pooled), options);
        att.label = scope + "|" + geo::band_label(band);
        sdid_effects += result_row(att);
      } catch (const EstimationError& err) {
        std::cerr << "warning: sdid_effects " << scope << "|" << geo::band_label(band)
                  << " skipped: " << err.what() << "\n";
      }
    }
  }
  csv::write_file_atomic(config.out_dir / "did_pooled.csv", did_pooled);
  csv::write_file_atomic(config.out_dir / "did_effects.csv", did_effects);
  csv::write_file_atomic(config.out_dir / "sdid_effects.csv", sdid_effects);
  csv::write_file_atomic(config.out_dir / "basis_daily.csv", data::basis_csv_text(inputs.daily));
  write_manifest(config, "estimate-new", estimate_inputs(config));
  std::cout << "estimate-new: " << new_plants.size() << " new plants, " << inputs.elevators_kept
            << "/" << inputs.elevators_loaded << " elevators kept -> " << config.out_dir.string()
            << "\n";
}

void cmd_estimate_existing(const RunConfig& config) {
  PreparedInputs inputs = prepare_inputs(config);
  ensure_out_dir(config);

  const bool any_existing = std::any_of(inputs.plants.begin(), inputs.plants.end(),
                                        [](const geo::Plant& p) {
                                          return p.status == geo::PlantStatus::Existing;
                                        });
  if (!any_existing) throw ValidationError("estimate-existing: no existing plant in plants file");

  std::vector<geo::BandAssignment> assignment = geo::assign_bands(
      inputs.elevators, inputs.plants,
      [](const geo::Plant& p) { return p.status == geo::PlantStatus::Existing; });

  data::BasisPanel monthly = data::aggregate_monthly(inputs.daily);

  // Monthly within-group average basis (five bands + the distant control).
  {
    std::map<std::string, std::string> group_of;
    for (const geo::BandAssignment& a : assignment) {
      if (a.role == geo::Role::Treated) {
        group_of[a.elevator_id] = geo::band_label(*a.band);
      } else if (a.role == geo::Role::Control) {
        group_of[a.elevator_id] = "control_100_300";
      }
    }
    std::map<std::pair<std::string, YearMonth>, std::pair<double, int>> cells;
    for (const auto& [id, series] : monthly.series) {
      auto git = group_of.find(id);
      if (git == group_of.end()) continue;
      for (const data::Observation& obs : series) {
        auto& cell = cells[{git->second, YearMonth::of(obs.date)}];
        cell.first += obs.value;
        cell.second += 1;
      }
    }
    std::string monthly_group_means = "month,group,mean_basis\n";
    for (const auto& [key, cell] : cells) {
      monthly_group_means += csv::join_row(
          {key.second.to_string(), key.first, csv::format_double(cell.first / cell.second)});
    }
    csv::write_file_atomic(config.out_dir / "monthly_group_means.csv", monthly_group_means);
  }

  struct BandRun {
    geo::Band band;
    est::EventCoefficients coeffs;
    std::map<int, double> yearly;
    int skipped_cells = 0;
    std::string error;
  };

  // Band regressions are independent; run them concurrently and write in
  // fixed band order afterwards.
  std::vector<std::future<BandRun>> jobs;
  for (geo::Band band : config.bands) {
    jobs.push_back(std::async(std::launch::async, [&, band]() {
      BandRun run;
      run.band = band;
      try {
        data::PanelDataset panel = data::build_panel_dataset(monthly, assignment, band);
        run.skipped_cells = panel.skipped_cells;
        run.coeffs = est::panel_event_regression(panel, config.hac_lag.value_or(-1));
        run.yearly = est::yearly_average_effects(run.coeffs);
      } catch (const std::exception& err) {
        run.error = err.what();
      }
      return run;
    }));
  }

  std::vector<std::pair<geo::Band, std::map<int, double>>> yearly_by_band;
  for (auto& job : jobs) {
    BandRun run = job.get();
    const std::string band_name = geo::band_label(run.band);
    if (!run.error.empty()) {
      std::cerr << "warning: estimate-existing " << band_name << " skipped: " << run.error << "\n";
      continue;
    }
    if (run.skipped_cells > 0) {
      std::cerr << "warning: " << band_name << ": " << run.skipped_cells
                << " empty (plant, month, proximity) cell(s) absent from the panel\n";
    }
    for (const YearMonth& m : run.coeffs.months_without_estimate) {
      std::cerr << "warning: " << band_name << ": effect for " << m.to_string()
                << " unidentified (missing near or far rows)\n";
    }
    std::string text = "label,coefficient,se,t,p,ci_lo,ci_hi,n,month,significant_5pct\n";
    for (const est::EventCoefficient& ec : run.coeffs.coeffs) {
      est::EstimateResult r = est::make_estimate(band_name, ec.beta, ec.se, run.coeffs.n_obs);
      std::string row = result_row(r);
      row.pop_back();  // swap trailing newline for the extra columns
      row += "," + ec.month.to_string() + "," + (ec.significant_5pct ? "1" : "0") + "\n";
      text += row;
    }
    csv::write_file_atomic(config.out_dir / ("event_effects_" + band_name + ".csv"), text);
    yearly_by_band.emplace_back(run.band, std::move(run.yearly));
  }
  if (yearly_by_band.empty()) {
    throw EstimationError("estimate-existing: every band regression failed");
  }

  est::EffectTable table = est::build_effect_table(yearly_by_band);
  std::string yearly_effects = "year";
  for (geo::Band b : table.bands) yearly_effects += std::string(",") + geo::band_label(b);
  yearly_effects += ",avg_over_bands\n";
  auto cell_text = [](double v) { return std::isnan(v) ? std::string() : csv::format_double(v); };
  for (std::size_t yi = 0; yi < table.years.size(); ++yi) {
    yearly_effects += std::to_string(table.years[yi]);
    for (std::size_t b = 0; b < table.bands.size(); ++b) {
      yearly_effects += "," + cell_text(table.cells(static_cast<long>(yi), static_cast<long>(b)));
    }
    yearly_effects += "," + cell_text(table.year_means[yi]) + "\n";
  }
  yearly_effects += "average";
  for (double v : table.band_means) yearly_effects += "," + cell_text(v);
  yearly_effects += ",\n";  // no grand cell
  csv::write_file_atomic(config.out_dir / "yearly_effects.csv", yearly_effects);

  csv::write_file_atomic(config.out_dir / "basis_monthly.csv", data::basis_csv_text(monthly));
  write_manifest(config, "estimate-existing", estimate_inputs(config));
  std::cout << "estimate-existing: " << yearly_by_band.size() << " band runs, "
            << inputs.elevators_kept << "/" << inputs.elevators_loaded << " elevators kept -> "
            << config.out_dir.string() << "\n";
}

void cmd_feedstock(const FeedstockConfig& config, std::ostream& out) {
  const double grams = fuel::co2_saved_grams_per_gallon(config.from, config.to, config.constants);
  const double credit = fuel::lcfs_credit_advantage(config.from, config.to, config.constants);
  const double cost = fuel::feedstock_cost_gap(config.from, config.to, config.constants);
  auto g8 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return std::string(buf);
  };
  out << config.to.name << " vs " << config.from.name << ": "
      << g8(config.from.ci_score - config.to.ci_score) << " g/MJ saved x "
      << g8(config.constants.mj_per_gallon) << " MJ/gal = " << g8(grams) << " g = "
      << g8(grams / 1e6) << " t CO2e/gal"
      << "; x $" << g8(config.constants.credit_price_per_ton) << "/t = $" << g8(credit)
      << "/gal credit advantage"
      << "; cost gap ($" << g8(config.from.price_per_lb) << "-$" << g8(config.to.price_per_lb)
      << ")/lb x " << g8(config.constants.lbs_feedstock_per_gallon) << " lb/gal = $" << g8(cost)
      << "/gal\n";
}

}  // namespace basislab::cli
