#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "basislab/dates.hpp"
#include "basislab/feedstock.hpp"
#include "basislab/geo.hpp"

namespace basislab::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitEstimationError = 3;

struct RunConfig {
  std::filesystem::path scenario;  // simulate input
  std::filesystem::path plants;
  std::filesystem::path elevators;
  std::filesystem::path cash;
  std::filesystem::path futures;
  std::filesystem::path out_dir = ".";

  std::vector<geo::Band> bands{geo::kAllBands.begin(), geo::kAllBands.end()};
  std::optional<double> zeta;
  std::optional<int> hac_lag;
  double completeness = 0.85;
  std::optional<uint64_t> seed;
  std::optional<std::string> exclude_plant;
  std::optional<Date> from;
  std::optional<Date> to;
  std::optional<int> top_n;  // most-active filter: keep N most complete elevators
  int placebo_reps = 200;
};

// Writes plants/elevators/cash/futures/oracle CSVs plus a manifest.
void cmd_simulate(const RunConfig& config);

// New-plant analysis: event-window DiD and SC-DiD per band, per plant and
// pooled. Emits startup_means.csv, sdid_effects.csv, did_pooled.csv, basis_daily.csv.
void cmd_estimate_new(const RunConfig& config);

// Existing-plant analysis: one monthly interaction regression per band
// against the fixed distant control. Emits monthly_group_means.csv, event_effects_<band>.csv,
// yearly_effects.csv, basis_monthly.csv.
void cmd_estimate_existing(const RunConfig& config);

struct FeedstockConfig {
  fuel::FeedstockProfile from = fuel::soybean_oil();
  fuel::FeedstockProfile to = fuel::yellow_grease();
  fuel::FuelConstants constants;
};

// One-line credit and cost breakdown on `out`.
void cmd_feedstock(const FeedstockConfig& config, std::ostream& out);

}  // namespace basislab::cli
