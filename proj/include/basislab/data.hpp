#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "basislab/dates.hpp"
#include "basislab/geo.hpp"

namespace basislab::data {

struct Observation {
  Date date;
  double value = 0.0;  // cents/bushel
};

// Strictly increasing dates. Missingness is a calendar date with no entry.
using Series = std::vector<Observation>;

// Daily cash prices per elevator plus the calendar of expected observation
// dates (dates the panel could have had a quote).
struct PricePanel {
  std::vector<Date> calendar;  // sorted, distinct
  std::map<std::string, Series> series;
};

struct FuturesQuote {
  Date date;
  std::string contract_id;
  double settlement = 0.0;  // cents/bushel, > 0
  long long volume = 0;     // contracts, >= 0
};

enum class Frequency { Daily, Monthly };

// Basis (cash minus active futures) per elevator. Monthly entries are dated
// on the first of the month.
struct BasisPanel {
  Frequency freq = Frequency::Daily;
  std::map<std::string, Series> series;
};

// One observation of the event-window DiD sample. relative_day is in
// [-30,-1] or [1,30]; day 0 (the start month itself) never appears.
struct DidRow {
  std::string unit_id;
  int relative_day = 0;
  int treatment = 0;
  int post = 0;
  double basis = 0.0;
};

struct DidDataset {
  std::vector<DidRow> rows;
  std::map<std::string, int> unit_index;
  bool balanced = false;   // every unit has all 60 relative days
  int dropped_units = 0;   // elevators without coverage in a window
};

// One (plant, month, proximity) cell of the monthly panel.
struct PanelRow {
  std::string group_id;  // existing plant j
  YearMonth month;
  bool near = false;  // true: treated band; false: distant control
  double mean_basis = 0.0;
};

struct PanelDataset {
  std::vector<PanelRow> rows;  // sorted by (group, month, far-before-near)
  int skipped_cells = 0;       // (j,t,s) cells with zero elevators
};

// Per date, settlement of the maximum-volume contract; ties go to the
// lexicographically smallest contract id (front-month convention).
std::map<Date, double> select_active_futures(const std::vector<FuturesQuote>& quotes);

// basis(e,d) = cash(e,d) - futures(d); daily cells without a futures
// settlement are dropped.
BasisPanel compute_basis(const PricePanel& cash, const std::map<Date, double>& futures);

// Keeps elevators with observed/calendar >= threshold. threshold in (0,1].
PricePanel filter_completeness(const PricePanel& panel, double threshold);

// Forward-fills gaps against the calendar; leading missing dates are
// dropped. An empty series stays empty.
Series impute_forward(const Series& series, const std::vector<Date>& calendar);
PricePanel impute_forward(const PricePanel& panel);

// Arithmetic mean of daily basis per (elevator, calendar month).
BasisPanel aggregate_monthly(const BasisPanel& daily);

// Event-window sample around a new plant's start month: pre = the 30
// calendar days before the month's first day (relative -30..-1), post = the
// 30 days after its last day (relative 1..30). Treated and Control roles in
// `assignment` define the treatment dummy; Excluded elevators are skipped.
DidDataset build_event_window(const BasisPanel& daily, YearMonth start_month,
                              const std::vector<geo::BandAssignment>& assignment);

// Monthly (plant, month, near/far) means: near averages the plant's
// treated-band elevators, far averages the control elevators anchored to the
// plant. Cells with zero elevators are absent and counted.
PanelDataset build_panel_dataset(const BasisPanel& monthly,
                                 const std::vector<geo::BandAssignment>& assignment,
                                 geo::Band band);

// Restricts calendar and series to [from, to] inclusive.
PricePanel clip_range(const PricePanel& panel, Date from, Date to);

// Optional most-active filter: keeps the top_n elevators by completeness,
// ties broken by elevator id.
PricePanel filter_most_active(const PricePanel& panel, int top_n);

// CSV I/O (schemas from the file contracts; dates ISO YYYY-MM-DD).
PricePanel load_cash_csv(const std::filesystem::path& path);
std::vector<FuturesQuote> load_futures_csv(const std::filesystem::path& path);
std::vector<geo::Plant> load_plants_csv(const std::filesystem::path& path);
std::vector<geo::Elevator> load_elevators_csv(const std::filesystem::path& path);

std::string cash_csv_text(const PricePanel& panel);
std::string futures_csv_text(const std::vector<FuturesQuote>& quotes);
std::string plants_csv_text(const std::vector<geo::Plant>& plants);
std::string elevators_csv_text(const std::vector<geo::Elevator>& elevators);
std::string basis_csv_text(const BasisPanel& panel);
BasisPanel load_basis_csv(const std::filesystem::path& path);

}  // namespace basislab::data
