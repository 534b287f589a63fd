#pragma once

#include <map>
#include <utility>

#include "basislab/data.hpp"
#include "basislab/estimators.hpp"

namespace basislab::est {

struct EventCoefficient {
  YearMonth month;
  double beta = 0.0;  // cents/bushel
  double se = 0.0;    // Newey-West
  bool significant_5pct = false;
};

struct EventCoefficients {
  std::vector<EventCoefficient> coeffs;          // ordered by month
  std::vector<YearMonth> months_without_estimate;  // no far rows (or no near rows)
  int hac_lag = 0;
  long n_obs = 0;
};

// Monthly interaction regression
//   y_{j,t,s} = a + sum_t beta_t D_{j,t,s} + gamma_j + lambda_t + e,
// D_{j,t,s} = 1{s = near, month = t}. The first month's lambda is dropped for
// identification; months lacking far rows leave beta_t unidentified and are
// reported as absent. Standard errors come from newey_west_cov on rows
// ordered by (group, month, far-before-near); lag < 0 selects the default
// rule on the number of months.
EventCoefficients panel_event_regression(const data::PanelDataset& panel, int hac_lag = -1);

// Mean of beta_t over the months of each calendar year.
std::map<int, double> yearly_average_effects(const EventCoefficients& coeffs);

// Year x band matrix of yearly averages with both margins (mean over bands
// per year, mean over years per band). Absent cells are NaN and skipped in
// the margins.
struct EffectTable {
  std::vector<int> years;        // sorted ascending
  std::vector<geo::Band> bands;  // column order as provided
  Eigen::MatrixXd cells;         // years x bands
  std::vector<double> year_means;
  std::vector<double> band_means;
};

EffectTable build_effect_table(
    const std::vector<std::pair<geo::Band, std::map<int, double>>>& yearly_by_band);

}  // namespace basislab::est
