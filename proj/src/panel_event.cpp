#include "basislab/panel_event.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "basislab/errors.hpp"

namespace basislab::est {

EventCoefficients panel_event_regression(const data::PanelDataset& panel, int hac_lag) {
  if (panel.rows.empty()) throw ValidationError("panel_event_regression: empty panel");

  std::set<std::string> group_set;
  std::set<YearMonth> month_set;
  std::set<std::tuple<std::string, YearMonth, bool>> cell_set;
  std::map<YearMonth, std::pair<bool, bool>> coverage;  // month -> (has_far, has_near)
  for (const data::PanelRow& r : panel.rows) {
    group_set.insert(r.group_id);
    month_set.insert(r.month);
    if (!cell_set.insert({r.group_id, r.month, r.near}).second) {
      throw ValidationError("panel_event_regression: duplicate (group, month, proximity) row");
    }
    auto& cov = coverage[r.month];
    (r.near ? cov.second : cov.first) = true;
  }

  std::vector<std::string> groups(group_set.begin(), group_set.end());
  std::vector<YearMonth> months(month_set.begin(), month_set.end());
  std::map<std::string, long> group_idx;
  std::map<YearMonth, long> month_idx;
  for (std::size_t i = 0; i < groups.size(); ++i) group_idx[groups[i]] = static_cast<long>(i);
  for (std::size_t i = 0; i < months.size(); ++i) month_idx[months[i]] = static_cast<long>(i);

  // beta_t is estimable only where near and far rows coexist.
  std::vector<YearMonth> identified;
  EventCoefficients out;
  for (const YearMonth& m : months) {
    const auto& cov = coverage.at(m);
    if (cov.first && cov.second) {
      identified.push_back(m);
    } else {
      out.months_without_estimate.push_back(m);
    }
  }
  if (identified.empty()) {
    throw EstimationError("panel_event_regression: no month has both near and far rows");
  }
  std::map<YearMonth, long> beta_idx;
  for (std::size_t i = 0; i < identified.size(); ++i) {
    beta_idx[identified[i]] = static_cast<long>(i);
  }

  const long n = static_cast<long>(panel.rows.size());
  const long n_groups = static_cast<long>(groups.size());
  const long n_months = static_cast<long>(months.size());
  const long n_betas = static_cast<long>(identified.size());
  // intercept + (J-1) group dummies + (T-1) month dummies + interaction dummies
  const long k = 1 + (n_groups - 1) + (n_months - 1) + n_betas;

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd y(n);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(k));
  labels.emplace_back("intercept");
  for (long j = 1; j < n_groups; ++j) labels.push_back("plant_" + groups[static_cast<std::size_t>(j)]);
  for (long t = 1; t < n_months; ++t) {
    labels.push_back("month_" + months[static_cast<std::size_t>(t)].to_string());
  }
  for (const YearMonth& m : identified) labels.push_back("near_x_" + m.to_string());

  const long group_base = 1;
  const long month_base = 1 + (n_groups - 1);
  const long beta_base = month_base + (n_months - 1);

  // Rows are assumed ordered by (group, month, far-before-near); enforce so
  // the HAC window has a meaning.
  for (std::size_t i = 1; i < panel.rows.size(); ++i) {
    const auto& a = panel.rows[i - 1];
    const auto& b = panel.rows[i];
    const auto key = [](const data::PanelRow& r) { return std::tuple(r.group_id, r.month, r.near); };
    if (!(key(a) < key(b))) {
      throw ValidationError("panel_event_regression: rows not ordered by (group, month)");
    }
  }

  for (long i = 0; i < n; ++i) {
    const data::PanelRow& r = panel.rows[static_cast<std::size_t>(i)];
    y(i) = r.mean_basis;
    X(i, 0) = 1.0;
    const long g = group_idx.at(r.group_id);
    if (g > 0) X(i, group_base + g - 1) = 1.0;
    const long t = month_idx.at(r.month);
    if (t > 0) X(i, month_base + t - 1) = 1.0;
    if (r.near) {
      auto it = beta_idx.find(r.month);
      if (it != beta_idx.end()) X(i, beta_base + it->second) = 1.0;
    }
  }

  DesignMatrix design{std::move(X), std::move(labels)};
  OlsFit fit = ols(design, y);

  const int lag = hac_lag >= 0 ? hac_lag : newey_west_default_lag(static_cast<int>(n_months));
  Eigen::MatrixXd cov = newey_west_cov(design.X, fit.residuals, lag);

  out.hac_lag = lag;
  out.n_obs = n;
  for (long i = 0; i < n_betas; ++i) {
    EventCoefficient ec;
    ec.month = identified[static_cast<std::size_t>(i)];
    ec.beta = fit.coef(beta_base + i);
    ec.se = std::sqrt(std::max(0.0, cov(beta_base + i, beta_base + i)));
    ec.significant_5pct = ec.se > 0.0 && std::abs(ec.beta / ec.se) > 1.96;
    out.coeffs.push_back(ec);
  }
  return out;
}

std::map<int, double> yearly_average_effects(const EventCoefficients& coeffs) {
  std::map<int, std::pair<double, int>> sums;
  for (const EventCoefficient& ec : coeffs.coeffs) {
    auto& cell = sums[ec.month.year];
    cell.first += ec.beta;
    cell.second += 1;
  }
  std::map<int, double> out;
  for (const auto& [year, cell] : sums) out[year] = cell.first / cell.second;
  return out;
}

EffectTable build_effect_table(
    const std::vector<std::pair<geo::Band, std::map<int, double>>>& yearly_by_band) {
  EffectTable table;
  std::set<int> years;
  for (const auto& [band, by_year] : yearly_by_band) {
    table.bands.push_back(band);
    for (const auto& [year, v] : by_year) years.insert(year);
  }
  table.years.assign(years.begin(), years.end());

  const long ny = static_cast<long>(table.years.size());
  const long nb = static_cast<long>(table.bands.size());
  table.cells = Eigen::MatrixXd::Constant(ny, nb, std::numeric_limits<double>::quiet_NaN());
  for (long b = 0; b < nb; ++b) {
    const auto& by_year = yearly_by_band[static_cast<std::size_t>(b)].second;
    for (long yi = 0; yi < ny; ++yi) {
      auto it = by_year.find(table.years[static_cast<std::size_t>(yi)]);
      if (it != by_year.end()) table.cells(yi, b) = it->second;
    }
  }

  auto mean_skip_nan = [](auto&& view) {
    double sum = 0.0;
    int count = 0;
    for (long i = 0; i < view.size(); ++i) {
      if (!std::isnan(view(i))) {
        sum += view(i);
        ++count;
      }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
  };
  for (long yi = 0; yi < ny; ++yi) table.year_means.push_back(mean_skip_nan(table.cells.row(yi)));
  for (long b = 0; b < nb; ++b) table.band_means.push_back(mean_skip_nan(table.cells.col(b)));
  return table;
}

}  // namespace basislab::est
