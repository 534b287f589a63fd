#include "basislab/data.hpp"

#include <algorithm>
#include <set>

#include "basislab/csv.hpp"
#include "basislab/errors.hpp"

namespace basislab::data {

namespace {

void require_sorted_dates(const Series& s, const std::string& elevator_id) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i - 1].date < s[i].date)) {
      throw ValidationError("series dates not strictly increasing for elevator '" + elevator_id +
                            "' at " + s[i].date.to_string());
    }
  }
}

}  // namespace

std::map<Date, double> select_active_futures(const std::vector<FuturesQuote>& quotes) {
  std::map<Date, const FuturesQuote*> best;
  for (const FuturesQuote& q : quotes) {
    if (q.volume < 0) throw ValidationError("negative futures volume on " + q.date.to_string());
    if (!(q.settlement > 0.0)) {
      throw ValidationError("non-positive settlement on " + q.date.to_string());
    }
    auto it = best.find(q.date);
    if (it == best.end()) {
      best.emplace(q.date, &q);
    } else {
      const FuturesQuote* cur = it->second;
      if (q.volume > cur->volume || (q.volume == cur->volume && q.contract_id < cur->contract_id)) {
        it->second = &q;
      }
    }
  }
  std::map<Date, double> out;
  for (const auto& [date, q] : best) out.emplace(date, q->settlement);
  return out;
}

BasisPanel compute_basis(const PricePanel& cash, const std::map<Date, double>& futures) {
  BasisPanel out;
  out.freq = Frequency::Daily;
  for (const auto& [id, series] : cash.series) {
    require_sorted_dates(series, id);
    Series basis;
    basis.reserve(series.size());
    for (const Observation& obs : series) {
      auto it = futures.find(obs.date);
      if (it == futures.end()) continue;  // no active settlement: cell dropped
      basis.push_back({obs.date, obs.value - it->second});
    }
    if (!basis.empty()) out.series.emplace(id, std::move(basis));
  }
  return out;
}

PricePanel filter_completeness(const PricePanel& panel, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ValidationError("completeness threshold must be in (0,1]");
  }
  if (panel.calendar.empty()) throw ValidationError("filter_completeness: empty calendar");
  PricePanel out;
  out.calendar = panel.calendar;
  const double n_expected = static_cast<double>(panel.calendar.size());
  for (const auto& [id, series] : panel.series) {
    if (static_cast<double>(series.size()) / n_expected >= threshold) {
      out.series.emplace(id, series);
    }
  }
  return out;
}

Series impute_forward(const Series& series, const std::vector<Date>& calendar) {
  if (series.empty()) return {};
  Series out;
  out.reserve(calendar.size());
  std::size_t next = 0;
  bool seen = false;
  double last = 0.0;
  for (const Date& d : calendar) {
    while (next < series.size() && series[next].date < d) ++next;  // stray dates off-calendar
    if (next < series.size() && series[next].date == d) {
      last = series[next].value;
      seen = true;
      ++next;
    }
    if (seen) out.push_back({d, last});  // leading missings stay missing
  }
  return out;
}

PricePanel impute_forward(const PricePanel& panel) {
  PricePanel out;
  out.calendar = panel.calendar;
  for (const auto& [id, series] : panel.series) {
    Series filled = impute_forward(series, panel.calendar);
    if (!filled.empty()) out.series.emplace(id, std::move(filled));
  }
  return out;
}

BasisPanel aggregate_monthly(const BasisPanel& daily) {
  if (daily.freq != Frequency::Daily) {
    throw ValidationError("aggregate_monthly expects a daily panel");
  }
  BasisPanel out;
  out.freq = Frequency::Monthly;
  for (const auto& [id, series] : daily.series) {
    Series monthly;
    std::size_t i = 0;
    while (i < series.size()) {
      YearMonth ym = YearMonth::of(series[i].date);
      double sum = 0.0;
      int count = 0;
      while (i < series.size() && YearMonth::of(series[i].date) == ym) {
        sum += series[i].value;
        ++count;
        ++i;
      }
      monthly.push_back({ym.first_day(), sum / count});
    }
    out.series.emplace(id, std::move(monthly));
  }
  return out;
}

DidDataset build_event_window(const BasisPanel& daily, YearMonth start_month,
                              const std::vector<geo::BandAssignment>& assignment) {
  if (daily.freq != Frequency::Daily) {
    throw ValidationError("build_event_window expects a daily panel");
  }
  const Date first = start_month.first_day();
  const Date last = start_month.last_day();
  const Date pre_lo = first - 30;   // relative day -30
  const Date pre_hi = first - 1;    // relative day -1
  const Date post_lo = last + 1;    // relative day +1
  const Date post_hi = last + 30;   // relative day +30

  DidDataset out;
  for (const geo::BandAssignment& a : assignment) {
    if (a.role == geo::Role::Excluded) continue;
    auto it = daily.series.find(a.elevator_id);
    if (it == daily.series.end()) continue;
    const Series& series = it->second;
    const int treatment = a.role == geo::Role::Treated ? 1 : 0;

    std::vector<DidRow> rows;
    bool any_pre = false;
    bool any_post = false;
    for (const Observation& obs : series) {
      if (obs.date >= pre_lo && obs.date <= pre_hi) {
        rows.push_back({a.elevator_id, obs.date - first, treatment, 0, obs.value});
        any_pre = true;
      } else if (obs.date >= post_lo && obs.date <= post_hi) {
        rows.push_back({a.elevator_id, obs.date - last, treatment, 1, obs.value});
        any_post = true;
      }
    }
    if (!any_pre || !any_post) {
      ++out.dropped_units;
      continue;
    }
    int idx = static_cast<int>(out.unit_index.size());
    out.unit_index.emplace(a.elevator_id, idx);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }

  out.balanced = true;
  std::map<std::string, int> counts;
  for (const DidRow& r : out.rows) ++counts[r.unit_id];
  for (const auto& [id, n] : counts) {
    if (n != 60) out.balanced = false;
  }
  if (out.unit_index.empty()) out.balanced = false;
  return out;
}

PanelDataset build_panel_dataset(const BasisPanel& monthly,
                                 const std::vector<geo::BandAssignment>& assignment,
                                 geo::Band band) {
  if (monthly.freq != Frequency::Monthly) {
    throw ValidationError("build_panel_dataset expects a monthly panel");
  }

  // plant -> elevators in the requested band (near) / its control pool (far)
  std::map<std::string, std::vector<const std::string*>> near_sets;
  std::map<std::string, std::vector<const std::string*>> far_sets;
  for (const geo::BandAssignment& a : assignment) {
    if (a.role == geo::Role::Treated && a.band == band) {
      near_sets[a.plant_id].push_back(&a.elevator_id);
    } else if (a.role == geo::Role::Control) {
      far_sets[a.plant_id].push_back(&a.elevator_id);
    }
  }

  PanelDataset out;
  std::set<std::string> plants;
  for (const auto& [plant, _] : near_sets) plants.insert(plant);
  for (const auto& [plant, _] : far_sets) plants.insert(plant);

  // Month universe of the whole panel; a populated group side missing one of
  // these months is an absent cell and gets counted.
  std::set<YearMonth> all_months;
  for (const auto& [id, series] : monthly.series) {
    for (const Observation& obs : series) all_months.insert(YearMonth::of(obs.date));
  }

  for (const std::string& plant : plants) {
    for (bool near : {false, true}) {
      const auto& sets = near ? near_sets : far_sets;
      auto it = sets.find(plant);
      if (it == sets.end()) continue;

      // month -> (sum, count) across the plant's elevators in this group
      std::map<YearMonth, std::pair<double, int>> cells;
      for (const std::string* elevator : it->second) {
        auto sit = monthly.series.find(*elevator);
        if (sit == monthly.series.end()) continue;
        for (const Observation& obs : sit->second) {
          auto& cell = cells[YearMonth::of(obs.date)];
          cell.first += obs.value;
          cell.second += 1;
        }
      }
      out.skipped_cells += static_cast<int>(all_months.size() - cells.size());
      for (const auto& [ym, cell] : cells) {
        out.rows.push_back({plant, ym, near, cell.first / cell.second});
      }
    }
  }

  std::sort(out.rows.begin(), out.rows.end(), [](const PanelRow& a, const PanelRow& b) {
    if (a.group_id != b.group_id) return a.group_id < b.group_id;
    if (a.month != b.month) return a.month < b.month;
    return a.near < b.near;  // far before near
  });
  return out;
}

PricePanel clip_range(const PricePanel& panel, Date from, Date to) {
  if (to < from) throw ValidationError("clip_range: empty date range");
  PricePanel out;
  for (const Date& d : panel.calendar) {
    if (d >= from && d <= to) out.calendar.push_back(d);
  }
  for (const auto& [id, series] : panel.series) {
    Series clipped;
    for (const Observation& obs : series) {
      if (obs.date >= from && obs.date <= to) clipped.push_back(obs);
    }
    if (!clipped.empty()) out.series.emplace(id, std::move(clipped));
  }
  return out;
}

PricePanel filter_most_active(const PricePanel& panel, int top_n) {
  if (top_n < 1) throw ValidationError("filter_most_active: top_n must be >= 1");
  std::vector<std::pair<std::size_t, const std::string*>> ranked;
  for (const auto& [id, series] : panel.series) ranked.emplace_back(series.size(), &id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  if (static_cast<std::size_t>(top_n) < ranked.size()) ranked.resize(top_n);

  PricePanel out;
  out.calendar = panel.calendar;
  for (const auto& [count, id] : ranked) out.series.emplace(*id, panel.series.at(*id));
  return out;
}

PricePanel load_cash_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t c_date = t.column("date");
  const std::size_t c_id = t.column("elevator_id");
  const std::size_t c_cash = t.column("cash_cents");

  PricePanel panel;
  std::set<Date> dates;
  for (const auto& row : t.rows) {
    Date d = Date::parse(row[c_date]);
    dates.insert(d);
    panel.series[row[c_id]].push_back({d, csv::parse_double(row[c_cash], "cash_cents")});
  }
  panel.calendar.assign(dates.begin(), dates.end());
  for (auto& [id, series] : panel.series) {
    std::sort(series.begin(), series.end(),
              [](const Observation& a, const Observation& b) { return a.date < b.date; });
    require_sorted_dates(series, id);
  }
  return panel;
}

std::vector<FuturesQuote> load_futures_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t c_date = t.column("date");
  const std::size_t c_id = t.column("contract_id");
  const std::size_t c_settle = t.column("settlement_cents");
  const std::size_t c_vol = t.column("volume");

  std::vector<FuturesQuote> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    out.push_back({Date::parse(row[c_date]), row[c_id],
                   csv::parse_double(row[c_settle], "settlement_cents"),
                   csv::parse_int(row[c_vol], "volume")});
  }
  return out;
}

std::vector<geo::Plant> load_plants_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t c_id = t.column("id");
  const std::size_t c_lat = t.column("lat");
  const std::size_t c_lon = t.column("lon");
  const std::size_t c_cap = t.column("capacity_kbu_day");
  const std::size_t c_status = t.column("status");
  const std::size_t c_start = t.column("start_month");
  const auto c_state = t.find_column("state");  // optional extension column

  std::vector<geo::Plant> out;
  for (const auto& row : t.rows) {
    geo::Plant p;
    p.id = row[c_id];
    p.location = {csv::parse_double(row[c_lat], "lat"), csv::parse_double(row[c_lon], "lon")};
    geo::validate(p.location);
    p.capacity_kbu_day = csv::parse_double(row[c_cap], "capacity_kbu_day");
    if (!(p.capacity_kbu_day > 0.0)) {
      throw ValidationError("plant '" + p.id + "' capacity must be > 0");
    }
    if (row[c_status] == "existing") {
      p.status = geo::PlantStatus::Existing;
    } else if (row[c_status] == "new") {
      p.status = geo::PlantStatus::New;
    } else {
      throw ValidationError("plant '" + p.id + "' status must be existing|new");
    }
    if (!row[c_start].empty()) p.start_month = YearMonth::parse(row[c_start]);
    if (p.status == geo::PlantStatus::New && !p.start_month) {
      throw ValidationError("new plant '" + p.id + "' needs start_month");
    }
    if (p.status == geo::PlantStatus::Existing && p.start_month) {
      throw ValidationError("existing plant '" + p.id + "' must not have start_month");
    }
    if (c_state) p.state = row[*c_state];
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<geo::Elevator> load_elevators_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t c_id = t.column("id");
  const std::size_t c_lat = t.column("lat");
  const std::size_t c_lon = t.column("lon");
  const std::size_t c_state = t.column("state");

  std::vector<geo::Elevator> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    geo::Elevator e;
    e.id = row[c_id];
    if (!seen.insert(e.id).second) {
      throw ValidationError("duplicate elevator id '" + e.id + "'");
    }
    e.location = {csv::parse_double(row[c_lat], "lat"), csv::parse_double(row[c_lon], "lon")};
    geo::validate(e.location);
    e.state = row[c_state];
    out.push_back(std::move(e));
  }
  return out;
}

std::string cash_csv_text(const PricePanel& panel) {
  std::string out = "date,elevator_id,cash_cents\n";
  for (const auto& [id, series] : panel.series) {
    for (const Observation& obs : series) {
      out += csv::join_row({obs.date.to_string(), id, csv::format_double(obs.value)});
    }
  }
  return out;
}

std::string futures_csv_text(const std::vector<FuturesQuote>& quotes) {
  std::string out = "date,contract_id,settlement_cents,volume\n";
  for (const FuturesQuote& q : quotes) {
    out += csv::join_row({q.date.to_string(), q.contract_id, csv::format_double(q.settlement),
                          std::to_string(q.volume)});
  }
  return out;
}

std::string plants_csv_text(const std::vector<geo::Plant>& plants) {
  std::string out = "id,lat,lon,capacity_kbu_day,status,start_month,state\n";
  for (const geo::Plant& p : plants) {
    out += csv::join_row({p.id, csv::format_double(p.location.lat),
                          csv::format_double(p.location.lon), csv::format_double(p.capacity_kbu_day),
                          p.status == geo::PlantStatus::New ? "new" : "existing",
                          p.start_month ? p.start_month->to_string() : "", p.state});
  }
  return out;
}

std::string elevators_csv_text(const std::vector<geo::Elevator>& elevators) {
  std::string out = "id,lat,lon,state\n";
  for (const geo::Elevator& e : elevators) {
    out += csv::join_row({e.id, csv::format_double(e.location.lat),
                          csv::format_double(e.location.lon), e.state});
  }
  return out;
}

std::string basis_csv_text(const BasisPanel& panel) {
  std::string out = panel.freq == Frequency::Daily ? "date,elevator_id,basis_cents\n"
                                                   : "month,elevator_id,basis_cents\n";
  for (const auto& [id, series] : panel.series) {
    for (const Observation& obs : series) {
      std::string period = panel.freq == Frequency::Daily ? obs.date.to_string()
                                                          : YearMonth::of(obs.date).to_string();
      out += csv::join_row({period, id, csv::format_double(obs.value)});
    }
  }
  return out;
}

BasisPanel load_basis_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  BasisPanel panel;
  std::size_t c_period;
  if (t.find_column("date")) {
    panel.freq = Frequency::Daily;
    c_period = t.column("date");
  } else {
    panel.freq = Frequency::Monthly;
    c_period = t.column("month");
  }
  const std::size_t c_id = t.column("elevator_id");
  const std::size_t c_basis = t.column("basis_cents");
  for (const auto& row : t.rows) {
    Date d = panel.freq == Frequency::Daily ? Date::parse(row[c_period])
                                            : YearMonth::parse(row[c_period]).first_day();
    panel.series[row[c_id]].push_back({d, csv::parse_double(row[c_basis], "basis_cents")});
  }
  for (auto& [id, series] : panel.series) {
    std::sort(series.begin(), series.end(),
              [](const Observation& a, const Observation& b) { return a.date < b.date; });
    require_sorted_dates(series, id);
  }
  return panel;
}

}  // namespace basislab::data
