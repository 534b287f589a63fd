#include "basislab/dates.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "basislab/errors.hpp"

namespace basislab {

namespace {

namespace chr = std::chrono;

chr::year_month_day ymd_of(int serial) {
  return chr::year_month_day{chr::sys_days{chr::days{serial}}};
}

int parse_int(std::string_view s, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError(std::string("invalid ") + what + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Date::Date(int year, int month, int day) {
  chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                          chr::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    throw ValidationError(std::string("invalid calendar date: ") + buf);
  }
  serial_ = static_cast<int>(chr::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw ValidationError("invalid date (want YYYY-MM-DD): '" + std::string(iso) + "'");
  }
  return Date(parse_int(iso.substr(0, 4), "year"), parse_int(iso.substr(5, 2), "month"),
              parse_int(iso.substr(8, 2), "day"));
}

int Date::year() const { return static_cast<int>(ymd_of(serial_).year()); }
int Date::month() const { return static_cast<int>(static_cast<unsigned>(ymd_of(serial_).month())); }
int Date::day() const { return static_cast<int>(static_cast<unsigned>(ymd_of(serial_).day())); }

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year(), month(), day());
  return buf;
}

YearMonth YearMonth::parse(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') {
    throw ValidationError("invalid month (want YYYY-MM): '" + std::string(s) + "'");
  }
  YearMonth ym{parse_int(s.substr(0, 4), "year"), parse_int(s.substr(5, 2), "month")};
  if (ym.month < 1 || ym.month > 12) {
    throw ValidationError("invalid month (want YYYY-MM): '" + std::string(s) + "'");
  }
  return ym;
}

Date YearMonth::last_day() const { return next().first_day() - 1; }

std::string YearMonth::to_string() const {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

}  // namespace basislab
