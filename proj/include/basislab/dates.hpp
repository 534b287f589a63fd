#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace basislab {

// Calendar day, stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
 public:
  Date() = default;
  Date(int year, int month, int day);

  static Date from_serial(int days) {
    Date d;
    d.serial_ = days;
    return d;
  }
  // Parses strict ISO "YYYY-MM-DD"; throws ValidationError on malformed input.
  static Date parse(std::string_view iso);

  int serial() const { return serial_; }
  int year() const;
  int month() const;  // 1..12
  int day() const;    // 1..31

  std::string to_string() const;  // "YYYY-MM-DD"

  Date operator+(int days) const { return from_serial(serial_ + days); }
  Date operator-(int days) const { return from_serial(serial_ - days); }
  int operator-(const Date& other) const { return serial_ - other.serial_; }
  auto operator<=>(const Date&) const = default;

 private:
  int serial_ = 0;
};

// Calendar month, e.g. 2023-11.
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  static YearMonth of(const Date& d) { return {d.year(), d.month()}; }
  // Parses "YYYY-MM"; throws ValidationError on malformed input.
  static YearMonth parse(std::string_view s);

  Date first_day() const { return Date(year, month, 1); }
  Date last_day() const;
  YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }
  int index() const { return year * 12 + (month - 1); }  // total months, for spans

  std::string to_string() const;  // "YYYY-MM"
  auto operator<=>(const YearMonth&) const = default;
};

}  // namespace basislab
