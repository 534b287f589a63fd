#pragma once

#include <string>

namespace basislab::fuel {

struct FeedstockProfile {
  std::string name;
  double ci_score = 0.0;      // g CO2e per MJ, > 0
  double price_per_lb = 0.0;  // dollars per pound, >= 0
};

struct FuelConstants {
  double mj_per_gallon = 129.65;
  double lbs_feedstock_per_gallon = 8.125;
  double credit_price_per_ton = 59.0;  // dollars per metric ton CO2e
};

// Certified carbon-intensity midpoints.
FeedstockProfile soybean_oil();    // 55 g/MJ, $0.45/lb
FeedstockProfile yellow_grease();  // 20 g/MJ, $0.37/lb

// Dollars per gallon of extra LCFS credit earned by producing with b instead
// of a: ((a.ci - b.ci) * MJ/gal / 1e6 g per ton) * credit price.
double lcfs_credit_advantage(const FeedstockProfile& a, const FeedstockProfile& b,
                             const FuelConstants& k = {});

// Grams of CO2e avoided per gallon by using b instead of a.
double co2_saved_grams_per_gallon(const FeedstockProfile& a, const FeedstockProfile& b,
                                  const FuelConstants& k = {});

// Dollars per gallon by which b's feedstock bill undercuts a's:
// (a.price - b.price) * lbs per gallon.
double feedstock_cost_gap(const FeedstockProfile& a, const FeedstockProfile& b,
                          const FuelConstants& k = {});

}  // namespace basislab::fuel
