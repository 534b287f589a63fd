#include "basislab/feedstock.hpp"

#include "basislab/errors.hpp"

namespace basislab::fuel {

namespace {

void check(const FeedstockProfile& p) {
  if (!(p.ci_score > 0.0)) throw ValidationError("feedstock '" + p.name + "': ci_score must be > 0");
  if (p.price_per_lb < 0.0) throw ValidationError("feedstock '" + p.name + "': negative price");
}

void check(const FuelConstants& k) {
  if (!(k.mj_per_gallon > 0.0 && k.lbs_feedstock_per_gallon > 0.0 && k.credit_price_per_ton > 0.0)) {
    throw ValidationError("fuel constants must be strictly positive");
  }
}

constexpr double kGramsPerMetricTon = 1e6;

}  // namespace

FeedstockProfile soybean_oil() { return {"soybean_oil", 55.0, 0.45}; }
FeedstockProfile yellow_grease() { return {"yellow_grease", 20.0, 0.37}; }

double co2_saved_grams_per_gallon(const FeedstockProfile& a, const FeedstockProfile& b,
                                  const FuelConstants& k) {
  check(a);
  check(b);
  check(k);
  return (a.ci_score - b.ci_score) * k.mj_per_gallon;
}

double lcfs_credit_advantage(const FeedstockProfile& a, const FeedstockProfile& b,
                             const FuelConstants& k) {
  return co2_saved_grams_per_gallon(a, b, k) / kGramsPerMetricTon * k.credit_price_per_ton;
}

double feedstock_cost_gap(const FeedstockProfile& a, const FeedstockProfile& b,
                          const FuelConstants& k) {
  check(a);
  check(b);
  check(k);
  return (a.price_per_lb - b.price_per_lb) * k.lbs_feedstock_per_gallon;
}

}  // namespace basislab::fuel
