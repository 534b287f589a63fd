#include <doctest.h>

#include "basislab/errors.hpp"
#include "basislab/feedstock.hpp"
#include "support/oracles.hpp"

using namespace basislab::fuel;
using oracles::near_abs;

TEST_CASE("credit advantage reproduces the certified-midpoint arithmetic") {
  // 35 g/MJ saved x 129.65 MJ/gal = 4537.75 g = 0.00453775 t; x $59/t.
  const double grams = co2_saved_grams_per_gallon(soybean_oil(), yellow_grease());
  CHECK(near_abs(grams, 4537.75, 1e-9));
  const double advantage = lcfs_credit_advantage(soybean_oil(), yellow_grease());
  CHECK(near_abs(advantage, 0.26772725, 1e-9));
}

TEST_CASE("credit advantage edge cases") {
  FeedstockProfile a{"a", 40.0, 0.5};
  FeedstockProfile b{"b", 40.0, 0.5};
  CHECK(lcfs_credit_advantage(a, b) == 0.0);

  FuelConstants doubled;
  doubled.credit_price_per_ton *= 2.0;
  CHECK(near_abs(lcfs_credit_advantage(soybean_oil(), yellow_grease(), doubled),
                 2.0 * lcfs_credit_advantage(soybean_oil(), yellow_grease()), 1e-15));
}

TEST_CASE("cost gap reproduces the 65 cent figure") {
  CHECK(near_abs(feedstock_cost_gap(soybean_oil(), yellow_grease()), 0.65, 1e-12));

  FeedstockProfile a{"a", 50.0, 0.41};  // half the price gap
  CHECK(near_abs(feedstock_cost_gap(a, yellow_grease()), 0.325, 1e-12));
  CHECK(feedstock_cost_gap(yellow_grease(), yellow_grease()) == 0.0);
}

TEST_CASE("both operations are antisymmetric") {
  const auto a = soybean_oil();
  const auto b = yellow_grease();
  CHECK(lcfs_credit_advantage(a, b) == -lcfs_credit_advantage(b, a));
  CHECK(feedstock_cost_gap(a, b) == -feedstock_cost_gap(b, a));
}

TEST_CASE("invalid profiles and constants are rejected") {
  FeedstockProfile bad_ci{"bad", 0.0, 0.4};
  CHECK_THROWS_AS(lcfs_credit_advantage(bad_ci, yellow_grease()), basislab::ValidationError);
  FeedstockProfile bad_price{"bad", 55.0, -0.1};
  CHECK_THROWS_AS(feedstock_cost_gap(bad_price, yellow_grease()), basislab::ValidationError);
  FuelConstants bad_constants;
  bad_constants.mj_per_gallon = 0.0;
  CHECK_THROWS_AS(lcfs_credit_advantage(soybean_oil(), yellow_grease(), bad_constants),
                  basislab::ValidationError);
}
