#pragma once

#include "basislab/data.hpp"
#include "basislab/estimators.hpp"

namespace basislab::est {

// How the unit fixed effects are absorbed. Both routes must agree on the
// interaction coefficient.
enum class FeMethod { Within, Dummies };

struct DidDiagnostics {
  int dropped_units = 0;  // units observed in only one post regime
  long n_units = 0;
};

// Event-window DiD with unit fixed effects:
//   y = b0 + b1*treatment + b2*post + b3*(treatment*post) + unit effect.
// Returns b3 (the ATT) with standard errors clustered by unit. Units lacking
// either regime are dropped and counted in `diag`.
EstimateResult did_fe(const data::DidDataset& dataset, FeMethod method = FeMethod::Within,
                      DidDiagnostics* diag = nullptr);

}  // namespace basislab::est
