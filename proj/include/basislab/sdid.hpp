#pragma once

#include <cstdint>
#include <optional>

#include "basislab/data.hpp"
#include "basislab/estimators.hpp"

namespace basislab::est {

// Synthetic-control weights. Unit weights live on the control simplex, time
// weights on the pre-period simplex; the intercepts absorb level offsets.
struct SdidWeights {
  Eigen::VectorXd unit_weights;  // omega, one per control unit
  Eigen::VectorXd time_weights;  // lambda, one per pre period
  double omega0 = 0.0;
  double lambda0 = 0.0;
};

struct FrankWolfeOptions {
  int max_iterations = 10000;
  double gap_tolerance = 1e-10;
};

struct FrankWolfeResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;  // duality gap at exit
  int iterations = 0;
};

// min_{x on simplex} ||A x - b||^2 + ridge ||x||^2, by Frank-Wolfe with away
// steps and exact line search. Throws EstimationError (reporting the achieved
// gap) when the duality gap has not reached tolerance within the iteration
// budget.
FrankWolfeResult simplex_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double ridge, const FrankWolfeOptions& options = {});

// Unit weights solve
//   min_{w0, w on simplex} sum_pre (w0 + w . Y_pre[.,t] - ybar_treated[t])^2
//                          + zeta^2 * T_pre * ||w||^2,
// time weights the analogous problem matching pre-period control outcomes to
// post-period control means, with zero regularization.
// Y_control_pre is controls x pre-periods.
SdidWeights sdid_weights(const Eigen::MatrixXd& Y_control_pre,
                         const Eigen::VectorXd& y_treated_pre_mean,
                         const Eigen::VectorXd& y_control_post_mean, double zeta,
                         const FrankWolfeOptions& options = {});

// zeta = (N_treated * T_post)^(1/4) * sd of first differences of control
// pre-treatment outcomes.
double sdid_default_zeta(const Eigen::MatrixXd& Y_control_pre, long n_treated, long t_post);

// Balanced unit-by-period outcome matrix; the first t_pre columns are the
// pre-treatment periods.
struct SdidPanel {
  Eigen::MatrixXd Y;               // units x periods
  std::vector<uint8_t> treated;    // one flag per unit (row)
  std::vector<std::string> units;  // row labels
  int t_pre = 0;
  int dropped_units = 0;  // units removed to balance the matrix
};

// Pivots the event-window sample into units x relative-day form, dropping
// units with incomplete coverage.
SdidPanel pivot_did(const data::DidDataset& dataset);

enum class SdidSe { None, Placebo };

struct SdidOptions {
  std::optional<double> zeta;  // default: sdid_default_zeta
  SdidSe se = SdidSe::Placebo;
  int placebo_reps = 200;
  uint64_t seed = 20240930;
  FrankWolfeOptions solver;
};

// Point estimate for fixed weights: the (omega, lambda)-weighted double
// difference of treated vs control, post vs pre.
double sdid_att_with_weights(const SdidPanel& panel, const SdidWeights& weights);

// Full SDID: fits weights, forms the weighted double difference, and (unless
// disabled) attaches a placebo-variance standard error.
EstimateResult sdid_att(const SdidPanel& panel, const SdidOptions& options = {});

}  // namespace basislab::est
