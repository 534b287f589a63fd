#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace basislab::est {

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> labels;  // one per column
};

// One reported coefficient. ci95 = coefficient +/- 1.96*se; p-values use the
// normal approximation.
struct EstimateResult {
  std::string label;
  double coefficient = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  long n_obs = 0;
};

EstimateResult make_estimate(std::string label, double coefficient, double se, long n_obs);

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd cov;      // conventional sigma^2 (X'X)^-1
  Eigen::MatrixXd xtx_inv;  // (X'X)^-1, reused by robust covariances
  double sigma2 = 0.0;      // RSS / (n - k)
  long n = 0;
  long k = 0;
};

// Least squares via column-pivoted Householder QR. Throws EstimationError on
// rank deficiency, naming the collinear columns.
OlsFit ols(const DesignMatrix& design, const Eigen::VectorXd& y);

// Bartlett-kernel HAC covariance (Newey-West):
//   S = G0 + sum_{l=1..L} (1 - l/(L+1)) (G_l + G_l'),
//   cov = (X'X)^-1 S (X'X)^-1.
// L = 0 reduces to the White heteroskedasticity-robust covariance. Rows must
// already be time-ordered; throws EstimationError when L >= #rows or L < 0.
Eigen::MatrixXd newey_west_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, int lag);

// L = floor(4 * (T/100)^(2/9)) with T time periods.
int newey_west_default_lag(int t_periods);

// Cluster-robust covariance with the G/(G-1) correction; clusters gives each
// row's cluster index in [0, n_clusters).
Eigen::MatrixXd clustered_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                              const std::vector<int>& clusters);

}  // namespace basislab::est
