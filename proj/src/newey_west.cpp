#include <algorithm>
#include <cmath>

#include "basislab/errors.hpp"
#include "basislab/estimators.hpp"

namespace basislab::est {

Eigen::MatrixXd newey_west_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                               int lag) {
  const long n = X.rows();
  const long k = X.cols();
  if (residuals.size() != n) throw EstimationError("newey_west_cov: residual length mismatch");
  if (lag < 0) throw EstimationError("newey_west_cov: lag must be >= 0");
  if (lag >= n) throw EstimationError("newey_west_cov: lag must be < number of observations");

  // Score rows x_t * u_t turn each Gamma_l into a single matrix product.
  Eigen::MatrixXd scores = X.array().colwise() * residuals.array();

  Eigen::MatrixXd S = scores.transpose() * scores;  // Gamma_0
  for (int l = 1; l <= lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (lag + 1.0);  // Bartlett
    Eigen::MatrixXd gamma = scores.bottomRows(n - l).transpose() * scores.topRows(n - l);
    S += w * (gamma + gamma.transpose());
  }

  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success) {
    throw EstimationError("newey_west_cov: X'X not factorizable");
  }
  Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd cov = bread * S * bread;
  return 0.5 * (cov + cov.transpose());
}

int newey_west_default_lag(int t_periods) {
  if (t_periods < 1) throw EstimationError("newey_west_default_lag: need T >= 1");
  int lag = static_cast<int>(std::floor(4.0 * std::pow(t_periods / 100.0, 2.0 / 9.0)));
  return std::max(0, std::min(lag, t_periods - 1));
}

Eigen::MatrixXd clustered_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                              const std::vector<int>& clusters) {
  const long n = X.rows();
  const long k = X.cols();
  if (static_cast<long>(clusters.size()) != n) {
    throw EstimationError("clustered_cov: cluster index length mismatch");
  }
  int n_clusters = 0;
  for (int c : clusters) n_clusters = std::max(n_clusters, c + 1);
  if (n_clusters < 2) throw EstimationError("clustered_cov: need at least two clusters");

  // Meat = sum_g s_g s_g' with s_g the within-cluster score sum.
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, k);
  for (long i = 0; i < n; ++i) {
    scores.row(clusters[i]) += residuals(i) * X.row(i);
  }
  Eigen::MatrixXd meat = scores.transpose() * scores;

  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success) {
    throw EstimationError("clustered_cov: X'X not factorizable");
  }
  Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  const double correction = static_cast<double>(n_clusters) / (n_clusters - 1.0);
  Eigen::MatrixXd cov = correction * bread * meat * bread;
  return 0.5 * (cov + cov.transpose());
}

}  // namespace basislab::est
