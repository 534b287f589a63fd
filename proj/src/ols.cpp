#include <algorithm>
#include <cmath>

#include "basislab/errors.hpp"
#include "basislab/estimators.hpp"

namespace basislab::est {

namespace {

// Two-sided p from the standard normal, via the complementary error function.
double normal_p_value(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

}  // namespace

EstimateResult make_estimate(std::string label, double coefficient, double se, long n_obs) {
  EstimateResult r;
  r.label = std::move(label);
  r.coefficient = coefficient;
  r.se = se;
  r.t_stat = se > 0.0 ? coefficient / se : 0.0;
  r.p_value = se > 0.0 ? normal_p_value(r.t_stat) : 1.0;
  r.ci_lo = coefficient - 1.96 * se;
  r.ci_hi = coefficient + 1.96 * se;
  r.n_obs = n_obs;
  return r;
}

OlsFit ols(const DesignMatrix& design, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd& X = design.X;
  const long n = X.rows();
  const long k = X.cols();
  if (n != y.size()) throw EstimationError("ols: X rows and y length differ");
  if (n <= k) throw EstimationError("ols: need more observations than regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    // The pivot order puts the dependent columns last; report those.
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (long i = qr.rank(); i < k; ++i) {
      if (!names.empty()) names += ", ";
      long col = perm(i);
      names += col < static_cast<long>(design.labels.size()) ? design.labels[col]
                                                             : std::to_string(col);
    }
    throw EstimationError("ols: design matrix is rank deficient (collinear columns: " + names +
                          ")");
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);

  // (X'X)^-1 from the R factor: X'X = R'R up to the column permutation.
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv = R.inverse();
  Eigen::MatrixXd perm = qr.colsPermutation();
  fit.xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();
  fit.cov = fit.sigma2 * fit.xtx_inv;
  return fit;
}

}  // namespace basislab::est
