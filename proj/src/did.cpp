#include "basislab/did.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "basislab/errors.hpp"

namespace basislab::est {

namespace {

struct UnitRows {
  std::vector<const data::DidRow*> rows;
  bool has_pre = false;
  bool has_post = false;
};

}  // namespace

EstimateResult did_fe(const data::DidDataset& dataset, FeMethod method, DidDiagnostics* diag) {
  std::map<std::string, UnitRows> units;
  for (const data::DidRow& r : dataset.rows) {
    if (r.relative_day == 0) throw ValidationError("did_fe: relative day 0 must not appear");
    if ((r.post == 1) != (r.relative_day >= 1)) {
      throw ValidationError("did_fe: post flag inconsistent with relative day");
    }
    UnitRows& u = units[r.unit_id];
    if (!u.rows.empty() && u.rows.front()->treatment != r.treatment) {
      throw ValidationError("did_fe: treatment flag varies within unit '" + r.unit_id + "'");
    }
    u.rows.push_back(&r);
    (r.post ? u.has_post : u.has_pre) = true;
  }

  int dropped = 0;
  std::vector<const UnitRows*> usable;
  bool any_treated = false;
  bool any_control = false;
  for (const auto& [id, u] : units) {
    if (!u.has_pre || !u.has_post) {
      ++dropped;
      continue;
    }
    usable.push_back(&u);
    if (u.rows.front()->treatment) {
      any_treated = true;
    } else {
      any_control = true;
    }
  }
  if (diag) {
    diag->dropped_units = dropped;
    diag->n_units = static_cast<long>(usable.size());
  }
  if (!any_treated || !any_control) {
    throw EstimationError("did_fe: need both treated and control units with pre and post data");
  }

  long n = 0;
  for (const UnitRows* u : usable) n += static_cast<long>(u->rows.size());
  const long n_units = static_cast<long>(usable.size());

  EstimateResult result;
  if (method == FeMethod::Within) {
    // Demean y, post and treatment*post within unit; the unit effects and the
    // time-invariant treatment dummy drop out.
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    std::vector<int> cluster(n);
    long row = 0;
    int unit_idx = 0;
    for (const UnitRows* u : usable) {
      const double m = static_cast<double>(u->rows.size());
      double y_mean = 0.0, post_mean = 0.0, tp_mean = 0.0;
      for (const data::DidRow* r : u->rows) {
        y_mean += r->basis;
        post_mean += r->post;
        tp_mean += r->treatment * r->post;
      }
      y_mean /= m;
      post_mean /= m;
      tp_mean /= m;
      for (const data::DidRow* r : u->rows) {
        y(row) = r->basis - y_mean;
        X(row, 0) = r->post - post_mean;
        X(row, 1) = r->treatment * r->post - tp_mean;
        cluster[row] = unit_idx;
        ++row;
      }
      ++unit_idx;
    }

    DesignMatrix design{std::move(X), {"post", "treatment_post"}};
    OlsFit fit = ols(design, y);
    Eigen::MatrixXd cov = clustered_cov(design.X, fit.residuals, cluster);
    result = make_estimate("did_fe.beta3", fit.coef(1), std::sqrt(std::max(0.0, cov(1, 1))), n);
  } else {
    // Unit dummies, no intercept: y ~ post + treatment*post + 1{unit}.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 2 + n_units);
    Eigen::VectorXd y(n);
    std::vector<int> cluster(n);
    std::vector<std::string> labels = {"post", "treatment_post"};
    for (long j = 0; j < n_units; ++j) labels.push_back("unit_" + std::to_string(j));
    long row = 0;
    int unit_idx = 0;
    for (const UnitRows* u : usable) {
      for (const data::DidRow* r : u->rows) {
        y(row) = r->basis;
        X(row, 0) = r->post;
        X(row, 1) = r->treatment * r->post;
        X(row, 2 + unit_idx) = 1.0;
        cluster[row] = unit_idx;
        ++row;
      }
      ++unit_idx;
    }

    DesignMatrix design{std::move(X), std::move(labels)};
    OlsFit fit = ols(design, y);
    Eigen::MatrixXd cov = clustered_cov(design.X, fit.residuals, cluster);
    result = make_estimate("did_fe.beta3", fit.coef(1), std::sqrt(std::max(0.0, cov(1, 1))), n);
  }
  return result;
}

}  // namespace basislab::est
