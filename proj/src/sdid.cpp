#include "basislab/sdid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "basislab/errors.hpp"

namespace basislab::est {

namespace {

// Center each column over the rows; profiles the intercept out of the
// least-squares objective.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& M) {
  return M.rowwise() - M.colwise().mean();
}

Eigen::VectorXd center(const Eigen::VectorXd& v) {
  return v.array() - v.mean();
}

// Deterministic k-of-n sample without replacement (partial Fisher-Yates);
// std::shuffle is not reproducible across standard libraries.
std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng() % static_cast<uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Minimizer of x'Hx - 2c.x over the affine hull of the active face
// { x : sum_{i in S} x_i = 1, x_j = 0 otherwise }, via the bordered KKT
// system. f is bounded below on every affine set (it is a squared norm plus a
// ridge), so the system is always consistent; the complete orthogonal
// decomposition returns its minimum-norm solution even when H_SS is singular.
Eigen::VectorXd face_minimizer(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                               const std::vector<long>& active) {
  const long m = static_cast<long>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) kkt(i, j) = 2.0 * H(active[i], active[j]);
    kkt(i, m) = 1.0;
    kkt(m, i) = 1.0;
    rhs(i) = 2.0 * c(active[i]);
  }
  rhs(m) = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  return cod.solve(rhs).head(m);
}

}  // namespace

FrankWolfeResult simplex_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double ridge, const FrankWolfeOptions& options) {
  const long n = A.cols();
  if (n < 1) throw EstimationError("simplex_least_squares: empty simplex");
  if (A.rows() != b.size()) throw EstimationError("simplex_least_squares: dimension mismatch");
  if (ridge < 0.0) throw EstimationError("simplex_least_squares: negative ridge");

  // f(x) = x'Hx - 2 c.x + |b|^2 with H = A'A + ridge I; gradient 2(Hx - c).
  Eigen::MatrixXd H = A.transpose() * A;
  H.diagonal().array() += ridge;
  const Eigen::VectorXd c = A.transpose() * b;
  const double b2 = b.squaredNorm();

  auto objective = [&](const Eigen::VectorXd& v) { return v.dot(H * v) - 2.0 * c.dot(v) + b2; };

  FrankWolfeResult result;
  if (n == 1) {
    result.x = Eigen::VectorXd::Ones(1);
    result.objective = objective(result.x);
    return result;
  }

  // Fully corrective Frank-Wolfe: the toward vertex comes from the gradient
  // as usual and the duality gap certifies optimality, but each iteration
  // minimizes f exactly over the current active face (minor cycles walk back
  // to the simplex when a face solution leaves it). Plain away-step iterates
  // cannot certify an absolute 1e-10 gap within the iteration budget on
  // ill-conditioned instances; the corrective step terminates finitely.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  // An absolute gap below the representable precision of f is unattainable in
  // doubles; floor the tolerance at the data's own scale.
  const double f_scale =
      std::abs(x.dot(H * x)) + 2.0 * std::abs(c.dot(x)) + b2 + 1.0;
  const double tol =
      std::max(options.gap_tolerance, 8.0 * std::numeric_limits<double>::epsilon() * f_scale);

  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd grad = 2.0 * (H * x - c);
    long s = 0;
    grad.minCoeff(&s);
    gap = grad.dot(x) - grad(s);
    if (gap < tol) break;

    const double f_before = objective(x);

    // Correction set: the current support plus the new toward vertex.
    std::vector<long> active;
    for (long i = 0; i < n; ++i) {
      if (x(i) > 1e-14) active.push_back(i);
    }
    if (std::find(active.begin(), active.end(), s) == active.end()) active.push_back(s);

    // Minor cycles: move toward the face minimizer, dropping coordinates that
    // would go negative. Each cycle removes at least one coordinate.
    for (long cycle = 0; cycle <= n; ++cycle) {
      Eigen::VectorXd y_face = face_minimizer(H, c, active);
      double min_coord = y_face.size() > 0 ? y_face.minCoeff() : 1.0;
      if (min_coord >= -1e-13) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < active.size(); ++i) {
          next(active[i]) = std::max(0.0, y_face(static_cast<long>(i)));
        }
        x = next / next.sum();
        break;
      }
      // Step from x toward y until the first coordinate hits zero.
      double theta = 1.0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double xi = x(active[i]);
        const double yi = y_face(static_cast<long>(i));
        if (yi < 0.0 && xi > yi) theta = std::min(theta, xi / (xi - yi));
      }
      Eigen::VectorXd blended = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double v = (1.0 - theta) * x(active[i]) + theta * y_face(static_cast<long>(i));
        blended(active[i]) = std::max(0.0, v);
      }
      x = blended / blended.sum();
      std::vector<long> still_active;
      for (long i : active) {
        if (x(i) > 1e-14) still_active.push_back(i);
      }
      if (still_active.empty()) still_active.push_back(active.front());
      active = std::move(still_active);
    }

    // A correction that made no headway (the new vertex can get a negative
    // face weight and a zero-length blend) falls back to the exact line
    // search along the toward direction, which strictly decreases f while
    // the gap is positive.
    if (objective(x) >= f_before) {
      Eigen::VectorXd d = -x;
      d(s) += 1.0;
      const double curvature = d.dot(H * d);
      const double gamma = curvature > 0.0 ? std::clamp(gap / (2.0 * curvature), 0.0, 1.0) : 1.0;
      x += gamma * d;
      x = x.cwiseMax(0.0);
      x /= x.sum();
    }
  }

  if (gap >= tol) {
    throw EstimationError("simplex_least_squares: no convergence after " +
                          std::to_string(options.max_iterations) +
                          " iterations (duality gap " + std::to_string(gap) + ")");
  }

  // Numerical hygiene: exact simplex membership.
  x = x.cwiseMax(0.0);
  x /= x.sum();

  result.x = x;
  result.objective = objective(x);
  result.gap = gap;
  result.iterations = it;
  return result;
}

SdidWeights sdid_weights(const Eigen::MatrixXd& Y_control_pre,
                         const Eigen::VectorXd& y_treated_pre_mean,
                         const Eigen::VectorXd& y_control_post_mean, double zeta,
                         const FrankWolfeOptions& options) {
  const long n_controls = Y_control_pre.rows();
  const long t_pre = Y_control_pre.cols();
  if (n_controls < 1) throw EstimationError("sdid_weights: need at least one control");
  if (t_pre < 2) throw EstimationError("sdid_weights: need at least two pre periods");
  if (y_treated_pre_mean.size() != t_pre || y_control_post_mean.size() != n_controls) {
    throw EstimationError("sdid_weights: dimension mismatch");
  }
  if (zeta < 0.0) throw EstimationError("sdid_weights: negative regularization");

  SdidWeights w;

  // Unit weights: rows are pre periods, columns are control units.
  {
    Eigen::MatrixXd A = Y_control_pre.transpose();
    const double ridge = zeta * zeta * static_cast<double>(t_pre);
    FrankWolfeResult fw =
        simplex_least_squares(center_columns(A), center(y_treated_pre_mean), ridge, options);
    w.unit_weights = fw.x;
    w.omega0 = (y_treated_pre_mean - A * fw.x).mean();
  }

  // Time weights: rows are control units, columns are pre periods.
  {
    FrankWolfeResult fw = simplex_least_squares(center_columns(Y_control_pre),
                                                center(y_control_post_mean), 0.0, options);
    w.time_weights = fw.x;
    w.lambda0 = (y_control_post_mean - Y_control_pre * fw.x).mean();
  }
  return w;
}

double sdid_default_zeta(const Eigen::MatrixXd& Y_control_pre, long n_treated, long t_post) {
  const long n_controls = Y_control_pre.rows();
  const long t_pre = Y_control_pre.cols();
  if (n_controls < 1 || t_pre < 2 || n_treated < 1 || t_post < 1) return 0.0;

  // sd of first differences of control pre-treatment outcomes.
  const long n_diffs = n_controls * (t_pre - 1);
  double mean = 0.0;
  for (long c = 0; c < n_controls; ++c) {
    for (long t = 0; t + 1 < t_pre; ++t) mean += Y_control_pre(c, t + 1) - Y_control_pre(c, t);
  }
  mean /= static_cast<double>(n_diffs);
  double var = 0.0;
  for (long c = 0; c < n_controls; ++c) {
    for (long t = 0; t + 1 < t_pre; ++t) {
      const double d = Y_control_pre(c, t + 1) - Y_control_pre(c, t) - mean;
      var += d * d;
    }
  }
  var /= static_cast<double>(n_diffs);
  return std::pow(static_cast<double>(n_treated) * static_cast<double>(t_post), 0.25) *
         std::sqrt(var);
}

SdidPanel pivot_did(const data::DidDataset& dataset) {
  std::map<int, int> day_index;
  for (const data::DidRow& r : dataset.rows) {
    if (r.relative_day == 0) throw ValidationError("pivot_did: relative day 0 must not appear");
    day_index.emplace(r.relative_day, 0);
  }
  int idx = 0;
  int t_pre = 0;
  for (auto& [day, i] : day_index) {
    i = idx++;
    if (day < 0) ++t_pre;
  }
  const int t_all = idx;

  struct UnitAcc {
    std::vector<double> values;
    std::vector<uint8_t> present;
    uint8_t treated = 0;
  };
  std::map<std::string, UnitAcc> acc;
  for (const data::DidRow& r : dataset.rows) {
    UnitAcc& u = acc[r.unit_id];
    if (u.values.empty()) {
      u.values.assign(t_all, 0.0);
      u.present.assign(t_all, 0);
      u.treated = static_cast<uint8_t>(r.treatment);
    }
    const int j = day_index.at(r.relative_day);
    u.values[j] = r.basis;
    u.present[j] = 1;
  }

  SdidPanel panel;
  panel.t_pre = t_pre;
  std::vector<const UnitAcc*> keep;
  for (const auto& [id, u] : acc) {
    if (std::all_of(u.present.begin(), u.present.end(), [](uint8_t p) { return p != 0; })) {
      keep.push_back(&u);
      panel.units.push_back(id);
      panel.treated.push_back(u.treated);
    } else {
      ++panel.dropped_units;
    }
  }
  panel.Y.resize(static_cast<long>(keep.size()), t_all);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (int j = 0; j < t_all; ++j) panel.Y(static_cast<long>(i), j) = keep[i]->values[j];
  }
  return panel;
}

double sdid_att_with_weights(const SdidPanel& panel, const SdidWeights& weights) {
  const long n_units = panel.Y.rows();
  const long t_all = panel.Y.cols();
  const long t_pre = panel.t_pre;
  const long t_post = t_all - t_pre;

  std::vector<long> treated, controls;
  for (long i = 0; i < n_units; ++i) {
    (panel.treated[static_cast<std::size_t>(i)] ? treated : controls).push_back(i);
  }
  if (treated.empty() || controls.empty()) {
    throw EstimationError("sdid_att: need both treated and control units");
  }
  if (weights.unit_weights.size() != static_cast<long>(controls.size()) ||
      weights.time_weights.size() != t_pre) {
    throw EstimationError("sdid_att: weight dimensions do not match panel");
  }

  double treated_post = 0.0, treated_pre = 0.0;
  for (long i : treated) {
    treated_post += panel.Y.row(i).tail(t_post).mean();
    treated_pre += panel.Y.row(i).head(t_pre).dot(weights.time_weights);
  }
  treated_post /= static_cast<double>(treated.size());
  treated_pre /= static_cast<double>(treated.size());

  double control_post = 0.0, control_pre = 0.0;
  for (std::size_t c = 0; c < controls.size(); ++c) {
    const double w = weights.unit_weights(static_cast<long>(c));
    control_post += w * panel.Y.row(controls[c]).tail(t_post).mean();
    control_pre += w * panel.Y.row(controls[c]).head(t_pre).dot(weights.time_weights);
  }

  return (treated_post - treated_pre) - (control_post - control_pre);
}

namespace {

struct SdidCore {
  double att = 0.0;
  SdidWeights weights;
};

SdidCore sdid_point_estimate(const SdidPanel& panel, std::optional<double> zeta,
                             const FrankWolfeOptions& solver) {
  const long t_pre = panel.t_pre;
  const long t_all = panel.Y.cols();
  const long t_post = t_all - t_pre;

  std::vector<long> treated, controls;
  for (long i = 0; i < panel.Y.rows(); ++i) {
    (panel.treated[static_cast<std::size_t>(i)] ? treated : controls).push_back(i);
  }
  if (treated.empty()) throw EstimationError("sdid_att: zero treated units");
  if (controls.empty()) throw EstimationError("sdid_att: zero control units");
  if (t_pre < 2 || t_post < 1) {
    throw EstimationError("sdid_att: need >= 2 pre periods and >= 1 post period");
  }

  Eigen::MatrixXd Y_co_pre(static_cast<long>(controls.size()), t_pre);
  Eigen::VectorXd y_co_post(static_cast<long>(controls.size()));
  for (std::size_t c = 0; c < controls.size(); ++c) {
    Y_co_pre.row(static_cast<long>(c)) = panel.Y.row(controls[c]).head(t_pre);
    y_co_post(static_cast<long>(c)) = panel.Y.row(controls[c]).tail(t_post).mean();
  }
  Eigen::VectorXd y_tr_pre = Eigen::VectorXd::Zero(t_pre);
  for (long i : treated) y_tr_pre += panel.Y.row(i).head(t_pre).transpose();
  y_tr_pre /= static_cast<double>(treated.size());

  const double z =
      zeta ? *zeta : sdid_default_zeta(Y_co_pre, static_cast<long>(treated.size()), t_post);

  SdidCore core;
  core.weights = sdid_weights(Y_co_pre, y_tr_pre, y_co_post, z, solver);
  core.att = sdid_att_with_weights(panel, core.weights);
  return core;
}

}  // namespace

EstimateResult sdid_att(const SdidPanel& panel, const SdidOptions& options) {
  SdidCore core = sdid_point_estimate(panel, options.zeta, options.solver);

  double se = 0.0;
  if (options.se == SdidSe::Placebo) {
    std::vector<long> controls;
    long n_treated = 0;
    for (long i = 0; i < panel.Y.rows(); ++i) {
      if (panel.treated[static_cast<std::size_t>(i)]) {
        ++n_treated;
      } else {
        controls.push_back(i);
      }
    }
    const long n_controls = static_cast<long>(controls.size());
    if (n_controls <= n_treated) {
      throw EstimationError("sdid_att: placebo variance needs more controls than treated units");
    }

    // Reassign treatment among the controls and re-estimate; the dispersion
    // of placebo effects estimates the sampling variance.
    SdidPanel donor;
    donor.t_pre = panel.t_pre;
    donor.Y.resize(n_controls, panel.Y.cols());
    for (long c = 0; c < n_controls; ++c) donor.Y.row(c) = panel.Y.row(controls[c]);
    donor.units.resize(static_cast<std::size_t>(n_controls));

    std::mt19937_64 rng(options.seed);
    std::vector<double> taus;
    taus.reserve(static_cast<std::size_t>(options.placebo_reps));
    for (int rep = 0; rep < options.placebo_reps; ++rep) {
      std::vector<int> chosen = sample_without_replacement(static_cast<int>(n_controls),
                                                           static_cast<int>(n_treated), rng);
      donor.treated.assign(static_cast<std::size_t>(n_controls), 0);
      for (int i : chosen) donor.treated[static_cast<std::size_t>(i)] = 1;
      taus.push_back(sdid_point_estimate(donor, options.zeta, options.solver).att);
    }
    double mean = 0.0;
    for (double t : taus) mean += t;
    mean /= static_cast<double>(taus.size());
    double var = 0.0;
    for (double t : taus) var += (t - mean) * (t - mean);
    var /= static_cast<double>(taus.size());
    se = std::sqrt(var);
  }

  EstimateResult r = make_estimate("sdid.att", core.att, se,
                                   panel.Y.rows() * panel.Y.cols());
  return r;
}

}  // namespace basislab::est
