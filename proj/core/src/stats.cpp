#include "stmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stmc/csv.hpp"
#include "stmc/nullmodel.hpp"

namespace stmc::stats {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Regressand r) {
  return r == Regressand::bug_density ? "bug_density" : "churn";
}

Regressand parse_regressand(std::string_view token) {
  if (token == "bug_density") return Regressand::bug_density;
  if (token == "churn") return Regressand::churn;
  throw ConfigError("unknown quality '" + std::string(token) + "'");
}

std::string_view to_string(FitKind k) {
  switch (k) {
    case FitKind::ols: return "ols";
    case FitKind::poisson: return "poisson";
    case FitKind::quasipoisson: return "quasipoisson";
    case FitKind::elasticnet: return "elasticnet";
  }
  return "?";
}

std::string_view to_string(Family f) {
  return f == Family::gaussian ? "gaussian" : "poisson";
}

// ---------------------------------------------------------------------------
// Preparation

std::optional<CovariateTable> prepare(const RawTable& raw,
                                      const PrepareOptions& options,
                                      Report& report) {
  const std::string source = "window " + std::to_string(raw.window_index);
  const std::size_t p = raw.columns.size();
  std::vector<std::size_t> keep_rows;
  for (std::size_t i = 0; i < raw.cells.size(); ++i) {
    const auto& row = raw.cells[i];
    if (std::any_of(row.begin(), row.end(),
                    [](const auto& c) { return !c.has_value(); }))
      continue;
    if (!std::isfinite(raw.response[i])) continue;
    if (options.drop_zero_response && raw.response[i] == 0) continue;
    keep_rows.push_back(i);
  }
  if (keep_rows.size() < options.min_rows) {
    report.warn(source, 0,
                "only " + std::to_string(keep_rows.size()) +
                    " usable rows; window skipped");
    return std::nullopt;
  }

  const auto n = static_cast<Index>(keep_rows.size());
  MatrixXd x(n, static_cast<Index>(p));
  VectorXd y(n);
  for (Index r = 0; r < n; ++r) {
    const auto src = keep_rows[static_cast<std::size_t>(r)];
    y(r) = raw.response[src];
    for (std::size_t c = 0; c < p; ++c) {
      double v = *raw.cells[src][c];
      if (raw.log_columns[c]) v = std::log1p(v);
      x(r, static_cast<Index>(c)) = v;
    }
  }
  if ((y.array() == y(0)).all()) {
    report.warn(source, 0, "constant response; window skipped");
    return std::nullopt;
  }

  CovariateTable t;
  t.window_index = raw.window_index;
  t.regressand = raw.regressand;
  for (auto r : keep_rows) t.row_ids.push_back(raw.row_ids[r]);
  std::vector<Index> keep_cols;
  for (std::size_t c = 0; c < p; ++c) {
    auto col = x.col(static_cast<Index>(c));
    if ((col.array() == col(0)).all()) {
      report.warn(source, 0, "constant column " + raw.columns[c] + " dropped");
      continue;
    }
    keep_cols.push_back(static_cast<Index>(c));
    t.columns.push_back(raw.columns[c]);
    t.log_columns.push_back(raw.log_columns[c]);
  }
  t.x.resize(n, static_cast<Index>(keep_cols.size()));
  for (std::size_t j = 0; j < keep_cols.size(); ++j)
    t.x.col(static_cast<Index>(j)) = x.col(keep_cols[j]);
  t.y = std::move(y);
  return t;
}

std::pair<CovariateTable, Scaling> standardize(const CovariateTable& t) {
  CovariateTable out = t;
  Scaling s;
  const double n = static_cast<double>(t.rows());
  s.mean = t.x.colwise().mean().transpose();
  s.sd.resize(t.cols());
  for (Index j = 0; j < t.cols(); ++j) {
    VectorXd c = t.x.col(j).array() - s.mean(j);
    double sd = std::sqrt(c.squaredNorm() / n);
    s.sd(j) = sd > 0 ? sd : 1.0;
    out.x.col(j) = c / s.sd(j);
  }
  return {std::move(out), std::move(s)};
}

// ---------------------------------------------------------------------------
// Least squares and GLMs

namespace {

MatrixXd with_intercept(const MatrixXd& x) {
  MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

std::string column_name(const CovariateTable& t, Index design_col) {
  return design_col == 0 ? std::string("(intercept)")
                         : t.columns[static_cast<std::size_t>(design_col - 1)];
}

[[noreturn]] void rank_error(const CovariateTable& t,
                             const Eigen::ColPivHouseholderQR<MatrixXd>& qr) {
  std::string names;
  const auto& perm = qr.colsPermutation().indices();
  for (Index k = qr.rank(); k < perm.size(); ++k) {
    if (!names.empty()) names += ", ";
    names += column_name(t, perm(k));
  }
  throw DataError("window " + std::to_string(t.window_index) +
                  ": design is rank deficient; linearly dependent columns: " +
                  names + " (use the elastic net instead)");
}

// (D^T D)^-1 from a full-rank pivoted QR of D.
MatrixXd unscaled_covariance(const Eigen::ColPivHouseholderQR<MatrixXd>& qr) {
  const Index p = qr.cols();
  MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(p, p));
  MatrixXd cov_perm = rinv * rinv.transpose();
  const auto& perm = qr.colsPermutation();
  return perm * cov_perm * perm.transpose();
}

void fill_inference(ModelFit& fit, const VectorXd& var, double quantile,
                    const auto& tail_p) {
  const Index k = fit.beta.size();
  fit.se.resize(k);
  fit.ci_lo.resize(k);
  fit.ci_hi.resize(k);
  fit.p_values.resize(k);
  for (Index j = 0; j < k; ++j) {
    double se = std::sqrt(std::max(0.0, var(j)));
    fit.se(j) = se;
    fit.ci_lo(j) = fit.beta(j) - quantile * se;
    fit.ci_hi(j) = fit.beta(j) + quantile * se;
    if (se == 0)
      fit.p_values(j) = fit.beta(j) == 0 ? 1.0 : 0.0;
    else
      fit.p_values(j) = std::min(1.0, 2 * tail_p(std::fabs(fit.beta(j) / se)));
  }
}

double poisson_deviance(const VectorXd& y, const VectorXd& mu) {
  double d = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) > 0) d += y(i) * std::log(y(i) / mu(i));
    d -= y(i) - mu(i);
  }
  return 2 * d;
}

VectorXd safe_exp(const VectorXd& eta) {
  return eta.array().min(700.0).exp();
}

}  // namespace

double adjusted_r2(const VectorXd& y, const VectorXd& fitted, Family family,
                   std::size_t predictors) {
  const double n = static_cast<double>(y.size());
  const double ybar = y.mean();
  double ss_res = 0, ss_tot = 0;
  for (Index i = 0; i < y.size(); ++i) {
    double res = y(i) - fitted(i);
    double tot = y(i) - ybar;
    if (family == Family::gaussian) {
      ss_res += res * res;
      ss_tot += tot * tot;
    } else {
      ss_res += fitted(i) > 0 ? res * res / fitted(i) : 0.0;
      ss_tot += ybar > 0 ? tot * tot / ybar : 0.0;
    }
  }
  double r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  const double df = n - static_cast<double>(predictors) - 1;
  if (df <= 0) return r2;
  return 1 - (1 - r2) * (n - 1) / df;
}

ModelFit ols_fit(const CovariateTable& t) {
  const Index n = t.rows(), p = t.cols();
  if (n <= p + 1)
    throw DataError("window " + std::to_string(t.window_index) +
                    ": too few rows for least squares");
  MatrixXd d = with_intercept(t.x);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(d);
  if (qr.rank() < d.cols()) rank_error(t, qr);

  ModelFit fit;
  fit.kind = FitKind::ols;
  fit.family = Family::gaussian;
  fit.window_index = t.window_index;
  fit.columns = t.columns;
  fit.beta = qr.solve(t.y);
  fit.fitted = d * fit.beta;
  fit.residuals = t.y - fit.fitted;
  const double df = static_cast<double>(n - p - 1);
  const double sigma2 = fit.residuals.squaredNorm() / df;
  fit.dispersion = sigma2;
  fit.deviance = fit.residuals.squaredNorm();
  VectorXd var = unscaled_covariance(qr).diagonal() * sigma2;
  boost::math::students_t dist(df);
  fill_inference(fit, var, boost::math::quantile(dist, 0.975), [&](double a) {
    return boost::math::cdf(boost::math::complement(dist, a));
  });
  fit.adj_r2 = adjusted_r2(t.y, fit.fitted, Family::gaussian,
                           static_cast<std::size_t>(p));
  fit.iterations = 1;
  return fit;
}

std::vector<double> vif(const CovariateTable& t) {
  const Index p = t.cols();
  if (p < 2) throw DataError("vif needs at least two columns");
  std::vector<double> out;
  for (Index j = 0; j < p; ++j) {
    MatrixXd others(t.rows(), p - 1);
    for (Index k = 0, c = 0; k < p; ++k)
      if (k != j) others.col(c++) = t.x.col(k);
    MatrixXd d = with_intercept(others);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(d);
    VectorXd target = t.x.col(j);
    VectorXd fitted = d * qr.solve(target);
    double ss_res = (target - fitted).squaredNorm();
    double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();
    double r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    if (r2 >= 1 - 1e-12)
      out.push_back(std::numeric_limits<double>::infinity());
    else
      out.push_back(1 / (1 - r2));
  }
  return out;
}

namespace {

ModelFit irls_poisson(const CovariateTable& t) {
  if ((t.y.array() < 0).any())
    throw DataError("poisson regression needs non-negative responses");
  const Index n = t.rows(), p = t.cols();
  if (n <= p + 1)
    throw DataError("window " + std::to_string(t.window_index) +
                    ": too few rows for a GLM");
  MatrixXd d = with_intercept(t.x);
  VectorXd mu = t.y.array() + 0.1;
  VectorXd eta = mu.array().log();
  double dev = poisson_deviance(t.y, mu);
  ModelFit fit;
  fit.family = Family::poisson;
  fit.window_index = t.window_index;
  fit.columns = t.columns;
  fit.converged = false;
  Eigen::ColPivHouseholderQR<MatrixXd> qr;
  for (std::size_t it = 1; it <= 100; ++it) {
    VectorXd z = eta.array() + (t.y - mu).array() / mu.array();
    VectorXd sw = mu.array().sqrt();
    qr.compute(sw.asDiagonal() * d);
    if (qr.rank() < d.cols()) rank_error(t, qr);
    fit.beta = qr.solve(sw.asDiagonal() * z);
    eta = d * fit.beta;
    mu = safe_exp(eta);
    double dev_new = poisson_deviance(t.y, mu);
    fit.iterations = it;
    bool done = std::fabs(dev_new - dev) / (std::fabs(dev_new) + 0.1) < 1e-8;
    dev = dev_new;
    if (done) {
      fit.converged = true;
      break;
    }
  }
  fit.fitted = mu;
  fit.residuals = t.y - mu;
  fit.deviance = dev;
  VectorXd sw = mu.array().sqrt();
  qr.compute(sw.asDiagonal() * d);
  VectorXd var = unscaled_covariance(qr).diagonal();
  double pearson = (fit.residuals.array().square() / mu.array()).sum();
  fit.dispersion = pearson / static_cast<double>(n - p - 1);
  fit.adj_r2 = adjusted_r2(t.y, mu, Family::poisson,
                           static_cast<std::size_t>(p));
  fit.se = var;  // unscaled variances, finished by the callers
  return fit;
}

}  // namespace

ModelFit glm_poisson(const CovariateTable& t) {
  ModelFit fit = irls_poisson(t);
  fit.kind = FitKind::poisson;
  VectorXd var = fit.se;
  boost::math::normal normal;
  fill_inference(fit, var, boost::math::quantile(normal, 0.975),
                 [&](double a) {
                   return boost::math::cdf(boost::math::complement(normal, a));
                 });
  return fit;
}

ModelFit glm_quasipoisson(const CovariateTable& t) {
  ModelFit fit = irls_poisson(t);
  fit.kind = FitKind::quasipoisson;
  VectorXd var = fit.se * fit.dispersion;
  boost::math::students_t dist(static_cast<double>(t.rows() - t.cols() - 1));
  fill_inference(fit, var, boost::math::quantile(dist, 0.975), [&](double a) {
    return boost::math::cdf(boost::math::complement(dist, a));
  });
  return fit;
}

// ---------------------------------------------------------------------------
// Elastic net

namespace {

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

// Centered weighted normal equations of one penalized least-squares problem.
struct Quadratic {
  VectorXd xbar;
  double zbar = 0;
  MatrixXd gram;  // Xc^T W Xc / n
  VectorXd cov;   // Xc^T W zc / n
};

Quadratic quadratic(const MatrixXd& x, const VectorXd& z, const VectorXd& w) {
  const double nn = static_cast<double>(x.rows());
  const double wsum = w.sum();
  Quadratic q;
  q.xbar = (x.transpose() * w) / wsum;
  q.zbar = w.dot(z) / wsum;
  MatrixXd xc = x.rowwise() - q.xbar.transpose();
  MatrixXd wxc = w.asDiagonal() * xc;
  q.gram = xc.transpose() * wxc / nn;
  q.cov = wxc.transpose() * (z.array() - q.zbar).matrix() / nn;
  return q;
}

// Covariance-update coordinate descent; beta holds the intercept first and is
// updated in place.
void solve(const Quadratic& q, double alpha, double lambda, VectorXd& beta,
           const EnetOptions& options) {
  const Index p = q.gram.cols();
  VectorXd b = beta.tail(p);
  VectorXd gb = q.gram * b;
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1 - alpha);
  auto kkt = [&] {
    double worst = 0;
    for (Index j = 0; j < p; ++j) {
      double grad = -(q.cov(j) - gb(j)) + l2 * b(j);
      double v = b(j) == 0 ? std::max(0.0, std::fabs(grad) - l1)
                           : std::fabs(grad + l1 * (b(j) > 0 ? 1 : -1));
      worst = std::max(worst, v);
    }
    return worst;
  };
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0;
    for (Index j = 0; j < p; ++j) {
      const double gjj = q.gram(j, j);
      double updated = 0;
      if (gjj > 0) {
        double rj = q.cov(j) - gb(j) + gjj * b(j);
        updated = soft_threshold(rj, l1) / (gjj + l2);
      }
      const double delta = updated - b(j);
      if (delta != 0) {
        gb += q.gram.col(j) * delta;
        b(j) = updated;
        max_change = std::max(max_change, std::fabs(delta));
      }
    }
    if (max_change < options.tolerance && kkt() < options.tolerance) break;
  }
  beta.tail(p) = b;
  beta(0) = q.zbar - q.xbar.dot(b);
}

void poisson_cd(const MatrixXd& x, const VectorXd& y, double alpha,
                double lambda, VectorXd& beta, const EnetOptions& options) {
  const Index p = x.cols();
  for (std::size_t it = 0; it < options.max_irls; ++it) {
    VectorXd eta = (x * beta.tail(p)).array() + beta(0);
    VectorXd mu = safe_exp(eta);
    mu = mu.array().max(1e-10);
    VectorXd z = eta.array() + (y - mu).array() / mu.array();
    VectorXd before = beta;
    solve(quadratic(x, z, mu), alpha, lambda, beta, options);
    if ((beta - before).cwiseAbs().maxCoeff() < options.tolerance) break;
  }
}

std::vector<VectorXd> path_on(const MatrixXd& x, const VectorXd& y,
                              Family family, double alpha,
                              std::span<const double> lambdas,
                              const EnetOptions& options) {
  const Index p = x.cols();
  VectorXd beta = VectorXd::Zero(p + 1);
  const double ybar = y.mean();
  beta(0) = family == Family::gaussian ? ybar : std::log(std::max(ybar, 1e-10));
  std::vector<VectorXd> out;
  out.reserve(lambdas.size());
  Quadratic gaussian;
  if (family == Family::gaussian)
    gaussian = quadratic(x, y, VectorXd::Ones(x.rows()));
  for (double lambda : lambdas) {
    if (family == Family::gaussian)
      solve(gaussian, alpha, lambda, beta, options);
    else
      poisson_cd(x, y, alpha, lambda, beta, options);
    out.push_back(beta);
  }
  return out;
}

double lambda_max_of(const MatrixXd& x, const VectorXd& y, double alpha) {
  const double n = static_cast<double>(x.rows());
  VectorXd yc = y.array() - y.mean();
  MatrixXd xc = x.rowwise() - x.colwise().mean();
  double m = (xc.transpose() * yc).cwiseAbs().maxCoeff() / (n * alpha);
  return std::max(m, 1e-12);
}

VectorXd predict(const MatrixXd& x, const VectorXd& beta, Family family) {
  VectorXd eta = (x * beta.tail(x.cols())).array() + beta(0);
  return family == Family::gaussian ? eta : safe_exp(eta);
}

double loss(const VectorXd& y, const VectorXd& pred, Family family) {
  if (family == Family::gaussian) return (y - pred).squaredNorm();
  return poisson_deviance(y, pred);
}

}  // namespace

double lambda_max(const CovariateTable& t, Family family, double alpha) {
  (void)family;  // the gradient at the null model is the same for both
  if (t.cols() == 0) return 1e-12;
  return lambda_max_of(t.x, t.y, alpha);
}

std::vector<double> lambda_sequence(double lmax, std::size_t count,
                                    double ratio) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lmax};
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(lmax * std::exp(step * static_cast<double>(i)));
  return out;
}

std::vector<VectorXd> elastic_net_path(const CovariateTable& t, Family family,
                                       double alpha,
                                       std::span<const double> lambdas,
                                       const EnetOptions& options) {
  if (!(alpha > 0 && alpha <= 1))
    throw ConfigError("elastic net alpha must lie in (0, 1]");
  return path_on(t.x, t.y, family, alpha, lambdas, options);
}

double kkt_residual(const CovariateTable& t, Family family, double alpha,
                    double lambda, const VectorXd& beta) {
  const double n = static_cast<double>(t.rows());
  VectorXd r = t.y - predict(t.x, beta, family);
  double worst = std::fabs(r.sum() / n);
  for (Index j = 0; j < t.cols(); ++j) {
    double b = beta(j + 1);
    double grad = -t.x.col(j).dot(r) / n + lambda * (1 - alpha) * b;
    double v = b == 0 ? std::max(0.0, std::fabs(grad) - lambda * alpha)
                      : std::fabs(grad + lambda * alpha * (b > 0 ? 1 : -1));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

ModelFit enet_fit(const CovariateTable& t, Family family, double alpha,
                  double lambda, VectorXd beta) {
  ModelFit fit;
  fit.kind = FitKind::elasticnet;
  fit.family = family;
  fit.window_index = t.window_index;
  fit.columns = t.columns;
  fit.alpha = alpha;
  fit.lambda = lambda;
  fit.beta = std::move(beta);
  fit.fitted = predict(t.x, fit.beta, family);
  fit.residuals = t.y - fit.fitted;
  fit.deviance = loss(t.y, fit.fitted, family);
  std::size_t active = 0;
  for (Index j = 1; j < fit.beta.size(); ++j) active += fit.beta(j) != 0;
  fit.adj_r2 = adjusted_r2(t.y, fit.fitted, family, active);
  return fit;
}

}  // namespace

CvResult cv_select(const CovariateTable& t, Family family,
                   const CvOptions& options, Report* report) {
  const auto n = static_cast<std::size_t>(t.rows());
  const std::size_t k = options.folds;
  if (k < 2 || n < 2 * k)
    throw DataError("window " + std::to_string(t.window_index) + ": " +
                    std::to_string(n) + " rows are too few for " +
                    std::to_string(k) + "-fold cross-validation");
  if (options.alphas.empty()) throw ConfigError("empty alpha grid");

  CvResult result;
  // The gaussian response is brought to unit variance so that the balance
  // between the two penalties does not depend on its units.
  CovariateTable scaled;
  const CovariateTable* work = &t;
  if (family == Family::gaussian) {
    const double sd = std::sqrt((t.y.array() - t.y.mean()).square().mean());
    if (sd > 0) {
      result.response_scale = sd;
      scaled = t;
      scaled.y /= sd;
      work = &scaled;
    }
  }

  // Seeded shuffle, then round-robin fold labels.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nullmodel::Rng rng(options.seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  result.fold_of_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.fold_of_row[order[i]] = i % k;

  std::vector<MatrixXd> train_x(k), test_x(k);
  std::vector<VectorXd> train_y(k), test_y(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Index> tr, te;
    for (std::size_t i = 0; i < n; ++i)
      (result.fold_of_row[i] == f ? te : tr).push_back(static_cast<Index>(i));
    train_x[f] = work->x(tr, Eigen::all);
    train_y[f] = work->y(tr);
    test_x[f] = work->x(te, Eigen::all);
    test_y[f] = work->y(te);
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_alpha = 0, best_lambda = 0;
  std::vector<std::vector<double>> sequences;
  for (std::size_t a = 0; a < options.alphas.size(); ++a) {
    const double alpha = options.alphas[a];
    sequences.push_back(lambda_sequence(lambda_max(*work, family, alpha),
                                        options.lambda_count,
                                        options.lambda_ratio));
    const auto& lambdas = sequences.back();
    std::vector<double> err(lambdas.size(), 0.0);
    for (std::size_t f = 0; f < k; ++f) {
      auto path = path_on(train_x[f], train_y[f], family, alpha, lambdas,
                          options.enet);
      for (std::size_t l = 0; l < lambdas.size(); ++l)
        err[l] += loss(test_y[f], predict(test_x[f], path[l], family), family);
    }
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      double e = err[l] / static_cast<double>(n);
      if (e < best) {
        best = e;
        best_alpha = a;
        best_lambda = l;
      }
    }
  }

  result.alpha = options.alphas[best_alpha];
  result.lambda = sequences[best_alpha][best_lambda];
  result.cv_error = best * result.response_scale * result.response_scale;
  std::span<const double> prefix(sequences[best_alpha].data(),
                                 best_lambda + 1);
  auto path =
      path_on(work->x, work->y, family, result.alpha, prefix, options.enet);
  result.fit = enet_fit(t, family, result.alpha, result.lambda,
                        path.back() * result.response_scale);
  const auto [lo, hi] =
      std::minmax_element(options.alphas.begin(), options.alphas.end());
  result.boundary = options.alphas.size() > 1 &&
                    (result.alpha == *lo || result.alpha == *hi);
  if (result.boundary && report)
    report->warn("window " + std::to_string(t.window_index), 0,
                 "cross-validated alpha " +
                     csv::format_double(result.alpha) +
                     " lies on the boundary of the alpha grid");
  return result;
}

double relative_influence(std::span<const double> coefficients,
                          std::size_t k) {
  if (k < 1 || k > coefficients.size())
    throw Error("relative_influence: coefficient index out of range");
  double mass = 0;
  for (double b : coefficients) mass += std::fabs(b);
  return mass == 0 ? 0.0 : coefficients[k - 1] / mass;
}

double relative_influence(const ModelFit& fit, std::size_t k) {
  const auto p = static_cast<std::size_t>(fit.beta.size()) - 1;
  return relative_influence(std::span<const double>(fit.beta.data() + 1, p),
                            k);
}

// ---------------------------------------------------------------------------
// Diagnostics

double lag1_autocorrelation(const VectorXd& e) {
  if (e.size() < 2) return 0;
  const double mean = e.mean();
  double num = 0, den = 0;
  for (Index i = 0; i < e.size(); ++i) {
    den += (e(i) - mean) * (e(i) - mean);
    if (i + 1 < e.size()) num += (e(i) - mean) * (e(i + 1) - mean);
  }
  return den == 0 ? 0 : num / den;
}

Diagnostics diagnostics(const ModelFit& fit) {
  Diagnostics d;
  d.adj_r2 = fit.adj_r2;
  VectorXd e = fit.residuals;
  if (fit.family == Family::poisson)
    for (Index i = 0; i < e.size(); ++i)
      e(i) = fit.fitted(i) > 0 ? e(i) / std::sqrt(fit.fitted(i)) : 0.0;
  d.lag1_autocorrelation = lag1_autocorrelation(e);
  const Index n = e.size();
  if (n == 0) return d;
  const double mean = e.mean();
  double sd = n > 1 ? std::sqrt((e.array() - mean).square().sum() / (n - 1))
                    : 0.0;
  std::vector<double> z(e.data(), e.data() + n);
  for (auto& v : z) v = sd > 0 ? (v - mean) / sd : 0.0;
  std::sort(z.begin(), z.end());
  boost::math::normal normal;
  for (Index i = 0; i < n; ++i) {
    double q = boost::math::quantile(
        normal, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    d.qq.emplace_back(q, z[static_cast<std::size_t>(i)]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// CSV

void write_fits_csv(std::ostream& out, std::span<const ModelFit> fits) {
  csv::Writer w(out);
  w.row({"window", "model", "column", "coefficient", "se", "ci_lo", "ci_hi",
         "p"});
  for (const auto& f : fits) {
    for (Index j = 0; j < f.beta.size(); ++j) {
      w.field(f.window_index)
          .field(to_string(f.kind))
          .field(j == 0 ? std::string("(intercept)")
                        : f.columns[static_cast<std::size_t>(j - 1)])
          .field(f.beta(j));
      if (f.se.size() == f.beta.size())
        w.field(f.se(j)).field(f.ci_lo(j)).field(f.ci_hi(j)).field(
            f.p_values(j));
      else
        w.empty_field().empty_field().empty_field().empty_field();
      w.end_row();
    }
  }
}

void write_enet_csv(std::ostream& out, std::span<const ModelFit> fits) {
  csv::Writer w(out);
  w.row({"window", "alpha", "lambda", "column", "coefficient",
         "relative_influence"});
  for (const auto& f : fits) {
    for (Index j = 1; j < f.beta.size(); ++j) {
      w.field(f.window_index)
          .field(f.alpha)
          .field(f.lambda)
          .field(f.columns[static_cast<std::size_t>(j - 1)])
          .field(f.beta(j))
          .field(relative_influence(f, static_cast<std::size_t>(j)));
      w.end_row();
    }
  }
}

void write_diagnostics_csv(std::ostream& out, std::span<const ModelFit> fits) {
  csv::Writer w(out);
  w.row({"window", "model", "statistic", "x", "y"});
  for (const auto& f : fits) {
    auto d = diagnostics(f);
    auto scalar = [&](std::string_view name, double v) {
      w.field(f.window_index).field(to_string(f.kind)).field(name);
      w.empty_field().field(v);
      w.end_row();
    };
    scalar("adj_r2", d.adj_r2);
    scalar("lag1_autocorrelation", d.lag1_autocorrelation);
    scalar("dispersion", f.dispersion);
    scalar("converged", f.converged ? 1.0 : 0.0);
    for (auto [q, r] : d.qq) {
      w.field(f.window_index).field(to_string(f.kind)).field("qq");
      w.field(q).field(r);
      w.end_row();
    }
  }
}

std::vector<EnetRow> read_enet_csv(std::istream& in) {
  auto rows = csv::parse(in);
  const csv::Row header = {"window", "alpha", "lambda", "column",
                           "coefficient", "relative_influence"};
  if (rows.empty() || rows.front() != header)
    throw DataError("enet csv: unexpected header");
  std::vector<EnetRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != header.size())
      throw FormatError("enet csv", i + 1, "wrong field count");
    out.push_back({std::stoull(f[0]), csv::parse_double(f[1]), csv::parse_double(f[2]), f[3],
                   csv::parse_double(f[4]), csv::parse_double(f[5])});
  }
  return out;
}

}  // namespace stmc::stats
