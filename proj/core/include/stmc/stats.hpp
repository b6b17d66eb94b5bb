#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stmc/errors.hpp"

// Regression stack: transforms, OLS, VIF, Poisson/quasi-Poisson GLMs,
// elastic net with cross-validation, diagnostics.
namespace stmc::stats {

enum class Regressand { bug_density, churn };
std::string_view to_string(Regressand r);
Regressand parse_regressand(std::string_view token);

/// Unprepared per-window rows. Missing cells are nullopt.
struct RawTable {
  std::size_t window_index = 0;
  Regressand regressand = Regressand::bug_density;
  std::vector<std::string> columns;
  std::vector<bool> log_columns;  // log1p applied by prepare()
  std::vector<std::string> row_ids;
  std::vector<double> response;
  std::vector<std::vector<std::optional<double>>> cells;  // row-major
};

struct CovariateTable {
  std::size_t window_index = 0;
  Regressand regressand = Regressand::bug_density;
  std::vector<std::string> columns;
  std::vector<bool> log_columns;
  std::vector<std::string> row_ids;
  Eigen::MatrixXd x;  // rows x columns
  Eigen::VectorXd y;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
};

struct PrepareOptions {
  bool drop_zero_response = false;
  std::size_t min_rows = 10;
};

/// Drops rows with missing cells (and zero responses when asked), applies
/// log1p to flagged columns and drops constant columns with a warning.
/// Returns nullopt, with a report entry, when fewer than min_rows remain.
std::optional<CovariateTable> prepare(const RawTable& raw,
                                      const PrepareOptions& options,
                                      Report& report);

struct Scaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // population standard deviation
};

/// Columns rescaled to mean 0 and (population) variance 1.
std::pair<CovariateTable, Scaling> standardize(const CovariateTable& t);

enum class FitKind { ols, poisson, quasipoisson, elasticnet };
std::string_view to_string(FitKind k);

enum class Family { gaussian, poisson };
std::string_view to_string(Family f);

struct ModelFit {
  FitKind kind = FitKind::ols;
  Family family = Family::gaussian;
  std::size_t window_index = 0;
  std::vector<std::string> columns;
  Eigen::VectorXd beta;  // intercept first
  // Empty for elastic net.
  Eigen::VectorXd se, ci_lo, ci_hi, p_values;
  double dispersion = 1;
  double alpha = 0;
  double lambda = 0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;  // response residuals y - fitted
  double adj_r2 = 0;
  double deviance = 0;
  bool converged = true;
  std::size_t iterations = 0;
};

/// Least squares with intercept, t-based 95% intervals. Throws DataError
/// naming the dependent columns when the design is rank deficient.
ModelFit ols_fit(const CovariateTable& t);

/// 1 / (1 - R_j^2) from regressing column j on the others; +infinity for a
/// column that the others reproduce exactly.
std::vector<double> vif(const CovariateTable& t);

/// Log-link Poisson GLM by IRLS (relative deviance change < 1e-8 or 100
/// iterations).
ModelFit glm_poisson(const CovariateTable& t);
/// Same coefficients; dispersion = Pearson chi^2 / (n - p), standard errors
/// scaled by sqrt(dispersion).
ModelFit glm_quasipoisson(const CovariateTable& t);

struct EnetOptions {
  double tolerance = 1e-7;  // max coefficient change per sweep
  std::size_t max_sweeps = 100000;
  std::size_t max_irls = 100;
};

/// Smallest lambda for which every penalized coefficient is zero.
double lambda_max(const CovariateTable& t, Family family, double alpha);
/// `count` values log-spaced from `lambda_max` down to ratio * lambda_max.
std::vector<double> lambda_sequence(double lambda_max, std::size_t count = 100,
                                    double ratio = 1e-3);

/// Minimizes loss/n + lambda [(1 - alpha) |b|^2 / 2 + alpha |b|_1] by cyclic
/// coordinate descent, warm-started along `lambdas` (decreasing). Loss is
/// half the squared error (gaussian) or the negative log-likelihood
/// (poisson, via IRLS). Each result has the intercept first.
std::vector<Eigen::VectorXd> elastic_net_path(const CovariateTable& t,
                                              Family family, double alpha,
                                              std::span<const double> lambdas,
                                              const EnetOptions& options = {});

/// Largest violation of the optimality conditions at `beta`.
double kkt_residual(const CovariateTable& t, Family family, double alpha,
                    double lambda, const Eigen::VectorXd& beta);

struct CvOptions {
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t folds = 10;
  std::size_t lambda_count = 100;
  double lambda_ratio = 1e-3;
  std::uint64_t seed = 0;
  EnetOptions enet;
};

struct CvResult {
  double alpha = 0;
  double lambda = 0;  // on the scale of y / response_scale
  double cv_error = 0;
  /// Gaussian: population sd of y, which is divided out before selection so
  /// that the choice does not depend on the response's units. Poisson: 1.
  double response_scale = 1;
  bool boundary = false;  // alpha* at the edge of the grid
  std::vector<std::size_t> fold_of_row;
  ModelFit fit;
};

/// Seeded k-fold selection of (alpha, lambda) by mean held-out squared error
/// (gaussian) or deviance (poisson), then a full-data fit. The returned fit is
/// on the original scale: its beta solves the problem for y / response_scale
/// at `lambda`, multiplied by response_scale. A boundary alpha*
/// adds a warning to `report`. Throws DataError when rows < 2 * folds.
CvResult cv_select(const CovariateTable& t, Family family,
                   const CvOptions& options, Report* report = nullptr);

/// beta_k / sum_i |beta_i| over the non-intercept coefficients beta_1..beta_p
/// (k is 1-based); 0 when all are zero.
double relative_influence(std::span<const double> coefficients, std::size_t k);
/// Same, with k indexing fit.beta (1 = first column).
double relative_influence(const ModelFit& fit, std::size_t k);

struct Diagnostics {
  std::vector<std::pair<double, double>> qq;  // (normal quantile, residual)
  double lag1_autocorrelation = 0;
  double adj_r2 = 0;
};

/// Standardized residuals sorted against normal quantiles at (i - 0.5) / n,
/// lag-1 residual autocorrelation and the fit's adjusted R^2.
Diagnostics diagnostics(const ModelFit& fit);
double lag1_autocorrelation(const Eigen::VectorXd& e);

/// Gaussian: 1 - (1 - R^2)(n - 1)/(n - p - 1). GLM: R^2 on the variance-
/// function scale, 1 - sum (y - mu)^2 / mu / sum (y - ybar)^2 / ybar,
/// adjusted the same way.
double adjusted_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted,
                   Family family, std::size_t predictors);

/// fits.csv: window,model,column,coefficient,se,ci_lo,ci_hi,p
void write_fits_csv(std::ostream& out, std::span<const ModelFit> fits);
/// enet.csv: window,alpha,lambda,column,coefficient,relative_influence
void write_enet_csv(std::ostream& out, std::span<const ModelFit> fits);
/// diagnostics.csv: window,model,statistic,x,y
void write_diagnostics_csv(std::ostream& out, std::span<const ModelFit> fits);

struct EnetRow {
  std::size_t window_index = 0;
  double alpha = 0;
  double lambda = 0;
  std::string column;
  double coefficient = 0;
  double relative_influence = 0;
};
std::vector<EnetRow> read_enet_csv(std::istream& in);

}  // namespace stmc::stats
