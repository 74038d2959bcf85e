#pragma once

#include <Eigen/Core>

#include <utility>

#include "latreg/covariance.hpp"
#include "latreg/design.hpp"
#include "latreg/estimators.hpp"

namespace latreg {

/// y - X beta.
Eigen::VectorXd residuals(const LatticeDesign& design, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta);

/// Mean-corrected empirical autocovariance at lag (h1, h2):
///   (1/N(h)) sum over pairs t_i - t_j = h of (e_i - mean)(e_j - mean),
/// averaging over the (N-|h1|)(N-|h2|) in-lattice pairs. The divisor is
/// N(h) itself, with no small-sample correction.
double empirical_cov(const Eigen::VectorXd& resid, int N, long h1, long h2);

/// Moment fit of the separable AR approximation from LSE residuals. AR(1)
/// axes take phi = gamma(1)/gamma(0) along their own axis; AR(2) axes solve
/// the order-2 Yule-Walker system in the lag-1 and lag-2 correlations.
/// sigma12 matches the fitted model's gamma(0,0) to the empirical one.
/// Non-causal fits raise fit_error so the caller can exclude the replicate.
SeparableARModel fit_separable(const Eigen::VectorXd& resid, int N,
                               std::pair<int, int> orders);

/// Same moment equations evaluated on a model's exact autocovariances
/// instead of empirical ones: the population limit of fit_separable.
SeparableARModel fit_separable_population(const CovarianceModel& model,
                                          std::pair<int, int> orders);

}  // namespace latreg
