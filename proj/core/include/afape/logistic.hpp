#pragma once
// Logistic regression fitters. Two variants are used in the project:
//  - Newton/IRLS maximum likelihood (propensity models),
//  - fixed-schedule full-batch gradient descent with L2 penalty (the
//    impute-then-regress classifier, whose training recipe is pinned so that
//    results are reproducible).

#include <Eigen/Dense>

#include "afape/types.hpp"

namespace afape {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct LogisticFit {
  Eigen::VectorXd w;  // coefficients, intercept last
  int iterations = 0;
  bool converged = false;
};

// Newton-Raphson maximum likelihood. X is n x d (no intercept column; one is
// appended internally), y in {0,1}. Throws FitError on a degenerate design.
LogisticFit fit_logistic_newton(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, int max_iter = 100,
                                double tol = 1e-10);

// Full-batch gradient descent at a fixed learning rate with L2 penalty on the
// non-intercept coefficients. Optionally records the epoch losses.
LogisticFit fit_logistic_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lr, int epochs, double l2,
                            std::vector<double>* loss_trace = nullptr);

// Mean penalized log-loss of a fit on (X, y).
double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double l2);

}  // namespace afape
