#include "afape/logistic.hpp"

namespace afape {

static Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Xi(X.rows(), X.cols() + 1);
  Xi.leftCols(X.cols()) = X;
  Xi.col(X.cols()).setOnes();
  return Xi;
}

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double l2) {
  const Eigen::MatrixXd Xi = with_intercept(X);
  const Eigen::VectorXd z = Xi * w;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + exp(z)) - y z, computed stably
    const double zi = z[i];
    const double softplus = zi > 30 ? zi : std::log1p(std::exp(zi));
    loss += softplus - y[i] * zi;
  }
  loss /= static_cast<double>(z.size());
  loss += 0.5 * l2 * w.head(w.size() - 1).squaredNorm();
  return loss;
}

LogisticFit fit_logistic_newton(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, int max_iter,
                                double tol) {
  if (X.rows() == 0) throw FitError("logistic fit: empty design");
  if (X.rows() != y.size()) throw FitError("logistic fit: X/y size mismatch");
  const Eigen::MatrixXd Xi = with_intercept(X);
  const Eigen::Index d = Xi.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);

  LogisticFit fit;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd z = Xi * w;
    Eigen::VectorXd p(z.size()), s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      p[i] = sigmoid(z[i]);
      s[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
    }
    const Eigen::VectorXd grad = Xi.transpose() * (p - y);
    Eigen::MatrixXd H = Xi.transpose() * s.asDiagonal() * Xi;
    H.diagonal().array() += 1e-10;  // guard against exact singularity
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success)
      throw FitError("logistic fit: singular Hessian");
    const Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) throw FitError("logistic fit: degenerate design");
    w -= step;
    fit.iterations = it + 1;
    if (step.lpNorm<Eigen::Infinity>() < tol) {
      fit.converged = true;
      break;
    }
  }
  if (!w.allFinite()) throw FitError("logistic fit: diverged");
  fit.w = w;
  return fit;
}

LogisticFit fit_logistic_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lr, int epochs, double l2,
                            std::vector<double>* loss_trace) {
  if (X.rows() == 0) throw FitError("logistic fit: empty design");
  const Eigen::MatrixXd Xi = with_intercept(X);
  const Eigen::Index d = Xi.cols();
  const double n = static_cast<double>(Xi.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);

  LogisticFit fit;
  if (loss_trace) loss_trace->push_back(logistic_loss(X, y, w, l2));
  for (int e = 0; e < epochs; ++e) {
    const Eigen::VectorXd z = Xi * w;
    Eigen::VectorXd p(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = sigmoid(z[i]);
    Eigen::VectorXd grad = Xi.transpose() * (p - y) / n;
    grad.head(d - 1) += l2 * w.head(d - 1);
    w -= lr * grad;
    if (loss_trace) loss_trace->push_back(logistic_loss(X, y, w, l2));
  }
  if (!w.allFinite()) throw FitError("logistic fit: diverged");
  fit.w = w;
  fit.iterations = epochs;
  fit.converged = true;
  return fit;
}

}  // namespace afape
