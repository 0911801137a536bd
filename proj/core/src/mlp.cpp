#include "afape/mlp.hpp"

#include <cmath>

namespace afape {

Mlp::Mlp(int input_dim, const MlpConfig& cfg, RngStream& rng)
    : input_dim_(input_dim), cfg_(cfg) {
  if (input_dim <= 0) throw InvalidInput("Mlp: input_dim must be positive");
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int l = 0; l < cfg.hidden_layers; ++l) dims.push_back(cfg.hidden_units);
  dims.push_back(1);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    // He initialization for the rectified-linear layers.
    const double sd = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd Wl(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) Wl(i, j) = sd * rng.normal();
    W.push_back(std::move(Wl));
    b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

Eigen::VectorXd Mlp::forward_standardized(const Eigen::MatrixXd& X) const {
  // X is n x d; activations kept as (units x n) for column-major batching.
  Eigen::MatrixXd act = X.transpose();
  for (size_t l = 0; l + 1 < W.size(); ++l) {
    act = (W[l] * act).colwise() + b[l];
    act = act.cwiseMax(0.0);
  }
  const size_t L = W.size() - 1;
  Eigen::MatrixXd out = (W[L] * act).colwise() + b[L];
  return out.row(0).transpose();
}

void Mlp::sgd_step(const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
  const int nb = static_cast<int>(Xb.rows());
  const size_t L = W.size();

  std::vector<Eigen::MatrixXd> acts;  // post-activation, layer 0 = input
  acts.reserve(L + 1);
  acts.push_back(Xb.transpose());
  std::vector<Eigen::MatrixXd> pre(L);
  for (size_t l = 0; l < L; ++l) {
    pre[l] = (W[l] * acts[l]).colwise() + b[l];
    if (l + 1 < L)
      acts.push_back(pre[l].cwiseMax(0.0));
    else
      acts.push_back(pre[l]);
  }

  // dL/dout for mean squared error over the batch.
  Eigen::MatrixXd delta =
      (acts[L].row(0).transpose() - yb).transpose() * (2.0 / nb);
  for (size_t li = L; li-- > 0;) {
    const Eigen::MatrixXd gW = delta * acts[li].transpose();
    const Eigen::VectorXd gb = delta.rowwise().sum();
    if (li > 0) {
      Eigen::MatrixXd next = W[li].transpose() * delta;
      // ReLU gate of the previous layer
      next = (pre[li - 1].array() > 0.0).select(next, 0.0);
      delta = std::move(next);
    }
    W[li] -= cfg_.learning_rate * gW;
    b[li] -= cfg_.learning_rate * gb;
  }
}

std::vector<double> Mlp::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             RngStream& shuffle_rng) {
  if (X.rows() == 0) throw InvalidInput("Mlp::fit: empty data");
  if (X.cols() != input_dim_) throw InvalidInput("Mlp::fit: input dim mismatch");
  if (X.rows() != y.size()) throw InvalidInput("Mlp::fit: X/y size mismatch");

  const int n = static_cast<int>(X.rows());
  target_mean = y.mean();
  const double var = (y.array() - target_mean).square().sum() / n;
  target_scale = std::sqrt(var);
  fitted_ = true;
  if (target_scale < 1e-12) {
    // Constant target: predict it exactly, nothing to train.
    target_scale = 1.0;
    for (auto& Wl : W) Wl.setZero();
    for (auto& bl : b) bl.setZero();
    return {0.0};
  }
  const Eigen::VectorXd ys = (y.array() - target_mean) / target_scale;

  std::vector<double> epoch_mse;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  const int batch = cfg_.full_batch ? n : cfg_.batch_size;
  for (int e = 0; e < cfg_.epochs; ++e) {
    if (!cfg_.full_batch) {
      // Fisher-Yates with the deterministic stream
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(shuffle_rng.uniform_int(i + 1));
        std::swap(order[i], order[j]);
      }
    }
    for (int start = 0; start < n; start += batch) {
      const int nb = std::min(batch, n - start);
      Eigen::MatrixXd Xb(nb, input_dim_);
      Eigen::VectorXd yb(nb);
      for (int i = 0; i < nb; ++i) {
        Xb.row(i) = X.row(order[start + i]);
        yb[i] = ys[order[start + i]];
      }
      sgd_step(Xb, yb);
    }
    const Eigen::VectorXd pred = forward_standardized(X);
    epoch_mse.push_back((pred - ys).squaredNorm() / n);
  }
  return epoch_mse;
}

double Mlp::predict(const Eigen::VectorXd& x) const {
  if (!fitted_) throw InvalidInput("Mlp::predict: model not fitted");
  Eigen::MatrixXd X(1, input_dim_);
  X.row(0) = x.transpose();
  return forward_standardized(X)[0] * target_scale + target_mean;
}

Eigen::VectorXd Mlp::predict(const Eigen::MatrixXd& X) const {
  if (!fitted_) throw InvalidInput("Mlp::predict: model not fitted");
  return (forward_standardized(X).array() * target_scale + target_mean).matrix();
}

}  // namespace afape
