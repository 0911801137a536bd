#pragma once
// Small multilayer perceptron regressor: rectified-linear hidden layers and a
// scalar output, trained by minibatch SGD on squared error. Targets are
// standardized internally; the inverse transform is baked into predictions.

#include <Eigen/Dense>
#include <vector>

#include "afape/rng.hpp"
#include "afape/types.hpp"

namespace afape {

struct MlpConfig {
  int hidden_units = 16;
  int hidden_layers = 1;  // Q-network default; 2 selectable
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 50;
  bool full_batch = false;  // deterministic full-batch GD (used by tests)
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const MlpConfig& cfg, RngStream& rng);

  // Squared-error fit; returns the per-epoch mean training MSE (on the
  // standardized scale).
  std::vector<double> fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          RngStream& shuffle_rng);

  double predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  int input_dim() const { return input_dim_; }
  bool fitted() const { return fitted_; }
  void set_fitted(bool v) { fitted_ = v; }  // used when deserializing

  // Layer parameters (weights W[l], biases b[l]); exposed for serialization.
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  double target_mean = 0.0;
  double target_scale = 1.0;

 private:
  int input_dim_ = 0;
  MlpConfig cfg_;
  bool fitted_ = false;

  Eigen::VectorXd forward_standardized(const Eigen::MatrixXd& X) const;
  void sgd_step(const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb);
};

}  // namespace afape
