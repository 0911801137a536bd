#pragma once
// Nuisance functions: the retrospective acquisition propensity (factorized
// per-step, per-superfeature logistic regressions) and the semi-offline
// state-action value model Q. The state value V is always the exact
// target-policy average of Q at the next step, so only Q networks are fit;
// the fitting recursion goes backward in time with targets
// C'^t + V^t(sampled next state), per the semi-offline Bellman identity.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "afape/classify.hpp"
#include "afape/dgp.hpp"
#include "afape/mlp.hpp"
#include "afape/policy.hpp"
#include "afape/simulate.hpp"
#include "afape/types.hpp"

namespace afape {

// ---------------------------------------------------------------------------
// Propensity
// ---------------------------------------------------------------------------

struct PropensityModel {
  int T = 0;
  int K = 0;
  // Covariate columns, read from row t-1 of the observed panel with missing
  // cells as zero (the features' unconditional mean).
  std::vector<int> covariate_cols;

  struct BitModel {
    bool structural_one = false;
    bool structural_zero = false;
    Eigen::VectorXd w;  // covariate coefficients, intercept last
  };
  std::vector<std::vector<BitModel>> bits;  // [t-1][k]
  std::vector<std::string> warnings;

  double bit_prob(int t, int k, const ObservedPanel& hist) const;
  std::vector<double> bit_probs(int t, const ObservedPanel& hist) const;
  // Factorized probability of a full mask at step t.
  double mask_prob(int t, const StepMask& a, const ObservedPanel& hist) const;
};

struct PropensityFitConfig {
  std::vector<int> covariate_cols;
  // Restrict fitting to records fully acquired through t-1 (the complete-
  // trajectory identification used under MNAR mechanisms).
  bool complete_history_only = false;
};

PropensityModel fit_propensity(const Dataset& data,
                               const std::vector<int>& indices,
                               const PropensityFitConfig& cfg);

// Exact retrospective policy of a known data-generating process.
PropensityModel oracle_propensity(const DGPConfig& cfg);

// pi_beta(A^t >= a'^t | history) under the factorized model.
double propensity_geq(const PropensityModel& prop, int t,
                      const ObservedPanel& hist_x, const StepMask& a_prime);

std::string propensity_to_json(const PropensityModel& m);
PropensityModel propensity_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Semi-offline Q / V
// ---------------------------------------------------------------------------

struct QSemiModel {
  int T = 0;
  int K = 0;
  int d = 0;
  std::vector<double> mu;  // imputation constants for unobserved cells
  PolicySpec target;       // policy whose value the model represents
  std::vector<Mlp> q;      // index t-1: Q^t(a'^{1..t}, x^{0..t-1}, a^{1..t-1})
  bool zero = false;       // misspecification switch: Q == V == 0

  bool fitted() const { return zero || !q.empty(); }
  int q_input_dim(int t) const { return d * t + K * t + K * (t - 1); }

  Eigen::VectorXd encode_q(int t, const MaskTrajectory& a_prime,
                           const ObservedPanel& retro_x,
                           const MaskTrajectory& retro_a) const;

  static QSemiModel zero_model(int T, int K, int d, PolicySpec target);
};

struct QSemiFitConfig {
  MlpConfig mlp;  // 16 rectified-linear units, lr 1e-3, batch 256, 50 epochs
  QSemiFitConfig() {
    mlp.hidden_units = 16;
    mlp.hidden_layers = 1;
    mlp.learning_rate = 1e-3;
    mlp.batch_size = 256;
    mlp.epochs = 50;
  }
};

// Fits Q^T..Q^1 on the simulated dataset by backward regression; V at each
// level is computed exactly as the target-policy average of the fitted next-
// step Q. epoch_mse, when given, receives one trace per fitted step
// (t = T first).
QSemiModel fit_q_semi(const Dataset& data, const SimDataset& sim,
                      const PolicySpec& target, const std::vector<double>& mu,
                      const QSemiFitConfig& cfg, std::uint64_t seed,
                      std::vector<std::vector<double>>* epoch_mse = nullptr);

// Q^t evaluated at a simulated-action prefix a'^{1..t} against the record's
// retrospective history.
double q_value(const QSemiModel& model, int t, const MaskTrajectory& a_prime,
               const ObservedPanel& retro_x, const MaskTrajectory& retro_a);

// V^t = E_{a'^{t+1} ~ target}[Q^{t+1}] for t in 0..T-1; V^T = 0. The prefix
// a_prime must cover steps 1..t.
double v_value(const QSemiModel& model, const SuperfeatureMap& map, int t,
               const MaskTrajectory& a_prime, const ObservedPanel& retro_x,
               const MaskTrajectory& retro_a);

std::string qsemi_to_json(const QSemiModel& m);
QSemiModel qsemi_from_json(const std::string& text);

}  // namespace afape
