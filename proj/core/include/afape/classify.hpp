#pragma once
// Impute-then-regress per-step classifier: unconditional mean imputation of
// unobserved cells followed by a per-step logistic regression whose input is
// the flattened imputed history plus the acquisition mask bits. The fitted
// classifier is part of the evaluand: it is trained once, frozen, and must be
// a pure deterministic function of (masked history, masks).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "afape/rng.hpp"
#include "afape/types.hpp"

namespace afape {

struct ClassifierModel {
  std::vector<double> mu;  // imputation means per subfeature column
  struct StepModel {
    Eigen::VectorXd w;  // weights over encode(t), intercept last
  };
  std::vector<StepModel> steps;  // index t-1 for t = 1..T
  int num_super = 0;

  bool fitted() const { return !steps.empty(); }

  // encode(t): [imputed x rows 0..t] ++ [mask bits steps 1..t]
  int input_dim(int t) const {
    return static_cast<int>(mu.size()) * (t + 1) + num_super * t;
  }
  Eigen::VectorXd encode(int t, const ObservedPanel& hist_x,
                         const MaskTrajectory& hist_a) const;
};

struct ClassifierFitConfig {
  double subsample_p = 0.5;  // extra Bernoulli thinning per costly superfeature
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
};

// Fits means and per-step logistic regressions on the given record indices
// (normally the train split), after random mask thinning.
ClassifierModel fit_classifier(const Dataset& data,
                               const std::vector<int>& train_indices,
                               const ClassifierFitConfig& cfg,
                               std::uint64_t seed,
                               std::vector<std::vector<double>>* loss_traces = nullptr);

// Deterministic prediction Y*^t in {0,1}; a logistic score of exactly 0
// (probability 0.5) predicts class 1.
int predict(const ClassifierModel& model, int t, const ObservedPanel& hist_x,
            const MaskTrajectory& hist_a);

// Per-step cost: acquisition costs of a'^t plus the misclassification cost if
// the classifier's prediction from the simulated history differs from y_t.
double step_cost(const StepMask& a_prime_t, const ObservedPanel& hist_x,
                 const MaskTrajectory& hist_a, int t, int y_t,
                 const ClassifierModel& model, const CostSpec& costs);

std::string classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const std::string& text);

}  // namespace afape
