#pragma once
// Synthetic data-generating processes for the five benchmark experiments:
// AR(1) feature panels, threshold-plus-noise labels, logistic retrospective
// acquisition (MAR, MCAR, structural, MNAR and direct-effect variants), and
// ground-truth evaluation of the target cost by full-information rollouts.

#include <cstdint>
#include <vector>

#include "afape/classify.hpp"
#include "afape/policy.hpp"
#include "afape/rng.hpp"
#include "afape/types.hpp"

namespace afape {

enum class Experiment { E1 = 1, E2 = 2, E3 = 3, E4 = 4, E5 = 5, Custom = 0 };

// Acquisition mechanism of one superfeature bit.
struct BitMechanism {
  enum class Kind { StructuralOne, Constant, Logistic };
  Kind kind = Kind::StructuralOne;
  double p = 1.0;                 // Constant
  double intercept = 0.0;         // Logistic
  std::vector<double> coefs;      // per subfeature column, applied to row t-1
  bool on_counterfactual = false; // evaluate on ground-truth values (MNAR)

  double prob(const FullPanel& truth, const ObservedPanel& observed_so_far,
              int t) const;
};

struct DGPConfig {
  Experiment experiment = Experiment::E1;
  double gamma = 0.2;
  double sigma = 1.0;
  double zeta1 = 1.0;
  double zeta2 = 0.3;
  std::vector<double> w = {1.0 / 6, 1.0 / 6, 2.0 / 6, 2.0 / 6};
  int T = 3;
  int n = 100000;
  std::uint64_t seed = 1;

  SuperfeatureMap map = SuperfeatureMap::experiment_default();
  CostSpec costs = CostSpec::experiment_default();
  SplitFractions split;

  std::vector<BitMechanism> mech;  // one per superfeature
  bool nde_violation = false;      // direct-effect recursion (experiment 5)
  double nde_shift = 0.5;          // shift per acquired superfeature bit

  // Covariate columns of the fitted propensity model (row t-1 values).
  std::vector<int> propensity_covariates = {0, 1, 2};
  // Fit propensities on fully-acquired-history rows only (MNAR recovery).
  bool mnar = false;

  void validate() const;
  static DGPConfig for_experiment(Experiment e, int n, std::uint64_t seed);
};

// One AR(1) step: gamma * prev + (1 - gamma) * shock.
inline double ar1_next(double prev, double gamma, double shock) {
  return gamma * prev + (1.0 - gamma) * shock;
}

// Counterfactual feature panel for the acquisition-independent experiments.
// Not valid when cfg.nde_violation is set (use generate_record).
FullPanel generate_features(const DGPConfig& cfg, RngStream& rng);

// Label probability at step t given the panel: 1 if the weighted two-step
// score is strictly positive, else 0.3.
double label_prob(const FullPanel& panel, int t, const DGPConfig& cfg);
LabelSeq generate_labels(const FullPanel& panel, const DGPConfig& cfg,
                         RngStream& rng);

// Retrospective acquisition over a generated panel: per step and superfeature
// a Bernoulli draw from the experiment's mechanism, free superfeature always
// acquired. Returns the masks and the induced observation.
std::pair<MaskTrajectory, ObservedPanel> retro_acquire(const FullPanel& truth,
                                                       const DGPConfig& cfg,
                                                       RngStream& rng);

// Full per-record generation (pure function of cfg and id). Handles the
// direct-effect interleaving of features and acquisitions for experiment 5.
Record generate_record(const DGPConfig& cfg, long long id);

Dataset generate_dataset(const DGPConfig& cfg);

double complete_case_fraction(const Dataset& data);

// Monte-Carlo ground truth of the target cost. For the NDE-respecting
// experiments, rolls the policy out on the test split's counterfactual
// panels (n_eval records, at most the split size; n_mc rollouts each).
// Under a direct-effect violation the environment is re-sampled online while
// the agent acts, n_eval times.
double ground_truth_eval(const Dataset& data, const PolicySpec& policy,
                         const ClassifierModel& classifier,
                         const DGPConfig& cfg, int n_eval, int n_mc,
                         std::uint64_t seed, bool terminal = false);

}  // namespace afape
