#pragma once
// Point estimators of the expected counterfactual cost J (per-step-cost form)
// with inverse-probability weights, weight normalization, and nonparametric
// bootstrap intervals.
//
// Every estimator is split into a preparation step that reduces the data to a
// per-record statistic table and a cheap evaluation over a row multiset, so
// bootstrap resampling never re-runs simulations or nuisance models.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afape/classify.hpp"
#include "afape/dgp.hpp"
#include "afape/nuisance.hpp"
#include "afape/policy.hpp"
#include "afape/simulate.hpp"
#include "afape/types.hpp"

namespace afape {

struct WeightTrajectory {
  std::vector<double> rho;  // rho[0..T], rho[0] = 1
};

struct EstimateReport {
  std::string estimator;
  double estimate = 0.0;
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  std::uint64_t seed = 0;
  bool normalized = false;
};

// Cumulative products of the two per-step weight fractions for one simulated
// trajectory: target/simulation and identifying-conditional/propensity.
WeightTrajectory weights_semi(const Dataset& data, const SimRecord& sim,
                              const PropensityModel& prop, PiIdVariant variant);

// ---------------------------------------------------------------------------
// Per-record statistic tables
// ---------------------------------------------------------------------------

// One row per evaluation record. Inner sums run over that record's simulation
// replicates (or imputations); eval_* divides by inner_count.
struct StatTable {
  std::vector<int> records;   // dataset record index per row
  int inner_count = 1;        // replicates per record contributing to sums
  int steps = 0;
  Eigen::MatrixXd rho_sum;    // n x (T+1), col t: sum of rho^t (col 0 = count)
  Eigen::MatrixXd rho_cost;   // n x T, col t-1: sum of rho^t C^t
  Eigen::MatrixXd rho_q;      // n x T (DRL only), sum of rho^t Q^t
  Eigen::MatrixXd rho_v;      // n x T (DRL only), sum of rho^{t-1} V^{t-1}
  Eigen::VectorXd value;      // per-record value (direct estimators)
  Eigen::VectorXd valid;      // 1 if the row contributes (direct estimators)
  bool ipw_form = true;       // eval via weights vs via plain value mean
  bool drl_form = false;
};

// Weighted tables --------------------------------------------------------

// Semi-offline IPW/DRL table from a simulated dataset. q may be null (IPW).
StatTable prepare_semi(const Dataset& data, const SimDataset& sim,
                       const PropensityModel& prop, PiIdVariant variant,
                       const QSemiModel* q = nullptr);

// Exact inner expectation over all simulation trajectories with positive
// blocked probability (enumeration; used for identity checks and small K).
StatTable prepare_semi_exact(const Dataset& data, const std::vector<int>& records,
                             const PropensityModel& prop,
                             const PolicySpec& target, const PolicySpec& sim_base,
                             PiIdVariant variant, const ClassifierModel& classifier,
                             const CostSpec& costs);

// Offline-RL IPW table: weights along the retrospective trajectory.
StatTable prepare_off(const Dataset& data, const std::vector<int>& records,
                      const PropensityModel& prop, const PolicySpec& target,
                      const ClassifierModel& classifier, const CostSpec& costs,
                      bool terminal = false);

// Missing-data IPW table: per-step complete-prefix indicator weights times
// target-policy rollouts over the observed cells. Rollouts share the
// simulation RNG keying, so on records where they are defined they replicate
// the semi-offline trajectories exactly.
StatTable prepare_miss(const Dataset& data, const std::vector<int>& records,
                       const PropensityModel& prop, const PolicySpec& target,
                       const ClassifierModel& classifier, const CostSpec& costs,
                       int n_mc, std::uint64_t seed, bool terminal = false);

// Direct (value-per-record) tables ----------------------------------------

// Blocking baseline: plain mean of summed simulated costs.
StatTable prepare_blocking(const Dataset& data, const SimDataset& sim);

// Complete-case analysis: unweighted target rollouts on complete cases.
StatTable prepare_cc(const Dataset& data, const std::vector<int>& records,
                     const PolicySpec& target, const ClassifierModel& classifier,
                     const CostSpec& costs, int n_mc, std::uint64_t seed,
                     bool terminal = false);

// Mean imputation: missing cells filled with the training means.
StatTable prepare_imp_mean(const Dataset& data, const std::vector<int>& records,
                           const std::vector<double>& mu,
                           const PolicySpec& target,
                           const ClassifierModel& classifier,
                           const CostSpec& costs, int n_mc, std::uint64_t seed,
                           bool terminal = false);

// Multiple imputation with the oracle Gaussian conditional of the AR(1)
// process; optionally importance-resampled to condition on the labels.
StatTable prepare_mi_miss(const Dataset& data, const std::vector<int>& records,
                          const DGPConfig& cfg, const PolicySpec& target,
                          const ClassifierModel& classifier,
                          const CostSpec& costs, int m_imp, int n_mc,
                          std::uint64_t seed, bool condition_on_label = false,
                          bool terminal = false);

// Direct method: mean of V^0(x^0).
StatTable prepare_dm_semi(const Dataset& data, const std::vector<int>& records,
                          const QSemiModel& q);

// ---------------------------------------------------------------------------
// Evaluation and bootstrap
// ---------------------------------------------------------------------------

// rows: multiset of row indices into the table (empty = all rows once).
double eval_table(const StatTable& table, const std::vector<int>& rows,
                  bool normalize);

std::pair<double, double> bootstrap_ci(
    const std::function<double(const std::vector<int>&)>& statistic, int n_rows,
    int B, double level, std::uint64_t seed);

// Point estimate plus percentile bootstrap over table rows (B = 0 skips CI).
EstimateReport report_from_table(const std::string& name, const StatTable& table,
                                 bool normalize, int B, double level,
                                 std::uint64_t seed);

// Mean and standard error of the trajectory weight rho^T over all inner
// samples (diagnostic for the importance-weight identity E[rho^T] = 1).
std::pair<double, double> weight_mean_se(const StatTable& table);

// Mean and standard error of the DRL augmentation term
// sum_t(-rho^t Q^t + rho^{t-1} V^{t-1}) over records.
std::pair<double, double> augmentation_mean_se(const StatTable& table);

}  // namespace afape
