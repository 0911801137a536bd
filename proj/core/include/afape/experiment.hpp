#pragma once
// Experiment orchestration: the generate -> split -> fit -> simulate ->
// estimate pipeline, the estimator registry, convergence sweeps, and
// plot-ready long-format CSV output.

#include <optional>
#include <string>
#include <vector>

#include "afape/classify.hpp"
#include "afape/dgp.hpp"
#include "afape/estimators.hpp"
#include "afape/nuisance.hpp"
#include "afape/positivity.hpp"
#include "afape/simulate.hpp"
#include "afape/types.hpp"

namespace afape {

enum class EstimatorId {
  IpwOff,
  IpwMiss,
  MiMiss,
  IpwSemi,
  DmSemi,
  DrlSemi,
  ImpMean,
  Blocking,
  Cc,
};

std::string to_string(EstimatorId id);
EstimatorId estimator_from_string(const std::string& name);
std::vector<EstimatorId> all_estimators();

struct RunConfig {
  Experiment experiment = Experiment::E1;
  int n = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> agents = {"random50", "fixed100"};
  std::vector<std::string> estimators = {"all"};
  int n_mc = 10;
  int m_imp = 10;
  int bootstrap_B = 0;
  double level = 0.95;
  bool normalize = true;
  bool oracle_propensity = false;
  bool q_zero = false;                 // Q-model misspecification switch
  bool drop_first_covariate = false;   // propensity misspecification switch
  bool mi_condition_on_label = false;
  bool terminal_cost_mode = false;     // prediction cost at the horizon only
  int q_epochs = 50;
  int q_hidden_layers = 1;
  std::vector<int> ns = {500, 1000, 2000, 4000, 8000, 16000};  // convergence grid
  int n_seeds = 20;                                            // convergence seeds
  std::string out_path;

  void apply(const std::string& key, const std::string& value);
};

// Flat key = value file (lines starting with '#' are comments).
RunConfig parse_config_file(const std::string& path);

PolicySpec parse_agent(const std::string& name, const DGPConfig& cfg);

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

struct PipelineBase {
  DGPConfig cfg;
  Dataset data;
  ClassifierModel classifier;
  PropensityModel prop;         // fitted on the nuisance split
  PropensityModel prop_oracle;  // exact mechanism
};

PipelineBase build_pipeline_base(const RunConfig& run);

struct AgentArtifacts {
  PolicySpec target;
  SimDataset sim_nuisance;  // for the Q fit
  SimDataset sim_test;      // for the semi-offline estimators
  QSemiModel q;
  double truth = 0.0;
};

AgentArtifacts build_agent(const PipelineBase& base, const RunConfig& run,
                           const PolicySpec& target, bool with_truth = true);

// Runs one estimator against prepared artifacts.
EstimateReport run_estimator(EstimatorId id, const PipelineBase& base,
                             const AgentArtifacts& agent, const RunConfig& run);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string estimator;
  std::string agent;
  int experiment = 1;
  int n = 0;
  double estimate = 0.0;
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  double truth = 0.0;
  std::uint64_t seed = 0;
};

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path);

std::vector<ResultRow> run_experiment(const RunConfig& run);

struct ConvergenceRow {
  std::string estimator;
  std::string agent;
  int n = 0;
  int seed_index = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
};

void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const std::string& path);

// Error-vs-sample-size sweep of the three IPW estimators over test-split
// subsamples; the ground truth uses the full test split.
std::vector<ConvergenceRow> run_convergence(const RunConfig& run);

}  // namespace afape
