#pragma once
// Semi-offline simulation: draws action trajectories from a blocked
// simulation policy over the observed cells of each record, recording per-step
// costs and the sampled-action probabilities under both the simulation and the
// target policy. The same trajectory sampler performs full-information
// rollouts (availability = everything), which keeps the missing-data
// estimators bit-compatible with the semi-offline ones.

#include <cstdint>
#include <string>
#include <vector>

#include "afape/classify.hpp"
#include "afape/policy.hpp"
#include "afape/types.hpp"

namespace afape {

struct SimRecord {
  int parent_index = 0;       // position in the parent dataset
  long long parent_id = 0;
  int replicate = 0;
  MaskTrajectory a_prime;     // simulated acquisitions, a'^t <= A^t
  std::vector<double> cost;   // C'^t per t = 1..T
  std::vector<double> pi_alpha;  // target prob of the sampled a'^t
  std::vector<double> pi_sim;    // blocked simulation prob of the sampled a'^t
};

struct SimDataset {
  std::vector<SimRecord> sims;
  int n_mc = 0;
  int steps = 0;
  std::string target_policy;  // provenance
  std::string sim_policy;     // provenance ("blocked(<base>)")
  bool sim_is_target = true;
  std::uint64_t seed = 0;

  double total_cost(const SimRecord& s) const {
    double c = 0;
    for (double v : s.cost) c += v;
    return c;
  }
};

// Observation of the parent's observed cells under the simulated masks:
// X' = G_{A'}(X). Every revealed cell must exist in the parent's panel.
ObservedPanel sim_panel(const Record& parent, const MaskTrajectory& a_prime,
                        const SuperfeatureMap& map);

struct TrajectoryResult {
  MaskTrajectory a_prime;
  std::vector<double> cost;
  std::vector<double> pi_alpha;
  std::vector<double> pi_sim;
};

// One trajectory of the blocked simulation policy against the availability
// pattern (avail_x, avail_masks). With avail_masks all-ones this is an
// unconstrained rollout of the simulation policy.
TrajectoryResult simulate_blocked_trajectory(
    const SuperfeatureMap& map, const ObservedPanel& avail_x,
    const MaskTrajectory& avail_masks, const LabelSeq& labels,
    const PolicySpec& target, const PolicySpec& sim_base,
    const ClassifierModel& classifier, const CostSpec& costs, RngStream& rng);

// Simulated dataset D' over the given record indices, n_mc replicates each.
// sim_base is blocked per record; pass target == sim_base for the on-policy
// default. Replicates are keyed by (seed, record id, replicate) and are
// independent of worker count.
SimDataset sample_dprime(const Dataset& data, const std::vector<int>& indices,
                         const PolicySpec& target, const PolicySpec& sim_base,
                         const ClassifierModel& classifier,
                         const CostSpec& costs, int n_mc, std::uint64_t seed);

// Monte-Carlo policy value on a fully observed panel: mean over n_mc
// trajectories of the summed per-step costs. In terminal mode only the
// horizon-step prediction is costed (plus all acquisition costs).
double rollout_full(const FullPanel& full, const LabelSeq& labels,
                    const SuperfeatureMap& map, const PolicySpec& policy,
                    const ClassifierModel& classifier, const CostSpec& costs,
                    int n_mc, RngStream& rng, bool terminal = false);

// Terminal-cost transform: moves the whole trajectory cost to the horizon
// step, keeping only the final prediction's misclassification cost.
std::vector<double> terminal_costs(const MaskTrajectory& a_prime,
                                   const std::vector<double>& per_step,
                                   const CostSpec& costs);
void to_terminal_costs(SimDataset& sim, const CostSpec& costs);

}  // namespace afape
