#include "afape/simulate.hpp"

#include "afape/parallel.hpp"

namespace afape {

ObservedPanel sim_panel(const Record& parent, const MaskTrajectory& a_prime,
                        const SuperfeatureMap& map) {
  const int T = parent.observed.steps();
  const int d = parent.observed.cols();
  ObservedPanel out(T, d);
  for (int j = 0; j < d; ++j) out.set(0, j, *parent.observed.cell(0, j));
  for (int t = 1; t <= T; ++t) {
    for (int k = 0; k < map.num_super(); ++k) {
      if (!a_prime[t - 1].bit(k)) continue;
      for (int j : map.groups[k]) {
        if (!parent.observed.observed(t, j))
          throw InvalidInput("sim_panel: simulated mask exceeds availability");
        out.set(t, j, *parent.observed.cell(t, j));
      }
    }
  }
  return out;
}

TrajectoryResult simulate_blocked_trajectory(
    const SuperfeatureMap& map, const ObservedPanel& avail_x,
    const MaskTrajectory& avail_masks, const LabelSeq& labels,
    const PolicySpec& target, const PolicySpec& sim_base,
    const ClassifierModel& classifier, const CostSpec& costs, RngStream& rng) {
  const int T = avail_x.steps();
  const int d = avail_x.cols();
  TrajectoryResult out;
  out.a_prime.reserve(T);
  out.cost.reserve(T);

  ObservedPanel hist(T, d);  // revealed-so-far simulated panel
  for (int j = 0; j < d; ++j) hist.set(0, j, *avail_x.cell(0, j));

  for (int t = 1; t <= T; ++t) {
    const MaskDistribution target_dist =
        policy_prob(target, map, t, hist, out.a_prime);
    const MaskDistribution sim_dist =
        block(policy_prob(sim_base, map, t, hist, out.a_prime), avail_masks[t - 1]);
    const StepMask a = sim_dist.sample(rng);
    out.pi_sim.push_back(sim_dist.prob(a));
    out.pi_alpha.push_back(target_dist.prob(a));
    out.a_prime.push_back(a);
    // Reveal the acquired cells.
    for (int k = 0; k < map.num_super(); ++k) {
      if (!a.bit(k)) continue;
      for (int j : map.groups[k]) {
        if (!avail_x.observed(t, j))
          throw InvalidInput("simulate: acquired an unavailable cell");
        hist.set(t, j, *avail_x.cell(t, j));
      }
    }
    out.cost.push_back(step_cost(a, hist, out.a_prime, t, labels[t - 1],
                                 classifier, costs));
  }
  return out;
}

SimDataset sample_dprime(const Dataset& data, const std::vector<int>& indices,
                         const PolicySpec& target, const PolicySpec& sim_base,
                         const ClassifierModel& classifier,
                         const CostSpec& costs, int n_mc, std::uint64_t seed) {
  if (n_mc <= 0) throw InvalidInput("sample_dprime: n_mc must be positive");
  SimDataset out;
  out.n_mc = n_mc;
  out.steps = data.steps;
  out.target_policy = target.id();
  out.sim_policy = "blocked(" + sim_base.id() + ")";
  out.sim_is_target = target.id() == sim_base.id();
  out.seed = seed;
  out.sims.resize(indices.size() * static_cast<size_t>(n_mc));

  parallel_for(static_cast<int>(indices.size()), [&](int i) {
    const int rec_idx = indices[i];
    const Record& r = data.records[rec_idx];
    for (int m = 0; m < n_mc; ++m) {
      RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Simulate,
                    static_cast<std::uint64_t>(m));
      TrajectoryResult tr = simulate_blocked_trajectory(
          data.map, r.observed, r.masks, r.labels, target, sim_base,
          classifier, costs, rng);
      SimRecord s;
      s.parent_index = rec_idx;
      s.parent_id = r.id;
      s.replicate = m;
      s.a_prime = std::move(tr.a_prime);
      s.cost = std::move(tr.cost);
      s.pi_alpha = std::move(tr.pi_alpha);
      s.pi_sim = std::move(tr.pi_sim);
      out.sims[static_cast<size_t>(i) * n_mc + m] = std::move(s);
    }
  });
  return out;
}

double rollout_full(const FullPanel& full, const LabelSeq& labels,
                    const SuperfeatureMap& map, const PolicySpec& policy,
                    const ClassifierModel& classifier, const CostSpec& costs,
                    int n_mc, RngStream& rng, bool terminal) {
  if (n_mc <= 0) throw InvalidInput("rollout_full: n_mc must be positive");
  const int T = full.steps();
  const int d = full.cols();
  ObservedPanel avail(T, d);
  for (int t = 0; t <= T; ++t)
    for (int j = 0; j < d; ++j) avail.set(t, j, full(t, j));
  const MaskTrajectory all_ones(T, StepMask::ones(map.num_super()));

  double total = 0.0;
  for (int m = 0; m < n_mc; ++m) {
    TrajectoryResult tr = simulate_blocked_trajectory(
        map, avail, all_ones, labels, policy, policy, classifier, costs, rng);
    const std::vector<double> cost =
        terminal ? terminal_costs(tr.a_prime, tr.cost, costs) : tr.cost;
    for (double c : cost) total += c;
  }
  return total / n_mc;
}

std::vector<double> terminal_costs(const MaskTrajectory& a_prime,
                                   const std::vector<double>& per_step,
                                   const CostSpec& costs) {
  const int T = static_cast<int>(per_step.size());
  std::vector<double> out(T, 0.0);
  double acq_total = 0.0;
  for (int t = 1; t <= T; ++t) acq_total += acquisition_cost(a_prime[t - 1], costs);
  const double mc_last = per_step[T - 1] - acquisition_cost(a_prime[T - 1], costs);
  out[T - 1] = acq_total + mc_last;
  return out;
}

void to_terminal_costs(SimDataset& sim, const CostSpec& costs) {
  for (auto& s : sim.sims) s.cost = terminal_costs(s.a_prime, s.cost, costs);
}

}  // namespace afape
