#pragma once
// Admissible-set computation and positivity diagnostics.
//
// Continuous experiments get a Monte-Carlo threshold diagnostic (regional
// positivity is not decidable from finite data there); small discrete models
// get exact enumeration of the local/regional/maximal admissible sets and of
// the offline-RL and missing-data positivity assumptions, which is what the
// comparison lemma and the hand-computed toy instances are tested against.

#include <functional>
#include <string>
#include <vector>

#include "afape/nuisance.hpp"
#include "afape/policy.hpp"
#include "afape/types.hpp"

namespace afape {

enum class PositivityView { Offline, Missing, SemiGlobal, SemiMaximal };

std::string to_string(PositivityView v);

struct PositivityReport {
  PositivityView view = PositivityView::SemiMaximal;
  double violation_fraction = 0.0;  // fraction of (record, t) checks below O
  double min_mass = 1.0;
  double threshold = 0.01;
  long long checks = 0;
  std::vector<long long> offending_ids;  // sample of violating record ids
  std::string to_json() const;
};

// All masks a >= a_prime with factorized propensity mass >= O. An empty
// result signals a local-positivity failure.
std::vector<StepMask> local_admissible_set(const PropensityModel& prop, int t,
                                           const ObservedPanel& hist_x,
                                           const StepMask& a_prime, double O);

// Monte-Carlo diagnostic: sample target-policy trajectories over the data and
// track the per-step identifying mass for the chosen view
// (semi: pi_beta(A >= a'), missing: pi_beta(A = 1), offline: pi_beta(A = a')).
PositivityReport check_positivity(PositivityView view, const Dataset& data,
                                  const PropensityModel& prop,
                                  const PolicySpec& target,
                                  const std::vector<double>& impute_means,
                                  double O, int sample_budget,
                                  std::uint64_t seed);

// Diagnostic form of the maximal global positivity assumption.
PositivityReport check_maximal_global(const Dataset& data,
                                      const PropensityModel& prop,
                                      const PolicySpec& target,
                                      const std::vector<double>& impute_means,
                                      double O, int sample_budget,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exact enumeration on a finite model (one superfeature, one subfeature,
// finite feature alphabet, Markov transitions, tabulated policies).
// ---------------------------------------------------------------------------

namespace discrete {

// Observed value code: 0..n_vals-1 = observed value index, n_vals = missing.
struct Model {
  int T = 2;
  int n_vals = 2;
  std::vector<double> x0;  // P(x^0 = v)
  // trans[t-1][prev][next] = p(x^t = next | x^{t-1} = prev), t = 1..T
  std::vector<std::vector<std::vector<double>>> trans;
  // Retrospective policy on the observed history; target policy on the
  // simulated history. Histories are code sequences [x0, a1, x1c, a2, ...].
  std::function<double(const std::vector<int>&)> pi_beta;   // P(A^t = 1 | hist)
  std::function<double(const std::vector<int>&)> pi_alpha;  // P(A'^t = 1 | hist)
  double O = 0.01;

  int missing_code() const { return n_vals; }
};

// History bookkeeping for the enumeration walkers.
struct Node {
  std::vector<int> data_hist;   // x0, a1, x1-code, ...   (retrospective)
  std::vector<int> sim_hist;    // x0, a'1, x'1-code, ... (simulated)
  std::vector<double> belief;   // filtering distribution of the latest x value
};

// Local admissible set at (node, a'): subsets of {0,1} here.
std::vector<int> local_adm(const Model& m, int t, const Node& node, int a_prime);

// Regional admissible set per the recursive definition; empty = failure.
std::vector<int> regional_adm(const Model& m, int t, const Node& node,
                              int a_prime);

// Maximal regional positivity at (node, a'): regional == local here and
// recursively at every reachable future node.
bool maximal_regional(const Model& m, int t, const Node& node, int a_prime);

bool global_positivity(const Model& m);          // semi-offline (Def-based)
bool maximal_global_positivity(const Model& m);  // semi-offline, maximal
bool offline_positivity(const Model& m);         // sequential overlap
bool missing_positivity(const Model& m);         // complete-case overlap

// Derived forms used as cross-checks: the missing-data condition is
// "all-ones is locally admissible along every fully-acquired history"; the
// offline condition is "the target action is locally admissible along every
// jointly reachable history".
bool missing_positivity_via_adm(const Model& m);
bool offline_positivity_via_adm(const Model& m);

}  // namespace discrete

}  // namespace afape
