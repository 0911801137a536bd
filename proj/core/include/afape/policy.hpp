#pragma once
// Acquisition policies over superfeature masks: random, fixed and threshold
// target policies, the blocking transform that removes mass from masks
// exceeding the retrospectively available one, and the identifying
// conditionals (truncated retrospective policy and the two delta choices that
// recover the offline-RL and missing-data estimators).

#include <string>
#include <vector>

#include "afape/rng.hpp"
#include "afape/types.hpp"

namespace afape {

// Dense distribution over the 2^K masks of one step. K <= 12.
struct MaskDistribution {
  int K = 0;
  std::vector<double> p;  // indexed by mask bits

  double prob(const StepMask& m) const { return p[m.bits()]; }
  StepMask sample(RngStream& rng) const;
  double total() const;
  void renormalize();

  static MaskDistribution point_mass(const StepMask& m);
  // Independent per-superfeature acquisition probabilities.
  static MaskDistribution factorized(const std::vector<double>& bit_probs);
};

struct PolicySpec {
  enum class Kind { RandomP, FixedMask, Threshold };

  Kind kind = Kind::RandomP;
  double p = 0.5;               // RandomP: probability per costly superfeature
  StepMask mask;                // FixedMask
  std::vector<double> coeffs;   // Threshold: weights over subfeature columns
  std::vector<double> impute;   // Threshold: imputation constants, default 0

  bool deterministic() const { return kind != Kind::RandomP; }
  std::string id() const;

  static PolicySpec random_p(double p) {
    PolicySpec s;
    s.kind = Kind::RandomP;
    s.p = p;
    return s;
  }
  static PolicySpec fixed(const StepMask& m) {
    PolicySpec s;
    s.kind = Kind::FixedMask;
    s.mask = m;
    return s;
  }
  static PolicySpec threshold(std::vector<double> coeffs) {
    PolicySpec s;
    s.kind = Kind::Threshold;
    s.coeffs = std::move(coeffs);
    return s;
  }
};

// Throws InvalidInput unless rows 1..t-1 of hist_x are observed exactly where
// hist_a acquires them (row 0 must be fully observed).
void check_history_consistency(const SuperfeatureMap& map, int t,
                               const ObservedPanel& hist_x,
                               const MaskTrajectory& hist_a);

// Per-superfeature acquisition probabilities of the (factorized) policy at
// step t. Free superfeatures are acquired with probability 1.
std::vector<double> acquire_probs(const PolicySpec& policy,
                                  const SuperfeatureMap& map, int t,
                                  const ObservedPanel& hist_x,
                                  const MaskTrajectory& hist_a);

// Full distribution over masks at step t given the (simulated) history.
MaskDistribution policy_prob(const PolicySpec& policy,
                             const SuperfeatureMap& map, int t,
                             const ObservedPanel& hist_x,
                             const MaskTrajectory& hist_a);

// Blocking transform: zero out masks a' with a' </= a_t and renormalize.
// When the base policy has no mass on the allowed set (a deterministic policy
// wanting an unavailable mask), falls back to a point mass on the all-zeros
// mask; the target-policy numerator is zero there, so such samples carry no
// weight.
MaskDistribution block(const MaskDistribution& base, const StepMask& a_t);
MaskDistribution block(const PolicySpec& policy, const SuperfeatureMap& map,
                       int t, const ObservedPanel& hist_x,
                       const MaskTrajectory& hist_a, const StepMask& a_t);

// Truncated retrospective policy: pi_id(a) = I(a >= a') pi_beta(a) /
// pi_beta(A >= a'), for factorized per-bit probabilities beta_probs.
// Structural bits (probability exactly 1) are supported. Throws
// PositivityError via the caller when the denominator vanishes; here a zero
// denominator raises InvalidInput.
MaskDistribution truncated_beta_dist(const std::vector<double>& beta_probs,
                                     const StepMask& a_prime);

// Product over required bits: pi_beta(A >= a') for factorized probabilities.
double geq_probability(const std::vector<double>& beta_probs,
                       const StepMask& a_prime);

enum class PiIdVariant { TruncatedBeta, OfflineDelta, MissingDelta };

std::string to_string(PiIdVariant v);

// The identifying conditional over retrospective masks for each variant.
MaskDistribution pi_id_distribution(PiIdVariant variant,
                                    const std::vector<double>& beta_probs,
                                    const StepMask& a_prime);

}  // namespace afape
