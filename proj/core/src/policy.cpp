#include "afape/policy.hpp"

#include <cmath>

namespace afape {

StepMask MaskDistribution::sample(RngStream& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  const std::uint32_t n = 1u << K;
  for (std::uint32_t m = 0; m < n; ++m) {
    acc += p[m];
    if (u < acc) return StepMask(m, K);
  }
  // Guard against accumulated rounding: return the last mask with mass.
  for (std::uint32_t m = n; m-- > 0;)
    if (p[m] > 0) return StepMask(m, K);
  throw InvalidInput("MaskDistribution::sample: zero distribution");
}

double MaskDistribution::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

void MaskDistribution::renormalize() {
  const double s = total();
  if (s <= 0) throw InvalidInput("MaskDistribution: cannot renormalize zero mass");
  for (double& v : p) v /= s;
}

MaskDistribution MaskDistribution::point_mass(const StepMask& m) {
  MaskDistribution d;
  d.K = m.size();
  d.p.assign(1u << d.K, 0.0);
  d.p[m.bits()] = 1.0;
  return d;
}

MaskDistribution MaskDistribution::factorized(const std::vector<double>& bit_probs) {
  MaskDistribution d;
  d.K = static_cast<int>(bit_probs.size());
  if (d.K > 12) throw InvalidInput("MaskDistribution: K > 12 not enumerable");
  const std::uint32_t n = 1u << d.K;
  d.p.assign(n, 0.0);
  for (std::uint32_t m = 0; m < n; ++m) {
    double prob = 1.0;
    for (int k = 0; k < d.K; ++k)
      prob *= ((m >> k) & 1u) ? bit_probs[k] : 1.0 - bit_probs[k];
    d.p[m] = prob;
  }
  return d;
}

std::string PolicySpec::id() const {
  switch (kind) {
    case Kind::RandomP: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "random%d", int(std::lround(p * 100)));
      return buf;
    }
    case Kind::FixedMask:
      if (mask.all()) return "fixed100";
      if (mask.none()) return "fixed0";
      return "fixed" + std::to_string(mask.bits());
    case Kind::Threshold:
      return "threshold";
  }
  return "unknown";
}

void check_history_consistency(const SuperfeatureMap& map, int t,
                               const ObservedPanel& hist_x,
                               const MaskTrajectory& hist_a) {
  if (static_cast<int>(hist_a.size()) < t - 1)
    throw InvalidInput("history shorter than t-1 steps");
  for (int j = 0; j < hist_x.cols(); ++j)
    if (!hist_x.observed(0, j))
      throw InvalidInput("inconsistent history: row 0 not fully observed");
  for (int s = 1; s < t; ++s) {
    for (int k = 0; k < map.num_super(); ++k) {
      const bool acq = hist_a[s - 1].bit(k);
      for (int j : map.groups[k])
        if (hist_x.observed(s, j) != acq)
          throw InvalidInput("inconsistent history: cells do not match masks");
    }
  }
}

std::vector<double> acquire_probs(const PolicySpec& policy,
                                  const SuperfeatureMap& map, int t,
                                  const ObservedPanel& hist_x,
                                  const MaskTrajectory& hist_a) {
  (void)hist_a;
  const int K = map.num_super();
  std::vector<double> probs(K, 1.0);
  switch (policy.kind) {
    case PolicySpec::Kind::RandomP:
      for (int k = 0; k < K; ++k)
        probs[k] = map.is_free(k) ? 1.0 : policy.p;
      break;
    case PolicySpec::Kind::FixedMask:
      if (policy.mask.size() != K)
        throw InvalidInput("FixedMask policy: mask width mismatch");
      for (int k = 0; k < K; ++k) probs[k] = policy.mask.bit(k) ? 1.0 : 0.0;
      break;
    case PolicySpec::Kind::Threshold: {
      const int d = map.num_sub();
      if (static_cast<int>(policy.coeffs.size()) != d)
        throw InvalidInput("Threshold policy: coefficient length mismatch");
      double score = 0.0;
      for (int j = 0; j < d; ++j) {
        const double fill =
            policy.impute.empty() ? 0.0 : policy.impute[j];
        score += policy.coeffs[j] * hist_x.value_or(t - 1, j, fill);
      }
      const bool acquire = score > 0.0;
      for (int k = 0; k < K; ++k)
        probs[k] = map.is_free(k) ? 1.0 : (acquire ? 1.0 : 0.0);
      break;
    }
  }
  return probs;
}

MaskDistribution policy_prob(const PolicySpec& policy,
                             const SuperfeatureMap& map, int t,
                             const ObservedPanel& hist_x,
                             const MaskTrajectory& hist_a) {
  check_history_consistency(map, t, hist_x, hist_a);
  return MaskDistribution::factorized(
      acquire_probs(policy, map, t, hist_x, hist_a));
}

MaskDistribution block(const MaskDistribution& base, const StepMask& a_t) {
  MaskDistribution out = base;
  double mass = 0.0;
  const std::uint32_t n = 1u << out.K;
  for (std::uint32_t m = 0; m < n; ++m) {
    if ((m & ~a_t.bits()) != 0)
      out.p[m] = 0.0;  // a' </= a_t
    else
      mass += out.p[m];
  }
  if (mass <= 0.0) return MaskDistribution::point_mass(StepMask::zeros(out.K));
  for (double& v : out.p) v /= mass;
  return out;
}

MaskDistribution block(const PolicySpec& policy, const SuperfeatureMap& map,
                       int t, const ObservedPanel& hist_x,
                       const MaskTrajectory& hist_a, const StepMask& a_t) {
  return block(policy_prob(policy, map, t, hist_x, hist_a), a_t);
}

double geq_probability(const std::vector<double>& beta_probs,
                       const StepMask& a_prime) {
  if (static_cast<int>(beta_probs.size()) != a_prime.size())
    throw InvalidInput("geq_probability: width mismatch");
  double prod = 1.0;
  for (int k = 0; k < a_prime.size(); ++k)
    if (a_prime.bit(k)) prod *= beta_probs[k];
  return prod;
}

MaskDistribution truncated_beta_dist(const std::vector<double>& beta_probs,
                                     const StepMask& a_prime) {
  const double denom = geq_probability(beta_probs, a_prime);
  if (denom <= 0.0)
    throw InvalidInput("truncated_beta: zero mass on {A >= a'}");
  MaskDistribution base = MaskDistribution::factorized(beta_probs);
  MaskDistribution out = base;
  const std::uint32_t n = 1u << out.K;
  for (std::uint32_t m = 0; m < n; ++m) {
    if ((a_prime.bits() & ~m) != 0)
      out.p[m] = 0.0;  // a < a' somewhere
    else
      out.p[m] /= denom;
  }
  return out;
}

std::string to_string(PiIdVariant v) {
  switch (v) {
    case PiIdVariant::TruncatedBeta:
      return "truncated-beta";
    case PiIdVariant::OfflineDelta:
      return "offline-delta";
    case PiIdVariant::MissingDelta:
      return "missing-delta";
  }
  return "?";
}

MaskDistribution pi_id_distribution(PiIdVariant variant,
                                    const std::vector<double>& beta_probs,
                                    const StepMask& a_prime) {
  switch (variant) {
    case PiIdVariant::TruncatedBeta:
      return truncated_beta_dist(beta_probs, a_prime);
    case PiIdVariant::OfflineDelta:
      return MaskDistribution::point_mass(a_prime);
    case PiIdVariant::MissingDelta:
      return MaskDistribution::point_mass(StepMask::ones(a_prime.size()));
  }
  throw InvalidInput("pi_id_distribution: unknown variant");
}

}  // namespace afape
