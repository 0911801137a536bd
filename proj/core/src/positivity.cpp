#include "afape/positivity.hpp"

#include <algorithm>
#include <mutex>

#include <nlohmann/json.hpp>

#include "afape/parallel.hpp"

namespace afape {

std::string to_string(PositivityView v) {
  switch (v) {
    case PositivityView::Offline:
      return "offline";
    case PositivityView::Missing:
      return "missing";
    case PositivityView::SemiGlobal:
      return "semi-global";
    case PositivityView::SemiMaximal:
      return "semi-maximal";
  }
  return "?";
}

std::string PositivityReport::to_json() const {
  nlohmann::json j;
  j["view"] = to_string(view);
  j["violation_fraction"] = violation_fraction;
  j["min_mass"] = min_mass;
  j["threshold"] = threshold;
  j["checks"] = checks;
  j["offending_ids"] = offending_ids;
  return j.dump(2);
}

std::vector<StepMask> local_admissible_set(const PropensityModel& prop, int t,
                                           const ObservedPanel& hist_x,
                                           const StepMask& a_prime, double O) {
  const int K = prop.K;
  std::vector<StepMask> out;
  for (std::uint32_t mb = 0; mb < (1u << K); ++mb) {
    const StepMask m(mb, K);
    if (!mask_leq(a_prime, m)) continue;
    if (prop.mask_prob(t, m, hist_x) >= O) out.push_back(m);
  }
  return out;
}

PositivityReport check_positivity(PositivityView view, const Dataset& data,
                                  const PropensityModel& prop,
                                  const PolicySpec& target,
                                  const std::vector<double>& impute_means,
                                  double O, int sample_budget,
                                  std::uint64_t seed) {
  if (data.records.empty()) throw InvalidInput("check_positivity: empty dataset");
  PositivityReport rep;
  rep.view = view;
  rep.threshold = O;

  const int n = data.n();
  const int d = data.map.num_sub();
  const int K = data.map.num_super();
  const StepMask ones = StepMask::ones(K);

  std::vector<double> min_mass(sample_budget, 1.0);
  std::vector<long long> viol(sample_budget, 0);
  std::vector<long long> offender(sample_budget, -1);

  parallel_for(sample_budget, [&](int i) {
    const Record& r = data.records[i % n];
    RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Diagnose,
                  static_cast<std::uint64_t>(i / n));
    ObservedPanel hist(data.steps, d);
    for (int j = 0; j < d; ++j) hist.set(0, j, *r.observed.cell(0, j));
    MaskTrajectory prefix;
    for (int t = 1; t <= data.steps; ++t) {
      const MaskDistribution dist = policy_prob(target, data.map, t, hist, prefix);
      const StepMask a_prime = dist.sample(rng);
      double mass = 1.0;
      switch (view) {
        case PositivityView::SemiGlobal:
        case PositivityView::SemiMaximal:
          mass = propensity_geq(prop, t, r.observed, a_prime);
          break;
        case PositivityView::Missing:
          mass = prop.mask_prob(t, ones, r.observed);
          break;
        case PositivityView::Offline:
          mass = prop.mask_prob(t, a_prime, r.observed);
          break;
      }
      min_mass[i] = std::min(min_mass[i], mass);
      if (mass < O) {
        ++viol[i];
        offender[i] = r.id;
      }
      prefix.push_back(a_prime);
      // Reveal acquired cells; unavailable ones fall back to the imputation
      // constant so the simulated history stays mask-consistent.
      for (int k = 0; k < K; ++k) {
        if (!a_prime.bit(k)) continue;
        for (int j : data.map.groups[k]) {
          const double fill = impute_means.empty() ? 0.0 : impute_means[j];
          hist.set(t, j, r.observed.value_or(t, j, fill));
        }
      }
    }
  });

  long long total_viol = 0;
  for (int i = 0; i < sample_budget; ++i) {
    total_viol += viol[i];
    rep.min_mass = std::min(rep.min_mass, min_mass[i]);
    if (offender[i] >= 0 && rep.offending_ids.size() < 10 &&
        std::find(rep.offending_ids.begin(), rep.offending_ids.end(),
                  offender[i]) == rep.offending_ids.end())
      rep.offending_ids.push_back(offender[i]);
  }
  rep.checks = static_cast<long long>(sample_budget) * data.steps;
  rep.violation_fraction =
      static_cast<double>(total_viol) / static_cast<double>(rep.checks);
  return rep;
}

PositivityReport check_maximal_global(const Dataset& data,
                                      const PropensityModel& prop,
                                      const PolicySpec& target,
                                      const std::vector<double>& impute_means,
                                      double O, int sample_budget,
                                      std::uint64_t seed) {
  return check_positivity(PositivityView::SemiMaximal, data, prop, target,
                          impute_means, O, sample_budget, seed);
}

// ---------------------------------------------------------------------------
// Discrete enumeration
// ---------------------------------------------------------------------------

namespace discrete {

namespace {

std::vector<double> predictive(const Model& m, int t,
                               const std::vector<double>& belief) {
  std::vector<double> pred(m.n_vals, 0.0);
  for (int prev = 0; prev < m.n_vals; ++prev) {
    if (belief[prev] <= 0.0) continue;
    for (int next = 0; next < m.n_vals; ++next)
      pred[next] += belief[prev] * m.trans[t - 1][prev][next];
  }
  return pred;
}

double beta_prob(const Model& m, const Node& node, int a) {
  const double p1 = m.pi_beta(node.data_hist);
  return a ? p1 : 1.0 - p1;
}

double alpha_prob(const Model& m, const Node& node, int a_prime) {
  const double p1 = m.pi_alpha(node.sim_hist);
  return a_prime ? p1 : 1.0 - p1;
}

// Successor nodes after taking (a, a') at step t; one per reachable x^t
// branch (a single branch when x^t stays unobserved).
std::vector<Node> successors(const Model& m, int t, const Node& node, int a,
                             int a_prime) {
  const std::vector<double> pred = predictive(m, t, node.belief);
  std::vector<Node> out;
  if (a == 0) {
    Node nx = node;
    nx.data_hist.push_back(0);
    nx.data_hist.push_back(m.missing_code());
    nx.sim_hist.push_back(0);
    nx.sim_hist.push_back(m.missing_code());
    nx.belief = pred;
    out.push_back(std::move(nx));
    return out;
  }
  for (int v = 0; v < m.n_vals; ++v) {
    if (pred[v] <= 0.0) continue;
    Node nx = node;
    nx.data_hist.push_back(1);
    nx.data_hist.push_back(v);
    nx.sim_hist.push_back(a_prime);
    nx.sim_hist.push_back(a_prime ? v : m.missing_code());
    nx.belief.assign(m.n_vals, 0.0);
    nx.belief[v] = 1.0;
    out.push_back(std::move(nx));
  }
  return out;
}

}  // namespace

std::vector<int> local_adm(const Model& m, int t, const Node& node,
                           int a_prime) {
  (void)t;
  std::vector<int> out;
  for (int a = 0; a <= 1; ++a) {
    if (a < a_prime) continue;
    if (beta_prob(m, node, a) >= m.O) out.push_back(a);
  }
  return out;
}

std::vector<int> regional_adm(const Model& m, int t, const Node& node,
                              int a_prime) {
  std::vector<int> out;
  for (int a : local_adm(m, t, node, a_prime)) {
    if (t == m.T) {
      out.push_back(a);
      continue;
    }
    bool ok = true;
    for (const Node& nx : successors(m, t, node, a, a_prime)) {
      for (int ap_next = 0; ap_next <= 1 && ok; ++ap_next) {
        if (alpha_prob(m, nx, ap_next) <= 0.0) continue;
        if (regional_adm(m, t + 1, nx, ap_next).empty()) ok = false;
      }
      if (!ok) break;
    }
    if (ok) out.push_back(a);
  }
  return out;
}

bool maximal_regional(const Model& m, int t, const Node& node, int a_prime) {
  const std::vector<int> local = local_adm(m, t, node, a_prime);
  if (local.empty()) return false;
  if (regional_adm(m, t, node, a_prime) != local) return false;
  if (t == m.T) return true;
  for (int a : local) {
    for (const Node& nx : successors(m, t, node, a, a_prime)) {
      for (int ap_next = 0; ap_next <= 1; ++ap_next) {
        if (alpha_prob(m, nx, ap_next) <= 0.0) continue;
        if (!maximal_regional(m, t + 1, nx, ap_next)) return false;
      }
    }
  }
  return true;
}

static Node root(const Model& m, int x0) {
  Node n;
  n.data_hist = {x0};
  n.sim_hist = {x0};
  n.belief.assign(m.n_vals, 0.0);
  n.belief[x0] = 1.0;
  return n;
}

bool global_positivity(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    const Node n = root(m, x0);
    for (int ap = 0; ap <= 1; ++ap) {
      if (alpha_prob(m, n, ap) <= 0.0) continue;
      if (regional_adm(m, 1, n, ap).empty()) return false;
    }
  }
  return true;
}

bool maximal_global_positivity(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    const Node n = root(m, x0);
    for (int ap = 0; ap <= 1; ++ap) {
      if (alpha_prob(m, n, ap) <= 0.0) continue;
      if (!maximal_regional(m, 1, n, ap)) return false;
    }
  }
  return true;
}

// Walk of the target-policy-intervened process; obs_positive tracks whether
// the same observed history has positive retrospective probability.
static bool offline_walk(const Model& m, int t, const Node& node,
                         bool via_adm) {
  if (t > m.T) return true;
  for (int a = 0; a <= 1; ++a) {
    if (alpha_prob(m, node, a) <= 0.0) continue;  // here sim == data history
    if (via_adm) {
      const auto adm = local_adm(m, t, node, a);
      if (std::find(adm.begin(), adm.end(), a) == adm.end()) return false;
    } else {
      if (beta_prob(m, node, a) < m.O) return false;
    }
    for (const Node& nx : successors(m, t, node, a, a))
      if (!offline_walk(m, t + 1, nx, via_adm)) return false;
  }
  return true;
}

bool offline_positivity(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    if (!offline_walk(m, 1, root(m, x0), false)) return false;
  }
  return true;
}

bool offline_positivity_via_adm(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    if (!offline_walk(m, 1, root(m, x0), true)) return false;
  }
  return true;
}

// Walk of fully-acquired retrospective histories with positive probability.
static bool missing_walk(const Model& m, int t, const Node& node,
                         bool via_adm) {
  if (t > m.T) return true;
  if (via_adm) {
    const auto adm = local_adm(m, t, node, 0);
    if (std::find(adm.begin(), adm.end(), 1) == adm.end()) return false;
  } else {
    if (beta_prob(m, node, 1) < m.O) return false;
  }
  if (beta_prob(m, node, 1) <= 0.0) return true;  // prefix unreachable beyond
  for (const Node& nx : successors(m, t, node, 1, 1))
    if (!missing_walk(m, t + 1, nx, via_adm)) return false;
  return true;
}

bool missing_positivity(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    if (!missing_walk(m, 1, root(m, x0), false)) return false;
  }
  return true;
}

bool missing_positivity_via_adm(const Model& m) {
  for (int x0 = 0; x0 < m.n_vals; ++x0) {
    if (m.x0[x0] <= 0.0) continue;
    if (!missing_walk(m, 1, root(m, x0), true)) return false;
  }
  return true;
}

}  // namespace discrete

}  // namespace afape
