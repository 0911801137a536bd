#pragma once
// Discrete toy instance: one costly superfeature over one subfeature column,
// a single step, binary feature values and a tabulated label law. Everything
// about it is small enough to enumerate, which provides exact values of J and
// of the Q/V functions independently of any estimator code path.

#include <array>

#include "afape/classify.hpp"
#include "afape/dgp.hpp"
#include "afape/rng.hpp"
#include "afape/types.hpp"

namespace toy {

using namespace afape;

struct ToySpec {
  // values are -1 / +1, indexed 0 / 1
  double p_x0_pos = 0.5;
  std::array<double, 2> p_x1_pos = {0.3, 0.8};    // given x0 = -1 / +1
  // p(y = 1 | x0, x1), indexed [x0][x1]
  std::array<std::array<double, 2>, 2> p_y1 = {{{0.1, 0.6}, {0.4, 0.9}}};
  std::array<double, 2> pi_beta = {0.25, 0.7};    // P(A=1 | x0 = -1 / +1)
  double c_acq = 1.0;
  double c_mc = 4.0;

  SuperfeatureMap map() const {
    SuperfeatureMap m;
    m.groups = {{0}};
    m.free_set = {false};
    return m;
  }
  CostSpec costs() const {
    CostSpec c;
    c.c_acq = {c_acq};
    c.c_mc = c_mc;
    return c;
  }
  static double value(int idx) { return idx ? 1.0 : -1.0; }
};

// Fixed classifier: with the feature acquired predict sign(0.5 x0 + x1),
// otherwise sign(x0) (imputation mean 0). Score 0 predicts class 1.
inline ClassifierModel toy_classifier() {
  ClassifierModel m;
  m.mu = {0.0};
  m.num_super = 1;
  ClassifierModel::StepModel s;
  s.w = Eigen::VectorXd(4);  // [x0, x1_imputed, a1, bias]
  s.w << 0.5, 1.0, 0.0, 0.0;
  m.steps = {s};
  return m;
}

// Hand arithmetic of the same rule, kept independent of ClassifierModel.
inline int toy_predict(int x0_idx, bool acquired, int x1_idx) {
  const double score = acquired
                           ? 0.5 * ToySpec::value(x0_idx) + ToySpec::value(x1_idx)
                           : 0.5 * ToySpec::value(x0_idx);
  return score >= 0.0 ? 1 : 0;
}

// Exact Q(a', x0) = E[C' | A' = a', x0] by enumeration over (x1, y).
inline double toy_exact_q(const ToySpec& s, int a_prime, int x0_idx) {
  double mis = 0.0;
  for (int x1 = 0; x1 < 2; ++x1) {
    const double px1 = x1 ? s.p_x1_pos[x0_idx] : 1.0 - s.p_x1_pos[x0_idx];
    const double py1 = s.p_y1[x0_idx][x1];
    const int pred = toy_predict(x0_idx, a_prime == 1, x1);
    const double p_wrong = pred == 1 ? 1.0 - py1 : py1;
    mis += px1 * p_wrong;
  }
  return s.c_acq * a_prime + s.c_mc * mis;
}

// Exact V(x0) and J for an acquisition probability q (target RandomP(q)).
inline double toy_exact_v(const ToySpec& s, double q, int x0_idx) {
  return (1.0 - q) * toy_exact_q(s, 0, x0_idx) + q * toy_exact_q(s, 1, x0_idx);
}

inline double toy_exact_j(const ToySpec& s, double q) {
  return (1.0 - s.p_x0_pos) * toy_exact_v(s, q, 0) +
         s.p_x0_pos * toy_exact_v(s, q, 1);
}

// Retrospective toy dataset in the library's record format (T = 1, d = 1).
inline Dataset toy_dataset(const ToySpec& s, int n, std::uint64_t seed) {
  Dataset data;
  data.map = s.map();
  data.steps = 1;
  data.records.resize(n);
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i), RngTag::ToyData);
    const int x0 = rng.bernoulli(s.p_x0_pos) ? 1 : 0;
    const int x1 = rng.bernoulli(s.p_x1_pos[x0]) ? 1 : 0;
    const int y = rng.bernoulli(s.p_y1[x0][x1]) ? 1 : 0;
    const bool acq = rng.bernoulli(s.pi_beta[x0]);

    Record r;
    r.id = i;
    FullPanel truth(1, 1);
    truth(0, 0) = ToySpec::value(x0);
    truth(1, 0) = ToySpec::value(x1);
    r.truth = truth;
    r.masks = {StepMask(acq ? 1u : 0u, 1)};
    r.observed = apply_mask(truth, r.masks, data.map);
    r.labels = {static_cast<std::uint8_t>(y)};
    data.records[i] = std::move(r);
  }
  return data;
}

}  // namespace toy
