#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "afape/classify.hpp"
#include "afape/rng.hpp"
#include "afape/types.hpp"
#include "support/toy.hpp"

using namespace afape;

namespace {

FullPanel make_panel(int T, int d, double base = 0.0) {
  FullPanel p(T, d);
  for (int t = 0; t <= T; ++t)
    for (int j = 0; j < d; ++j) p(t, j) = base + t * 10 + j;
  return p;
}

StepMask mask_of(std::initializer_list<int> bits) {
  StepMask m = StepMask::zeros(static_cast<int>(bits.size()));
  int k = 0;
  for (int b : bits) m.set_bit(k++, b != 0);
  return m;
}

MaskTrajectory random_masks(int T, int K, RngStream& rng) {
  MaskTrajectory out;
  for (int t = 0; t < T; ++t)
    out.push_back(StepMask(static_cast<std::uint32_t>(rng.uniform_int(1u << K)), K));
  return out;
}

}  // namespace

TEST_CASE("apply_mask reveals exactly the acquired superfeatures") {
  const auto map = SuperfeatureMap::experiment_default();
  FullPanel full = make_panel(3, 4);
  full(1, 0) = 1.0;
  full(1, 1) = 2.0;
  full(1, 2) = 3.0;
  full(1, 3) = 4.0;

  MaskTrajectory masks = {mask_of({1, 0, 0}), mask_of({1, 1, 1}),
                          mask_of({1, 1, 1})};
  const ObservedPanel obs = apply_mask(full, masks, map);

  CHECK(obs.observed(1, 0));
  CHECK(*obs.cell(1, 0) == 1.0);
  CHECK_FALSE(obs.observed(1, 1));
  CHECK_FALSE(obs.observed(1, 2));
  CHECK_FALSE(obs.observed(1, 3));
  // row 0 always observed
  for (int j = 0; j < 4; ++j) CHECK(obs.observed(0, j));
}

TEST_CASE("apply_mask identity and zero cases") {
  const auto map = SuperfeatureMap::experiment_default();
  const FullPanel full = make_panel(3, 4);

  const MaskTrajectory ones(3, StepMask::ones(3));
  CHECK(apply_mask(full, ones, map).missing_count() == 0);

  const MaskTrajectory zeros(3, StepMask::zeros(3));
  const ObservedPanel obs = apply_mask(full, zeros, map);
  CHECK(obs.missing_count() == 3 * 4);  // all rows t >= 1
  for (int j = 0; j < 4; ++j) CHECK(obs.observed(0, j));
}

TEST_CASE("apply_mask rejects shape mismatches") {
  const auto map = SuperfeatureMap::experiment_default();
  const FullPanel full = make_panel(3, 4);
  MaskTrajectory short_traj(2, StepMask::ones(3));
  CHECK_THROWS_AS(apply_mask(full, short_traj, map), InvalidInput);
  MaskTrajectory bad_width(3, StepMask::ones(2));
  CHECK_THROWS_AS(apply_mask(full, bad_width, map), InvalidInput);
}

TEST_CASE("apply_mask is idempotent under re-masking") {
  const auto map = SuperfeatureMap::experiment_default();
  const FullPanel full = make_panel(3, 4, 0.5);
  RngStream rng(7, 0, RngTag::ToyData);
  for (int rep = 0; rep < 50; ++rep) {
    const MaskTrajectory masks = random_masks(3, 3, rng);
    const ObservedPanel once = apply_mask(full, masks, map);
    // re-masking the observed values (as a panel) with the same masks
    FullPanel as_full(3, 4);
    for (int t = 0; t <= 3; ++t)
      for (int j = 0; j < 4; ++j) as_full(t, j) = once.value_or(t, j, -999.0);
    const ObservedPanel twice = apply_mask(as_full, masks, map);
    for (int t = 0; t <= 3; ++t)
      for (int j = 0; j < 4; ++j) {
        CHECK(once.observed(t, j) == twice.observed(t, j));
        if (once.observed(t, j)) CHECK(*once.cell(t, j) == *twice.cell(t, j));
      }
  }
}

TEST_CASE("observation is monotone in the mask order") {
  const auto map = SuperfeatureMap::experiment_default();
  const FullPanel full = make_panel(3, 4);
  RngStream rng(9, 0, RngTag::ToyData);
  for (int rep = 0; rep < 100; ++rep) {
    MaskTrajectory big = random_masks(3, 3, rng);
    MaskTrajectory small = big;
    // knock out random bits to get a' <= a
    for (auto& m : small)
      for (int k = 0; k < 3; ++k)
        if (m.bit(k) && rng.bernoulli(0.5)) m.set_bit(k, false);
    const ObservedPanel obs_big = apply_mask(full, big, map);
    const ObservedPanel obs_small = apply_mask(full, small, map);
    for (int t = 1; t <= 3; ++t)
      for (int j = 0; j < 4; ++j)
        if (!obs_big.observed(t, j)) CHECK_FALSE(obs_small.observed(t, j));
  }
}

TEST_CASE("mask_leq elementwise comparison") {
  CHECK(mask_leq(mask_of({0, 1, 0}), mask_of({1, 1, 0})));
  CHECK_FALSE(mask_leq(mask_of({1, 0, 0}), mask_of({0, 1, 1})));
  const StepMask a = mask_of({1, 0, 1});
  CHECK(mask_leq(a, a));
  CHECK_THROWS_AS(mask_leq(StepMask::ones(2), StepMask::ones(3)), InvalidInput);
}

TEST_CASE("mask_leq is a partial order") {
  RngStream rng(11, 0, RngTag::ToyData);
  for (int rep = 0; rep < 2000; ++rep) {
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    const StepMask a(static_cast<std::uint32_t>(rng.uniform_int(1u << K)), K);
    const StepMask b(static_cast<std::uint32_t>(rng.uniform_int(1u << K)), K);
    const StepMask c(static_cast<std::uint32_t>(rng.uniform_int(1u << K)), K);
    CHECK(mask_leq(a, a));
    if (mask_leq(a, b) && mask_leq(b, a)) CHECK(a == b);
    if (mask_leq(a, b) && mask_leq(b, c)) CHECK(mask_leq(a, c));
  }
}

TEST_CASE("step_cost adds acquisition and misclassification parts") {
  const auto map = SuperfeatureMap::experiment_default();
  const CostSpec costs = CostSpec::experiment_default();

  // Classifier with zero weights: score 0 -> always predicts 1.
  ClassifierModel cl;
  cl.mu = {0.0, 0.0, 0.0, 0.0};
  cl.num_super = 3;
  cl.steps.resize(3);
  for (int t = 1; t <= 3; ++t)
    cl.steps[t - 1].w = Eigen::VectorXd::Zero(cl.input_dim(t) + 1);

  FullPanel full = make_panel(3, 4);
  const MaskTrajectory all = {mask_of({1, 1, 1}), mask_of({1, 1, 1}),
                              mask_of({1, 1, 1})};
  const ObservedPanel obs = apply_mask(full, all, map);

  // (1,1,1), prediction 1 == label 1: acquisition only: 0 + 1 + 1 = 2
  CHECK(step_cost(mask_of({1, 1, 1}), obs, all, 1, 1, cl, costs) == 2.0);
  // (1,0,0), prediction 1 != label 0: 0 + 12
  CHECK(step_cost(mask_of({1, 0, 0}), obs, all, 1, 0, cl, costs) == 12.0);
  // (0,0,0), correct: 0
  CHECK(step_cost(mask_of({0, 0, 0}), obs, all, 1, 1, cl, costs) == 0.0);
}

TEST_CASE("step_cost bounds") {
  const auto map = SuperfeatureMap::experiment_default();
  const CostSpec costs = CostSpec::experiment_default();
  ClassifierModel cl;
  cl.mu = {0.0, 0.0, 0.0, 0.0};
  cl.num_super = 3;
  cl.steps.resize(3);
  RngStream wrng(3, 1, RngTag::ToyData);
  for (int t = 1; t <= 3; ++t) {
    cl.steps[t - 1].w = Eigen::VectorXd(cl.input_dim(t) + 1);
    for (int i = 0; i <= cl.input_dim(t); ++i) cl.steps[t - 1].w[i] = wrng.normal();
  }
  const double cap = 0.0 + 1.0 + 1.0 + costs.c_mc;

  RngStream rng(13, 2, RngTag::ToyData);
  FullPanel full = make_panel(3, 4);
  for (int rep = 0; rep < 200; ++rep) {
    MaskTrajectory masks = random_masks(3, 3, rng);
    const ObservedPanel obs = apply_mask(full, masks, map);
    for (int t = 1; t <= 3; ++t) {
      const double c = step_cost(masks[t - 1], obs, masks, t,
                                 static_cast<int>(rng.uniform_int(2)), cl, costs);
      CHECK(c >= 0.0);
      CHECK(c <= cap);
    }
  }
}

TEST_CASE("record validation catches mask/observation inconsistencies") {
  const auto map = SuperfeatureMap::experiment_default();
  Record r;
  r.id = 0;
  FullPanel truth = make_panel(3, 4);
  r.truth = truth;
  r.masks = {mask_of({1, 0, 0}), mask_of({1, 1, 1}), mask_of({1, 0, 1})};
  r.labels = {0, 1, 0};
  r.observed = apply_mask(truth, r.masks, map);
  CHECK_NOTHROW(r.validate(map));

  Record broken = r;
  broken.observed.clear(2, 1);  // acquired but missing
  CHECK_THROWS_AS(broken.validate(map), InvalidInput);

  Record lying = r;
  (*lying.truth)(2, 1) += 1.0;  // truth disagrees with an observed cell
  CHECK_THROWS_AS(lying.validate(map), InvalidInput);
}

TEST_CASE("superfeature map invariants") {
  auto map = SuperfeatureMap::experiment_default();
  CHECK(map.num_super() == 3);
  CHECK(map.num_sub() == 4);
  CHECK(map.is_free(0));
  CHECK(map.super_of(3) == 2);
  CHECK_NOTHROW(map.validate());

  SuperfeatureMap twice;
  twice.groups = {{0}, {0, 1}};
  twice.free_set = {false, false};
  CHECK_THROWS_AS(twice.validate(), InvalidInput);
}

TEST_CASE("cost spec validation") {
  const auto map = SuperfeatureMap::experiment_default();
  CostSpec ok = CostSpec::experiment_default();
  CHECK_NOTHROW(ok.validate(map));
  CostSpec free_cost = ok;
  free_cost.c_acq[0] = 2.0;  // superfeature 0 is free
  CHECK_THROWS_AS(free_cost.validate(map), InvalidInput);
}

TEST_CASE("dataset split fractions default to 30/30/40") {
  Dataset d;
  d.map = SuperfeatureMap::experiment_default();
  d.steps = 3;
  d.records.resize(1000);
  auto [tb, te] = d.split_range(Split::Train);
  auto [nb, ne] = d.split_range(Split::Nuisance);
  auto [sb, se] = d.split_range(Split::Test);
  CHECK(te - tb == 300);
  CHECK(ne - nb == 300);
  CHECK(se - sb == 400);
  CHECK(tb == 0);
  CHECK(nb == te);
  CHECK(sb == ne);
}
