#include "afape/dgp.hpp"

#include <cmath>

#include "afape/logistic.hpp"
#include "afape/parallel.hpp"
#include "afape/simulate.hpp"

namespace afape {

double BitMechanism::prob(const FullPanel& truth,
                          const ObservedPanel& observed_so_far, int t) const {
  switch (kind) {
    case Kind::StructuralOne:
      return 1.0;
    case Kind::Constant:
      return p;
    case Kind::Logistic: {
      double s = intercept;
      for (size_t j = 0; j < coefs.size(); ++j) {
        if (coefs[j] == 0.0) continue;
        const double x = on_counterfactual
                             ? truth(t - 1, static_cast<int>(j))
                             : observed_so_far.value_or(t - 1, static_cast<int>(j), 0.0);
        s += coefs[j] * x;
      }
      return sigmoid(s);
    }
  }
  return 0.0;
}

void DGPConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in [0,1)");
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (static_cast<int>(w.size()) != map.num_sub())
    throw ConfigError("label weight vector length != number of subfeatures");
  if (T <= 0) throw ConfigError("T must be positive");
  if (static_cast<int>(mech.size()) != map.num_super())
    throw ConfigError("one acquisition mechanism per superfeature required");
  map.validate();
  costs.validate(map);
}

DGPConfig DGPConfig::for_experiment(Experiment e, int n, std::uint64_t seed) {
  DGPConfig cfg;
  cfg.experiment = e;
  cfg.n = n;
  cfg.seed = seed;
  BitMechanism structural;  // kind StructuralOne

  auto logistic = [](double b0, std::vector<double> c, bool cf = false) {
    BitMechanism m;
    m.kind = BitMechanism::Kind::Logistic;
    m.intercept = b0;
    m.coefs = std::move(c);
    m.on_counterfactual = cf;
    return m;
  };
  auto constant = [](double p) {
    BitMechanism m;
    m.kind = BitMechanism::Kind::Constant;
    m.p = p;
    return m;
  };

  switch (e) {
    case Experiment::E1: {
      const auto score = logistic(0.8, {-3.0, 0.02, -0.02, 0.0});
      cfg.mech = {structural, score, score};
      cfg.propensity_covariates = {0, 1, 2};
      break;
    }
    case Experiment::E2: {
      cfg.mech = {structural, constant(0.2), constant(0.2)};
      cfg.propensity_covariates = {};
      break;
    }
    case Experiment::E3: {
      cfg.mech = {structural, structural,
                  logistic(-0.5, {-2.0, -0.1, -0.1, 0.0})};
      cfg.propensity_covariates = {0, 1, 2};
      break;
    }
    case Experiment::E4: {
      cfg.mech = {structural, structural,
                  logistic(-0.6, {0.0, 0.0, -1.5, -1.5}, /*cf=*/true)};
      cfg.propensity_covariates = {2, 3};
      cfg.mnar = true;
      break;
    }
    case Experiment::E5: {
      const auto score = logistic(0.8, {-0.2, -0.1, 0.5, 0.0});
      cfg.mech = {structural, score, score};
      cfg.propensity_covariates = {0, 1, 2};
      cfg.nde_violation = true;
      break;
    }
    case Experiment::Custom:
      throw ConfigError("Custom experiment requires explicit mechanisms");
  }
  return cfg;
}

FullPanel generate_features(const DGPConfig& cfg, RngStream& rng) {
  if (cfg.nde_violation)
    throw InvalidInput(
        "generate_features: direct-effect recursion depends on acquisitions; "
        "use generate_record");
  const int d = cfg.map.num_sub();
  FullPanel p(cfg.T, d);
  for (int j = 0; j < d; ++j) p(0, j) = rng.normal(0.0, cfg.sigma);
  for (int t = 1; t <= cfg.T; ++t)
    for (int j = 0; j < d; ++j)
      p(t, j) = ar1_next(p(t - 1, j), cfg.gamma, rng.normal(0.0, cfg.sigma));
  return p;
}

double label_prob(const FullPanel& panel, int t, const DGPConfig& cfg) {
  double score = 0.0;
  for (int j = 0; j < panel.cols(); ++j)
    score += cfg.w[j] * (cfg.zeta1 * panel(t, j) + cfg.zeta2 * panel(t - 1, j));
  return score > 0.0 ? 1.0 : 0.3;
}

LabelSeq generate_labels(const FullPanel& panel, const DGPConfig& cfg,
                         RngStream& rng) {
  LabelSeq y(cfg.T, 0);
  for (int t = 1; t <= cfg.T; ++t) {
    const double u = rng.uniform();  // drawn unconditionally to keep streams aligned
    y[t - 1] = static_cast<std::uint8_t>(u < label_prob(panel, t, cfg));
  }
  return y;
}

std::pair<MaskTrajectory, ObservedPanel> retro_acquire(const FullPanel& truth,
                                                       const DGPConfig& cfg,
                                                       RngStream& rng) {
  const int K = cfg.map.num_super();
  const int d = cfg.map.num_sub();
  MaskTrajectory masks;
  masks.reserve(cfg.T);
  ObservedPanel obs(cfg.T, d);
  for (int j = 0; j < d; ++j) obs.set(0, j, truth(0, j));

  for (int t = 1; t <= cfg.T; ++t) {
    StepMask m = StepMask::zeros(K);
    for (int k = 0; k < K; ++k) {
      if (cfg.mech[k].kind == BitMechanism::Kind::StructuralOne) {
        m.set_bit(k, true);
        continue;
      }
      const double u = rng.uniform();
      m.set_bit(k, u < cfg.mech[k].prob(truth, obs, t));
    }
    for (int k = 0; k < K; ++k)
      if (m.bit(k))
        for (int j : cfg.map.groups[k]) obs.set(t, j, truth(t, j));
    masks.push_back(m);
  }
  return {std::move(masks), std::move(obs)};
}

// Direct-effect variant: the feature recursion at t > 1 is shifted by
// nde_shift times the number of superfeature bits acquired at t-1, so feature
// generation and acquisition must be interleaved.
static std::pair<FullPanel, std::pair<MaskTrajectory, ObservedPanel>>
generate_interleaved(const DGPConfig& cfg, RngStream& feat_rng,
                     RngStream& acq_rng) {
  const int d = cfg.map.num_sub();
  const int K = cfg.map.num_super();
  FullPanel u(cfg.T, d);
  ObservedPanel obs(cfg.T, d);
  MaskTrajectory masks;
  masks.reserve(cfg.T);

  for (int j = 0; j < d; ++j) {
    u(0, j) = feat_rng.normal(0.0, cfg.sigma);
    obs.set(0, j, u(0, j));
  }
  for (int t = 1; t <= cfg.T; ++t) {
    double shift = 0.0;
    if (t > 1) shift = cfg.nde_shift * masks[t - 2].count();
    for (int j = 0; j < d; ++j)
      u(t, j) = ar1_next(u(t - 1, j), cfg.gamma, feat_rng.normal(0.0, cfg.sigma)) +
                shift;
    StepMask m = StepMask::zeros(K);
    for (int k = 0; k < K; ++k) {
      if (cfg.mech[k].kind == BitMechanism::Kind::StructuralOne) {
        m.set_bit(k, true);
        continue;
      }
      const double draw = acq_rng.uniform();
      m.set_bit(k, draw < cfg.mech[k].prob(u, obs, t));
    }
    for (int k = 0; k < K; ++k)
      if (m.bit(k))
        for (int j : cfg.map.groups[k]) obs.set(t, j, u(t, j));
    masks.push_back(m);
  }
  return {std::move(u), {std::move(masks), std::move(obs)}};
}

Record generate_record(const DGPConfig& cfg, long long id) {
  RngStream feat_rng(cfg.seed, static_cast<std::uint64_t>(id), RngTag::Features);
  RngStream label_rng(cfg.seed, static_cast<std::uint64_t>(id), RngTag::Labels);
  RngStream acq_rng(cfg.seed, static_cast<std::uint64_t>(id), RngTag::Acquire);

  Record r;
  r.id = id;
  if (cfg.nde_violation) {
    auto [truth, rest] = generate_interleaved(cfg, feat_rng, acq_rng);
    r.truth = std::move(truth);
    r.masks = std::move(rest.first);
    r.observed = std::move(rest.second);
  } else {
    FullPanel truth = generate_features(cfg, feat_rng);
    auto [masks, obs] = retro_acquire(truth, cfg, acq_rng);
    r.truth = std::move(truth);
    r.masks = std::move(masks);
    r.observed = std::move(obs);
  }
  r.labels = generate_labels(*r.truth, cfg, label_rng);
  return r;
}

Dataset generate_dataset(const DGPConfig& cfg) {
  cfg.validate();
  Dataset data;
  data.map = cfg.map;
  data.steps = cfg.T;
  data.split = cfg.split;
  data.records.resize(cfg.n);
  parallel_for(cfg.n, [&](int i) { data.records[i] = generate_record(cfg, i); });
  return data;
}

double complete_case_fraction(const Dataset& data) {
  if (data.records.empty()) return 0.0;
  long long cc = 0;
  for (const auto& r : data.records)
    if (r.complete_case()) ++cc;
  return static_cast<double>(cc) / data.n();
}

// Online evaluation against a freshly sampled direct-effect environment: the
// agent's own acquisitions shift subsequent feature values.
static double eval_online_nde(const PolicySpec& policy,
                              const ClassifierModel& classifier,
                              const DGPConfig& cfg, int n_eval,
                              std::uint64_t seed, bool terminal) {
  const int d = cfg.map.num_sub();
  const int K = cfg.map.num_super();
  std::vector<double> totals(n_eval, 0.0);
  parallel_for(n_eval, [&](int i) {
    RngStream env(seed, static_cast<std::uint64_t>(i), RngTag::GroundTruth, 0);
    RngStream act(seed, static_cast<std::uint64_t>(i), RngTag::GroundTruth, 1);
    RngStream lab(seed, static_cast<std::uint64_t>(i), RngTag::GroundTruth, 2);

    FullPanel u(cfg.T, d);
    ObservedPanel revealed(cfg.T, d);
    MaskTrajectory traj;
    for (int j = 0; j < d; ++j) {
      u(0, j) = env.normal(0.0, cfg.sigma);
      revealed.set(0, j, u(0, j));
    }
    double total = 0.0;
    for (int t = 1; t <= cfg.T; ++t) {
      double shift = 0.0;
      if (t > 1) shift = cfg.nde_shift * traj[t - 2].count();
      for (int j = 0; j < d; ++j)
        u(t, j) = ar1_next(u(t - 1, j), cfg.gamma, env.normal(0.0, cfg.sigma)) +
                  shift;
      const MaskDistribution dist =
          policy_prob(policy, cfg.map, t, revealed, traj);
      const StepMask a = dist.sample(act);
      traj.push_back(a);
      for (int k = 0; k < K; ++k)
        if (a.bit(k))
          for (int j : cfg.map.groups[k]) revealed.set(t, j, u(t, j));
      // Label from the realized environment.
      const double py = [&] {
        double score = 0.0;
        for (int j = 0; j < d; ++j)
          score += cfg.w[j] * (cfg.zeta1 * u(t, j) + cfg.zeta2 * u(t - 1, j));
        return score > 0.0 ? 1.0 : 0.3;
      }();
      const int y = lab.uniform() < py ? 1 : 0;
      const double c = step_cost(a, revealed, traj, t, y, classifier, cfg.costs);
      if (!terminal)
        total += c;
      else {
        total += acquisition_cost(a, cfg.costs);
        if (t == cfg.T) total += c - acquisition_cost(a, cfg.costs);
      }
    }
    totals[i] = total;
  });
  double s = 0.0;
  for (double v : totals) s += v;
  return s / n_eval;
}

double ground_truth_eval(const Dataset& data, const PolicySpec& policy,
                         const ClassifierModel& classifier,
                         const DGPConfig& cfg, int n_eval, int n_mc,
                         std::uint64_t seed, bool terminal) {
  if (n_eval <= 0) throw InvalidInput("ground_truth_eval: n_eval must be positive");
  if (cfg.nde_violation)
    return eval_online_nde(policy, classifier, cfg, n_eval, seed, terminal);

  const auto test = data.split_indices(Split::Test);
  if (test.empty()) throw InvalidInput("ground_truth_eval: empty test split");
  const int n = std::min<int>(n_eval, static_cast<int>(test.size()));
  std::vector<double> vals(n, 0.0);
  parallel_for(n, [&](int i) {
    const Record& r = data.records[test[i]];
    if (!r.truth)
      throw InvalidInput("ground_truth_eval: record lacks a counterfactual panel");
    RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::GroundTruth);
    vals[i] = rollout_full(*r.truth, r.labels, data.map, policy, classifier,
                           cfg.costs, n_mc, rng, terminal);
  });
  double s = 0.0;
  for (double v : vals) s += v;
  return s / n;
}

}  // namespace afape
