#include "afape/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "afape/parallel.hpp"

namespace afape {

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

namespace {

// Second weight fraction pi_id / pi_beta at step t, evaluated at the observed
// retrospective mask. rho_prev gates positivity errors: a path that already
// carries zero weight cannot violate positivity.
double fraction_id(const Record& r, int t, const StepMask& a_prime,
                   const PropensityModel& prop, PiIdVariant variant,
                   double rho_prev) {
  const StepMask& a = r.masks[t - 1];
  switch (variant) {
    case PiIdVariant::TruncatedBeta: {
      if (!mask_leq(a_prime, a)) return 0.0;  // indicator I(A >= a')
      const double denom = propensity_geq(prop, t, r.observed, a_prime);
      if (denom <= 0.0) {
        if (rho_prev == 0.0) return 0.0;
        throw PositivityError("truncated propensity has zero mass on {A >= a'}",
                              r.id, t);
      }
      return 1.0 / denom;
    }
    case PiIdVariant::OfflineDelta: {
      if (a != a_prime) return 0.0;
      const double denom = prop.mask_prob(t, a, r.observed);
      if (denom <= 0.0) {
        if (rho_prev == 0.0) return 0.0;
        throw PositivityError("propensity zero at an observed action", r.id, t);
      }
      return 1.0 / denom;
    }
    case PiIdVariant::MissingDelta: {
      if (!a.all()) return 0.0;
      const double denom =
          prop.mask_prob(t, StepMask::ones(a.size()), r.observed);
      if (denom <= 0.0) {
        if (rho_prev == 0.0) return 0.0;
        throw PositivityError("propensity of the all-ones action is zero", r.id,
                              t);
      }
      return 1.0 / denom;
    }
  }
  return 0.0;
}

}  // namespace

WeightTrajectory weights_semi(const Dataset& data, const SimRecord& sim,
                              const PropensityModel& prop,
                              PiIdVariant variant) {
  const Record& r = data.records[sim.parent_index];
  const int T = static_cast<int>(sim.a_prime.size());
  WeightTrajectory w;
  w.rho.assign(T + 1, 1.0);
  for (int t = 1; t <= T; ++t) {
    const double rho_prev = w.rho[t - 1];
    if (sim.pi_sim[t - 1] <= 0.0)
      throw InvalidInput("weights_semi: sampled action has zero sim probability");
    const double f1 = sim.pi_alpha[t - 1] / sim.pi_sim[t - 1];
    const double f2 =
        fraction_id(r, t, sim.a_prime[t - 1], prop, variant, rho_prev);
    w.rho[t] = rho_prev * (f1 * f2);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Table construction helpers
// ---------------------------------------------------------------------------

namespace {

StatTable make_table(std::vector<int> records, int T, bool ipw, bool drl,
                     int inner) {
  StatTable t;
  const int n = static_cast<int>(records.size());
  t.records = std::move(records);
  t.inner_count = inner;
  t.steps = T;
  t.ipw_form = ipw;
  t.drl_form = drl;
  if (ipw) {
    t.rho_sum = Eigen::MatrixXd::Zero(n, T + 1);
    t.rho_cost = Eigen::MatrixXd::Zero(n, T);
    if (drl) {
      t.rho_q = Eigen::MatrixXd::Zero(n, T);
      t.rho_v = Eigen::MatrixXd::Zero(n, T);
    }
  } else {
    t.value = Eigen::VectorXd::Zero(n);
    t.valid = Eigen::VectorXd::Zero(n);
  }
  return t;
}

// Groups a SimDataset's contiguous per-record blocks.
struct SimGroups {
  std::vector<int> records;               // parent record index per row
  std::vector<std::pair<int, int>> span;  // [first_sim, count) per row
};

SimGroups group_sims(const SimDataset& sim) {
  SimGroups g;
  for (int i = 0; i < static_cast<int>(sim.sims.size()); ++i) {
    const int parent = sim.sims[i].parent_index;
    if (g.records.empty() || g.records.back() != parent) {
      g.records.push_back(parent);
      g.span.emplace_back(i, 0);
    } else if (g.span.back().first + g.span.back().second != i) {
      throw InvalidInput("SimDataset: replicates of one record must be contiguous");
    }
    g.span.back().second++;
  }
  return g;
}

}  // namespace

StatTable prepare_semi(const Dataset& data, const SimDataset& sim,
                       const PropensityModel& prop, PiIdVariant variant,
                       const QSemiModel* q) {
  SimGroups groups = group_sims(sim);
  const int T = sim.steps;
  StatTable table =
      make_table(groups.records, T, /*ipw=*/true, /*drl=*/q != nullptr, sim.n_mc);

  parallel_for(static_cast<int>(groups.records.size()), [&](int row) {
    auto [first, count] = groups.span[row];
    for (int i = first; i < first + count; ++i) {
      const SimRecord& s = sim.sims[i];
      const Record& r = data.records[s.parent_index];
      const WeightTrajectory w = weights_semi(data, s, prop, variant);
      table.rho_sum(row, 0) += 1.0;
      for (int t = 1; t <= T; ++t) {
        table.rho_sum(row, t) += w.rho[t];
        table.rho_cost(row, t - 1) += w.rho[t] * s.cost[t - 1];
      }
      if (q) {
        for (int t = 1; t <= T; ++t) {
          MaskTrajectory prefix(s.a_prime.begin(), s.a_prime.begin() + t);
          const double qv = q_value(*q, t, prefix, r.observed, r.masks);
          prefix.pop_back();
          const double vv =
              v_value(*q, data.map, t - 1, prefix, r.observed, r.masks);
          table.rho_q(row, t - 1) += w.rho[t] * qv;
          table.rho_v(row, t - 1) += w.rho[t - 1] * vv;
        }
      }
    }
  });
  return table;
}

StatTable prepare_semi_exact(const Dataset& data, const std::vector<int>& records,
                             const PropensityModel& prop,
                             const PolicySpec& target, const PolicySpec& sim_base,
                             PiIdVariant variant, const ClassifierModel& classifier,
                             const CostSpec& costs) {
  const int T = data.steps;
  StatTable table = make_table(records, T, /*ipw=*/true, /*drl=*/false, 1);

  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    const int d = data.map.num_sub();
    const int K = data.map.num_super();

    ObservedPanel hist(T, d);
    for (int j = 0; j < d; ++j) hist.set(0, j, *r.observed.cell(0, j));
    MaskTrajectory prefix;
    table.rho_sum(row, 0) = 1.0;

    // Depth-first enumeration of every trajectory with positive blocked
    // simulation probability; contributions are probability-weighted.
    std::function<void(int, double, double)> walk = [&](int t, double path_prob,
                                                        double rho_prev) {
      if (t > T) return;
      const MaskDistribution target_dist =
          policy_prob(target, data.map, t, hist, prefix);
      const MaskDistribution sim_dist =
          block(policy_prob(sim_base, data.map, t, hist, prefix),
                r.masks[t - 1]);
      for (std::uint32_t mb = 0; mb < (1u << K); ++mb) {
        const double ps = sim_dist.p[mb];
        if (ps <= 0.0) continue;
        const StepMask m(mb, K);
        const double f1 = target_dist.p[mb] / ps;
        const double f2 =
            fraction_id(r, t, m, prop, variant, rho_prev * target_dist.p[mb]);
        const double rho = rho_prev * (f1 * f2);
        // Reveal cells under m.
        for (int k = 0; k < K; ++k)
          if (m.bit(k))
            for (int j : data.map.groups[k]) hist.set(t, j, *r.observed.cell(t, j));
        prefix.push_back(m);
        const double c =
            step_cost(m, hist, prefix, t, r.labels[t - 1], classifier, costs);
        const double branch = path_prob * ps;
        table.rho_sum(row, t) += branch * rho;
        table.rho_cost(row, t - 1) += branch * rho * c;
        walk(t + 1, branch, rho);
        prefix.pop_back();
        for (int k = 0; k < K; ++k)
          if (m.bit(k))
            for (int j : data.map.groups[k]) hist.clear(t, j);
      }
    };
    walk(1, 1.0, 1.0);
  });
  return table;
}

StatTable prepare_off(const Dataset& data, const std::vector<int>& records,
                      const PropensityModel& prop, const PolicySpec& target,
                      const ClassifierModel& classifier, const CostSpec& costs,
                      bool terminal) {
  const int T = data.steps;
  StatTable table = make_table(records, T, /*ipw=*/true, /*drl=*/false, 1);

  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    table.rho_sum(row, 0) = 1.0;
    double rho = 1.0;
    std::vector<double> cost_t(T, 0.0);
    MaskTrajectory prefix;
    for (int t = 1; t <= T; ++t) {
      const MaskDistribution target_dist =
          policy_prob(target, data.map, t, r.observed, prefix);
      const StepMask& a = r.masks[t - 1];
      const double num = target_dist.prob(a);
      if (num > 0.0) {
        const double denom = prop.mask_prob(t, a, r.observed);
        if (denom <= 0.0) {
          if (rho != 0.0)
            throw PositivityError("propensity zero at an observed action", r.id,
                                  t);
        } else {
          rho *= num / denom;
        }
      } else {
        rho = 0.0;
      }
      prefix.push_back(a);
      cost_t[t - 1] =
          step_cost(a, r.observed, r.masks, t, r.labels[t - 1], classifier, costs);
      table.rho_sum(row, t) = rho;
    }
    if (terminal) cost_t = terminal_costs(r.masks, cost_t, costs);
    for (int t = 1; t <= T; ++t)
      table.rho_cost(row, t - 1) = table.rho_sum(row, t) * cost_t[t - 1];
  });
  return table;
}

StatTable prepare_miss(const Dataset& data, const std::vector<int>& records,
                       const PropensityModel& prop, const PolicySpec& target,
                       const ClassifierModel& classifier, const CostSpec& costs,
                       int n_mc, std::uint64_t seed, bool terminal) {
  const int T = data.steps;
  const StepMask ones = StepMask::ones(data.map.num_super());
  StatTable table = make_table(records, T, /*ipw=*/true, /*drl=*/false, n_mc);

  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    // Per-step weights: product over tau <= t of I(A^tau = 1)/pi_beta(1|.).
    std::vector<double> w(T + 1, 1.0);
    for (int t = 1; t <= T; ++t) {
      if (w[t - 1] == 0.0 || !r.masks[t - 1].all()) {
        w[t] = 0.0;
        continue;
      }
      const double denom = prop.mask_prob(t, ones, r.observed);
      if (denom <= 0.0)
        throw PositivityError("propensity of the all-ones action is zero", r.id,
                              t);
      w[t] = w[t - 1] * (1.0 / denom);
    }
    table.rho_sum(row, 0) = n_mc;
    for (int t = 1; t <= T; ++t) table.rho_sum(row, t) = n_mc * w[t];
    for (int m = 0; m < n_mc; ++m) {
      RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Simulate,
                    static_cast<std::uint64_t>(m));
      const TrajectoryResult tr = simulate_blocked_trajectory(
          data.map, r.observed, r.masks, r.labels, target, target, classifier,
          costs, rng);
      const std::vector<double> cost =
          terminal ? terminal_costs(tr.a_prime, tr.cost, costs) : tr.cost;
      for (int t = 1; t <= T; ++t)
        table.rho_cost(row, t - 1) += w[t] * cost[t - 1];
    }
  });
  return table;
}

StatTable prepare_blocking(const Dataset& data, const SimDataset& sim) {
  if (!sim.sim_is_target)
    throw InvalidInput(
        "blocking baseline requires the simulation policy to be the blocked "
        "target policy");
  (void)data;
  SimGroups groups = group_sims(sim);
  StatTable table =
      make_table(groups.records, sim.steps, /*ipw=*/false, false, sim.n_mc);
  for (size_t row = 0; row < groups.records.size(); ++row) {
    auto [first, count] = groups.span[row];
    double total = 0.0;
    for (int i = first; i < first + count; ++i)
      total += sim.total_cost(sim.sims[i]);
    table.value(row) = total / count;
    table.valid(row) = 1.0;
  }
  return table;
}

namespace {

FullPanel panel_from_observed(const ObservedPanel& obs,
                              const std::vector<double>& fill) {
  FullPanel p(obs.steps(), obs.cols());
  for (int t = 0; t <= obs.steps(); ++t)
    for (int j = 0; j < obs.cols(); ++j)
      p(t, j) = obs.value_or(t, j, fill.empty() ? 0.0 : fill[j]);
  return p;
}

}  // namespace

StatTable prepare_cc(const Dataset& data, const std::vector<int>& records,
                     const PolicySpec& target, const ClassifierModel& classifier,
                     const CostSpec& costs, int n_mc, std::uint64_t seed,
                     bool terminal) {
  StatTable table = make_table(records, data.steps, /*ipw=*/false, false, 1);
  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    if (!r.complete_case()) return;
    const FullPanel full = panel_from_observed(r.observed, {});
    RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Rollout);
    table.value(row) = rollout_full(full, r.labels, data.map, target, classifier,
                                    costs, n_mc, rng, terminal);
    table.valid(row) = 1.0;
  });
  return table;
}

StatTable prepare_imp_mean(const Dataset& data, const std::vector<int>& records,
                           const std::vector<double>& mu,
                           const PolicySpec& target,
                           const ClassifierModel& classifier,
                           const CostSpec& costs, int n_mc, std::uint64_t seed,
                           bool terminal) {
  if (static_cast<int>(mu.size()) != data.map.num_sub())
    throw InvalidInput("prepare_imp_mean: mean vector length mismatch");
  StatTable table = make_table(records, data.steps, /*ipw=*/false, false, 1);
  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    const FullPanel filled = panel_from_observed(r.observed, mu);
    RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Rollout);
    table.value(row) = rollout_full(filled, r.labels, data.map, target,
                                    classifier, costs, n_mc, rng, terminal);
    table.valid(row) = 1.0;
  });
  return table;
}

// ---------------------------------------------------------------------------
// Multiple imputation with the exact AR(1) Gaussian conditional
// ---------------------------------------------------------------------------

namespace {

// Joint covariance of one subfeature's values at rows 0..T under the AR(1)
// recursion x^t = g x^{t-1} + (1-g) e, e ~ N(0, sigma).
Eigen::MatrixXd ar1_covariance(int T, double gamma, double sigma) {
  Eigen::VectorXd var(T + 1);
  var[0] = sigma * sigma;
  for (int t = 1; t <= T; ++t)
    var[t] = gamma * gamma * var[t - 1] +
             (1.0 - gamma) * (1.0 - gamma) * sigma * sigma;
  Eigen::MatrixXd cov(T + 1, T + 1);
  for (int s = 0; s <= T; ++s)
    for (int u = 0; u <= T; ++u)
      cov(s, u) = std::pow(gamma, std::abs(u - s)) * var[std::min(s, u)];
  return cov;
}

struct ColumnConditional {
  std::vector<int> missing_rows;
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower Cholesky factor of the conditional covariance
};

ColumnConditional column_conditional(const Eigen::MatrixXd& cov,
                                     const ObservedPanel& obs, int col) {
  ColumnConditional out;
  std::vector<int> obs_rows;
  for (int t = 0; t < cov.rows(); ++t) {
    if (obs.observed(t, col))
      obs_rows.push_back(t);
    else
      out.missing_rows.push_back(t);
  }
  const int no = static_cast<int>(obs_rows.size());
  const int nm = static_cast<int>(out.missing_rows.size());
  if (nm == 0) return out;

  Eigen::MatrixXd Soo(no, no), Smo(nm, no), Smm(nm, nm);
  Eigen::VectorXd xo(no);
  for (int i = 0; i < no; ++i) {
    xo[i] = *obs.cell(obs_rows[i], col);
    for (int j = 0; j < no; ++j) Soo(i, j) = cov(obs_rows[i], obs_rows[j]);
  }
  for (int i = 0; i < nm; ++i) {
    for (int j = 0; j < no; ++j) Smo(i, j) = cov(out.missing_rows[i], obs_rows[j]);
    for (int j = 0; j < nm; ++j)
      Smm(i, j) = cov(out.missing_rows[i], out.missing_rows[j]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(Soo);
  const Eigen::MatrixXd SooInvSom = llt.solve(Smo.transpose());  // no x nm
  out.mean = Smo * llt.solve(xo);
  Eigen::MatrixXd cond = Smm - Smo * SooInvSom;
  cond.diagonal().array() += 1e-12;
  out.chol = Eigen::LLT<Eigen::MatrixXd>(cond).matrixL();
  return out;
}

double label_likelihood(const FullPanel& panel, const LabelSeq& y,
                        const DGPConfig& cfg) {
  double lik = 1.0;
  for (int t = 1; t <= cfg.T; ++t) {
    const double p1 = label_prob(panel, t, cfg);
    lik *= y[t - 1] ? p1 : (1.0 - p1);
  }
  return lik;
}

}  // namespace

StatTable prepare_mi_miss(const Dataset& data, const std::vector<int>& records,
                          const DGPConfig& cfg, const PolicySpec& target,
                          const ClassifierModel& classifier,
                          const CostSpec& costs, int m_imp, int n_mc,
                          std::uint64_t seed, bool condition_on_label,
                          bool terminal) {
  if (cfg.nde_violation)
    throw InvalidInput(
        "oracle imputer unsupported: feature process is not the stationary "
        "linear-Gaussian chain");
  if (cfg.mnar)
    throw InvalidInput("oracle imputer requires an ignorable missingness "
                       "mechanism");
  if (m_imp <= 0) throw InvalidInput("prepare_mi_miss: m_imp must be positive");

  const Eigen::MatrixXd cov = ar1_covariance(cfg.T, cfg.gamma, cfg.sigma);
  StatTable table = make_table(records, data.steps, /*ipw=*/false, false, 1);

  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    const int d = data.map.num_sub();
    std::vector<ColumnConditional> cond(d);
    for (int j = 0; j < d; ++j) cond[j] = column_conditional(cov, r.observed, j);

    RngStream imp_rng(seed, static_cast<std::uint64_t>(r.id), RngTag::Imputation);

    auto draw_completion = [&]() {
      FullPanel p = panel_from_observed(r.observed, {});
      for (int j = 0; j < d; ++j) {
        const auto& c = cond[j];
        const int nm = static_cast<int>(c.missing_rows.size());
        if (nm == 0) continue;
        Eigen::VectorXd z(nm);
        for (int i = 0; i < nm; ++i) z[i] = imp_rng.normal();
        const Eigen::VectorXd x = c.mean + c.chol * z;
        for (int i = 0; i < nm; ++i) p(c.missing_rows[i], j) = x[i];
      }
      return p;
    };

    std::vector<FullPanel> completions;
    completions.reserve(m_imp);
    if (!condition_on_label) {
      for (int m = 0; m < m_imp; ++m) completions.push_back(draw_completion());
    } else {
      // Sampling-importance-resampling against the label likelihood.
      const int batch = std::max(32, 4 * m_imp);
      for (int attempt = 0; attempt < 8 && completions.empty(); ++attempt) {
        std::vector<FullPanel> cand;
        std::vector<double> wgt;
        double total = 0.0;
        for (int i = 0; i < batch; ++i) {
          cand.push_back(draw_completion());
          wgt.push_back(label_likelihood(cand.back(), r.labels, cfg));
          total += wgt.back();
        }
        if (total <= 0.0) continue;
        for (int m = 0; m < m_imp; ++m) {
          double u = imp_rng.uniform() * total;
          size_t pick = 0;
          for (; pick + 1 < wgt.size() && u >= wgt[pick]; ++pick) u -= wgt[pick];
          completions.push_back(cand[pick]);
        }
      }
      if (completions.empty())
        for (int m = 0; m < m_imp; ++m) completions.push_back(draw_completion());
    }

    double total = 0.0;
    for (int m = 0; m < static_cast<int>(completions.size()); ++m) {
      RngStream roll(seed, static_cast<std::uint64_t>(r.id), RngTag::Rollout,
                     static_cast<std::uint64_t>(m));
      total += rollout_full(completions[m], r.labels, data.map, target,
                            classifier, costs, n_mc, roll, terminal);
    }
    table.value(row) = total / completions.size();
    table.valid(row) = 1.0;
  });
  return table;
}

StatTable prepare_dm_semi(const Dataset& data, const std::vector<int>& records,
                          const QSemiModel& q) {
  if (!q.fitted()) throw InvalidInput("prepare_dm_semi: Q model not fitted");
  StatTable table = make_table(records, data.steps, /*ipw=*/false, false, 1);
  parallel_for(static_cast<int>(records.size()), [&](int row) {
    const Record& r = data.records[records[row]];
    table.value(row) =
        v_value(q, data.map, 0, MaskTrajectory{}, r.observed, r.masks);
    table.valid(row) = 1.0;
  });
  return table;
}

// ---------------------------------------------------------------------------
// Evaluation and bootstrap
// ---------------------------------------------------------------------------

double eval_table(const StatTable& table, const std::vector<int>& rows,
                  bool normalize) {
  const int n_all = static_cast<int>(table.records.size());
  std::vector<int> all;
  const std::vector<int>* use = &rows;
  if (rows.empty()) {
    all.resize(n_all);
    for (int i = 0; i < n_all; ++i) all[i] = i;
    use = &all;
  }
  const auto& idx = *use;
  if (idx.empty()) throw InvalidInput("eval_table: empty row set");

  if (!table.ipw_form) {
    double sum = 0.0, cnt = 0.0;
    for (int i : idx) {
      sum += table.valid(i) * table.value(i);
      cnt += table.valid(i);
    }
    if (cnt == 0.0)
      throw PositivityError("no contributing records in the evaluation set", -1,
                            0);
    return sum / cnt;
  }

  const int T = table.steps;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(T);
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(T + 1);
  Eigen::VectorXd qsum = Eigen::VectorXd::Zero(T);
  Eigen::VectorXd vsum = Eigen::VectorXd::Zero(T);
  for (int i : idx) {
    for (int t = 0; t <= T; ++t) wsum[t] += table.rho_sum(i, t);
    for (int t = 0; t < T; ++t) cost[t] += table.rho_cost(i, t);
    if (table.drl_form)
      for (int t = 0; t < T; ++t) {
        qsum[t] += table.rho_q(i, t);
        vsum[t] += table.rho_v(i, t);
      }
  }

  if (!normalize) {
    const double n_inner = static_cast<double>(idx.size()) * table.inner_count;
    double j = 0.0;
    for (int t = 0; t < T; ++t) {
      j += cost[t];
      if (table.drl_form) j += vsum[t] - qsum[t];
    }
    return j / n_inner;
  }

  double j = 0.0;
  for (int t = 1; t <= T; ++t) {
    if (wsum[t] <= 0.0)
      throw InvalidInput("normalized estimator undefined: zero total weight at t=" +
                         std::to_string(t));
    j += (cost[t - 1] - (table.drl_form ? qsum[t - 1] : 0.0)) / wsum[t];
    if (table.drl_form) j += vsum[t - 1] / wsum[t - 1];
  }
  return j;
}

std::pair<double, double> bootstrap_ci(
    const std::function<double(const std::vector<int>&)>& statistic, int n_rows,
    int B, double level, std::uint64_t seed) {
  if (B < 2) throw InvalidInput("bootstrap_ci: B must be at least 2");
  if (level <= 0.0 || level >= 1.0)
    throw InvalidInput("bootstrap_ci: level must be in (0,1)");
  std::vector<double> stats;
  stats.reserve(B);
  for (int b = 0; b < B; ++b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b), RngTag::Bootstrap);
    std::vector<int> rows(n_rows);
    for (int i = 0; i < n_rows; ++i)
      rows[i] = static_cast<int>(rng.uniform_int(n_rows));
    try {
      stats.push_back(statistic(rows));
    } catch (const PositivityError&) {
      // A resample may lose all complete cases or all weight; drop it.
    } catch (const InvalidInput&) {
    }
  }
  if (stats.size() < static_cast<size_t>(B) / 2 || stats.size() < 2)
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double pos = q * (stats.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - lo;
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

EstimateReport report_from_table(const std::string& name, const StatTable& table,
                                 bool normalize, int B, double level,
                                 std::uint64_t seed) {
  EstimateReport rep;
  rep.estimator = name;
  rep.normalized = normalize;
  rep.seed = seed;
  rep.n = static_cast<int>(table.records.size());
  rep.estimate = eval_table(table, {}, normalize);
  if (B > 0) {
    auto stat = [&](const std::vector<int>& rows) {
      return eval_table(table, rows, normalize);
    };
    std::tie(rep.ci_lo, rep.ci_hi) = bootstrap_ci(stat, rep.n, B, level, seed);
  }
  return rep;
}

std::pair<double, double> weight_mean_se(const StatTable& table) {
  if (!table.ipw_form) throw InvalidInput("weight_mean_se: not a weighted table");
  const int n = static_cast<int>(table.records.size());
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = table.rho_sum(i, table.steps) / table.inner_count;
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() /
                              std::max(1, n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

std::pair<double, double> augmentation_mean_se(const StatTable& table) {
  if (!table.drl_form)
    throw InvalidInput("augmentation_mean_se: not a DRL table");
  const int n = static_cast<int>(table.records.size());
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int t = 0; t < table.steps; ++t)
      s += table.rho_v(i, t) - table.rho_q(i, t);
    v[i] = s / table.inner_count;
  }
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() /
                              std::max(1, n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

}  // namespace afape
