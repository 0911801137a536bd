#include "afape/nuisance.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "afape/logistic.hpp"
#include "afape/parallel.hpp"

namespace afape {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Propensity
// ---------------------------------------------------------------------------

static Eigen::VectorXd covariate_row(const std::vector<int>& cols, int t,
                                     const ObservedPanel& hist) {
  Eigen::VectorXd x(cols.size());
  for (size_t i = 0; i < cols.size(); ++i)
    x[i] = hist.value_or(t - 1, cols[i], 0.0);
  return x;
}

double PropensityModel::bit_prob(int t, int k, const ObservedPanel& hist) const {
  const BitModel& b = bits[t - 1][k];
  if (b.structural_one) return 1.0;
  if (b.structural_zero) return 0.0;
  const Eigen::VectorXd x = covariate_row(covariate_cols, t, hist);
  double z = b.w[b.w.size() - 1];
  z += b.w.head(b.w.size() - 1).dot(x);
  return sigmoid(z);
}

std::vector<double> PropensityModel::bit_probs(int t,
                                               const ObservedPanel& hist) const {
  std::vector<double> p(K);
  for (int k = 0; k < K; ++k) p[k] = bit_prob(t, k, hist);
  return p;
}

double PropensityModel::mask_prob(int t, const StepMask& a,
                                  const ObservedPanel& hist) const {
  double prod = 1.0;
  for (int k = 0; k < K; ++k) {
    const double p = bit_prob(t, k, hist);
    prod *= a.bit(k) ? p : 1.0 - p;
  }
  return prod;
}

PropensityModel fit_propensity(const Dataset& data,
                               const std::vector<int>& indices,
                               const PropensityFitConfig& cfg) {
  if (indices.empty()) throw InvalidInput("fit_propensity: empty split");
  PropensityModel m;
  m.T = data.steps;
  m.K = data.map.num_super();
  m.covariate_cols = cfg.covariate_cols;
  m.bits.assign(m.T, std::vector<PropensityModel::BitModel>(m.K));

  for (int t = 1; t <= m.T; ++t) {
    // Row pool for step t (shared across superfeatures).
    std::vector<int> rows;
    rows.reserve(indices.size());
    for (int idx : indices) {
      const Record& r = data.records[idx];
      if (cfg.complete_history_only && !r.complete_through(t - 1)) continue;
      rows.push_back(idx);
    }
    if (rows.empty())
      throw FitError("fit_propensity: no usable rows at t=" + std::to_string(t));

    Eigen::MatrixXd X(rows.size(), cfg.covariate_cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      X.row(i) =
          covariate_row(cfg.covariate_cols, t, data.records[rows[i]].observed)
              .transpose();

    for (int k = 0; k < m.K; ++k) {
      Eigen::VectorXd y(rows.size());
      for (size_t i = 0; i < rows.size(); ++i)
        y[i] = data.records[rows[i]].masks[t - 1].bit(k) ? 1.0 : 0.0;
      auto& bit = m.bits[t - 1][k];
      const double mean = y.mean();
      if (mean >= 1.0) {
        bit.structural_one = true;
        m.warnings.push_back("A" + std::to_string(k) + "^t=" + std::to_string(t) +
                             " identically 1; flagged structural");
        continue;
      }
      if (mean <= 0.0) {
        bit.structural_zero = true;
        m.warnings.push_back("A" + std::to_string(k) + "^t=" + std::to_string(t) +
                             " identically 0; flagged structural");
        continue;
      }
      bit.w = fit_logistic_newton(X, y).w;
    }
  }
  return m;
}

PropensityModel oracle_propensity(const DGPConfig& cfg) {
  PropensityModel m;
  m.T = cfg.T;
  m.K = cfg.map.num_super();
  m.covariate_cols = cfg.propensity_covariates;
  m.bits.assign(m.T, std::vector<PropensityModel::BitModel>(m.K));
  for (int t = 1; t <= m.T; ++t) {
    for (int k = 0; k < m.K; ++k) {
      auto& bit = m.bits[t - 1][k];
      const BitMechanism& mech = cfg.mech[k];
      switch (mech.kind) {
        case BitMechanism::Kind::StructuralOne:
          bit.structural_one = true;
          break;
        case BitMechanism::Kind::Constant:
          bit.w = Eigen::VectorXd::Zero(m.covariate_cols.size() + 1);
          bit.w[bit.w.size() - 1] = std::log(mech.p / (1.0 - mech.p));
          break;
        case BitMechanism::Kind::Logistic: {
          bit.w = Eigen::VectorXd::Zero(m.covariate_cols.size() + 1);
          for (size_t i = 0; i < m.covariate_cols.size(); ++i)
            bit.w[i] = mech.coefs[m.covariate_cols[i]];
          bit.w[bit.w.size() - 1] = mech.intercept;
          break;
        }
      }
    }
  }
  return m;
}

double propensity_geq(const PropensityModel& prop, int t,
                      const ObservedPanel& hist_x, const StepMask& a_prime) {
  return geq_probability(prop.bit_probs(t, hist_x), a_prime);
}

std::string propensity_to_json(const PropensityModel& m) {
  json j;
  j["T"] = m.T;
  j["K"] = m.K;
  j["covariate_cols"] = m.covariate_cols;
  json bits = json::array();
  for (const auto& row : m.bits) {
    json jr = json::array();
    for (const auto& b : row) {
      json jb;
      jb["structural_one"] = b.structural_one;
      jb["structural_zero"] = b.structural_zero;
      jb["w"] = std::vector<double>(b.w.data(), b.w.data() + b.w.size());
      jr.push_back(jb);
    }
    bits.push_back(jr);
  }
  j["bits"] = bits;
  j["warnings"] = m.warnings;
  return j.dump(2);
}

PropensityModel propensity_from_json(const std::string& text) {
  json j = json::parse(text);
  PropensityModel m;
  m.T = j.at("T").get<int>();
  m.K = j.at("K").get<int>();
  m.covariate_cols = j.at("covariate_cols").get<std::vector<int>>();
  for (const auto& jr : j.at("bits")) {
    std::vector<PropensityModel::BitModel> row;
    for (const auto& jb : jr) {
      PropensityModel::BitModel b;
      b.structural_one = jb.at("structural_one").get<bool>();
      b.structural_zero = jb.at("structural_zero").get<bool>();
      auto w = jb.at("w").get<std::vector<double>>();
      b.w = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
      row.push_back(std::move(b));
    }
    m.bits.push_back(std::move(row));
  }
  if (j.contains("warnings"))
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

// ---------------------------------------------------------------------------
// Q / V
// ---------------------------------------------------------------------------

Eigen::VectorXd QSemiModel::encode_q(int t, const MaskTrajectory& a_prime,
                                     const ObservedPanel& retro_x,
                                     const MaskTrajectory& retro_a) const {
  Eigen::VectorXd v(q_input_dim(t));
  int pos = 0;
  for (int s = 0; s < t; ++s)
    for (int j = 0; j < d; ++j) v[pos++] = retro_x.value_or(s, j, mu[j]);
  for (int s = 1; s <= t; ++s)
    for (int k = 0; k < K; ++k) v[pos++] = a_prime[s - 1].bit(k) ? 1.0 : 0.0;
  for (int s = 1; s < t; ++s)
    for (int k = 0; k < K; ++k) v[pos++] = retro_a[s - 1].bit(k) ? 1.0 : 0.0;
  return v;
}

QSemiModel QSemiModel::zero_model(int T, int K, int d, PolicySpec target) {
  QSemiModel m;
  m.T = T;
  m.K = K;
  m.d = d;
  m.mu.assign(d, 0.0);
  m.target = std::move(target);
  m.zero = true;
  return m;
}

// Simulated history panel G_{a'}(x): cells present where both the record
// observed them and the simulated trajectory acquired them.
static ObservedPanel masked_history(const SuperfeatureMap& map,
                                    const ObservedPanel& retro_x,
                                    const MaskTrajectory& a_prime, int upto_t) {
  ObservedPanel out(retro_x.steps(), retro_x.cols());
  for (int j = 0; j < retro_x.cols(); ++j) out.set(0, j, *retro_x.cell(0, j));
  for (int s = 1; s <= upto_t; ++s)
    for (int k = 0; k < map.num_super(); ++k)
      if (a_prime[s - 1].bit(k))
        for (int j : map.groups[k])
          if (retro_x.observed(s, j)) out.set(s, j, *retro_x.cell(s, j));
  return out;
}

double q_value(const QSemiModel& model, int t, const MaskTrajectory& a_prime,
               const ObservedPanel& retro_x, const MaskTrajectory& retro_a) {
  if (!model.fitted()) throw InvalidInput("q_value: model not fitted");
  if (model.zero) return 0.0;
  const Eigen::VectorXd x = model.encode_q(t, a_prime, retro_x, retro_a);
  return model.q[t - 1].predict(x);
}

double v_value(const QSemiModel& model, const SuperfeatureMap& map, int t,
               const MaskTrajectory& a_prime, const ObservedPanel& retro_x,
               const MaskTrajectory& retro_a) {
  if (!model.fitted()) throw InvalidInput("v_value: model not fitted");
  if (t >= model.T) return 0.0;  // empty future
  if (model.zero) return 0.0;
  const ObservedPanel sim_hist = masked_history(map, retro_x, a_prime, t);
  MaskTrajectory prefix(a_prime.begin(), a_prime.begin() + t);
  const MaskDistribution dist =
      policy_prob(model.target, map, t + 1, sim_hist, prefix);
  double v = 0.0;
  MaskTrajectory next = prefix;
  next.push_back(StepMask::zeros(model.K));
  for (std::uint32_t bitsv = 0; bitsv < (1u << model.K); ++bitsv) {
    const double p = dist.p[bitsv];
    if (p == 0.0) continue;
    next[t] = StepMask(bitsv, model.K);
    v += p * q_value(model, t + 1, next, retro_x, retro_a);
  }
  return v;
}

QSemiModel fit_q_semi(const Dataset& data, const SimDataset& sim,
                      const PolicySpec& target, const std::vector<double>& mu,
                      const QSemiFitConfig& cfg, std::uint64_t seed,
                      std::vector<std::vector<double>>* epoch_mse) {
  if (sim.sims.empty()) throw InvalidInput("fit_q_semi: empty simulated dataset");
  QSemiModel model;
  model.T = sim.steps;
  model.K = data.map.num_super();
  model.d = data.map.num_sub();
  model.mu = mu;
  model.target = target;
  model.q.resize(model.T);

  const int n = static_cast<int>(sim.sims.size());
  const int T = model.T;

  // Backward over steps: V^T = 0; target at t is C'^t + V^t, where V^t is the
  // exact target-policy average of the already-fitted Q^{t+1}.
  std::vector<double> v_next(n, 0.0);  // V^t per sim, refreshed each level
  for (int t = T; t >= 1; --t) {
    Eigen::MatrixXd X(n, model.q_input_dim(t));
    Eigen::VectorXd y(n);
    parallel_for(n, [&](int i) {
      const SimRecord& s = sim.sims[i];
      const Record& r = data.records[s.parent_index];
      X.row(i) = model.encode_q(t, s.a_prime, r.observed, r.masks).transpose();
      y[i] = s.cost[t - 1] + v_next[i];
    });

    RngStream init(seed, static_cast<std::uint64_t>(t), RngTag::NuisanceInit);
    RngStream shuffle(seed, static_cast<std::uint64_t>(t), RngTag::NuisanceShuffle);
    model.q[t - 1] = Mlp(model.q_input_dim(t), cfg.mlp, init);
    auto trace = model.q[t - 1].fit(X, y, shuffle);
    if (epoch_mse) epoch_mse->push_back(std::move(trace));

    if (t > 1) {
      parallel_for(n, [&](int i) {
        const SimRecord& s = sim.sims[i];
        const Record& r = data.records[s.parent_index];
        v_next[i] =
            v_value(model, data.map, t - 1, s.a_prime, r.observed, r.masks);
      });
    }
  }
  return model;
}

std::string qsemi_to_json(const QSemiModel& m) {
  json j;
  j["T"] = m.T;
  j["K"] = m.K;
  j["d"] = m.d;
  j["mu"] = m.mu;
  j["zero"] = m.zero;
  j["target_kind"] = static_cast<int>(m.target.kind);
  j["target_p"] = m.target.p;
  j["target_mask"] = m.target.mask.bits();
  j["target_coeffs"] = m.target.coeffs;
  j["target_impute"] = m.target.impute;
  json nets = json::array();
  for (const auto& net : m.q) {
    json jn;
    jn["input_dim"] = net.input_dim();
    jn["target_mean"] = net.target_mean;
    jn["target_scale"] = net.target_scale;
    json layers = json::array();
    for (size_t l = 0; l < net.W.size(); ++l) {
      json jl;
      jl["rows"] = net.W[l].rows();
      jl["cols"] = net.W[l].cols();
      jl["w"] = std::vector<double>(net.W[l].data(),
                                    net.W[l].data() + net.W[l].size());
      jl["b"] = std::vector<double>(net.b[l].data(),
                                    net.b[l].data() + net.b[l].size());
      layers.push_back(jl);
    }
    jn["layers"] = layers;
    nets.push_back(jn);
  }
  j["q"] = nets;
  return j.dump(2);
}

QSemiModel qsemi_from_json(const std::string& text) {
  json j = json::parse(text);
  QSemiModel m;
  m.T = j.at("T").get<int>();
  m.K = j.at("K").get<int>();
  m.d = j.at("d").get<int>();
  m.mu = j.at("mu").get<std::vector<double>>();
  m.zero = j.at("zero").get<bool>();
  m.target.kind = static_cast<PolicySpec::Kind>(j.at("target_kind").get<int>());
  m.target.p = j.at("target_p").get<double>();
  m.target.mask = StepMask(j.at("target_mask").get<std::uint32_t>(), m.K);
  m.target.coeffs = j.at("target_coeffs").get<std::vector<double>>();
  m.target.impute = j.at("target_impute").get<std::vector<double>>();
  for (const auto& jn : j.at("q")) {
    MlpConfig mc;
    RngStream dummy(0);
    Mlp net(jn.at("input_dim").get<int>(), mc, dummy);
    net.W.clear();
    net.b.clear();
    for (const auto& jl : jn.at("layers")) {
      const auto rows = jl.at("rows").get<Eigen::Index>();
      const auto cols = jl.at("cols").get<Eigen::Index>();
      auto w = jl.at("w").get<std::vector<double>>();
      auto bv = jl.at("b").get<std::vector<double>>();
      net.W.push_back(Eigen::Map<Eigen::MatrixXd>(w.data(), rows, cols));
      net.b.push_back(Eigen::Map<Eigen::VectorXd>(bv.data(), bv.size()));
    }
    net.target_mean = jn.at("target_mean").get<double>();
    net.target_scale = jn.at("target_scale").get<double>();
    net.set_fitted(true);
    m.q.push_back(std::move(net));
  }
  return m;
}

}  // namespace afape
