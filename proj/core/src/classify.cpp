#include "afape/classify.hpp"

#include <nlohmann/json.hpp>

#include "afape/logistic.hpp"

namespace afape {

using nlohmann::json;

Eigen::VectorXd ClassifierModel::encode(int t, const ObservedPanel& hist_x,
                                        const MaskTrajectory& hist_a) const {
  const int d = static_cast<int>(mu.size());
  Eigen::VectorXd v(input_dim(t));
  int pos = 0;
  for (int s = 0; s <= t; ++s)
    for (int j = 0; j < d; ++j) v[pos++] = hist_x.value_or(s, j, mu[j]);
  for (int s = 1; s <= t; ++s)
    for (int k = 0; k < num_super; ++k) v[pos++] = hist_a[s - 1].bit(k) ? 1.0 : 0.0;
  return v;
}

ClassifierModel fit_classifier(const Dataset& data,
                               const std::vector<int>& train_indices,
                               const ClassifierFitConfig& cfg,
                               std::uint64_t seed,
                               std::vector<std::vector<double>>* loss_traces) {
  if (train_indices.empty()) throw InvalidInput("fit_classifier: empty split");
  const auto& map = data.map;
  const int d = map.num_sub();
  const int K = map.num_super();
  const int T = data.steps;

  // Thinned masks: drop each costly acquisition independently with
  // probability 1 - subsample_p.
  std::vector<MaskTrajectory> thinned(train_indices.size());
  for (size_t i = 0; i < train_indices.size(); ++i) {
    const Record& r = data.records[train_indices[i]];
    RngStream rng(seed, static_cast<std::uint64_t>(r.id), RngTag::ClassifierThin);
    MaskTrajectory m = r.masks;
    for (int t = 1; t <= T; ++t)
      for (int k = 0; k < K; ++k)
        if (!map.is_free(k) && m[t - 1].bit(k))
          m[t - 1].set_bit(k, rng.bernoulli(cfg.subsample_p));
    thinned[i] = std::move(m);
  }

  ClassifierModel model;
  model.num_super = K;
  model.mu.assign(d, 0.0);
  std::vector<long long> counts(d, 0);
  for (size_t i = 0; i < train_indices.size(); ++i) {
    const Record& r = data.records[train_indices[i]];
    for (int j = 0; j < d; ++j) {
      model.mu[j] += *r.observed.cell(0, j);
      ++counts[j];
    }
    for (int t = 1; t <= T; ++t) {
      for (int k = 0; k < K; ++k) {
        if (!thinned[i][t - 1].bit(k)) continue;
        for (int j : map.groups[k]) {
          // Cell observed in the data whenever the unthinned mask had it.
          model.mu[j] += *r.observed.cell(t, j);
          ++counts[j];
        }
      }
    }
  }
  for (int j = 0; j < d; ++j)
    if (counts[j] > 0) model.mu[j] /= static_cast<double>(counts[j]);

  // Per-step logistic regressions on the thinned data.
  model.steps.resize(T);
  for (int t = 1; t <= T; ++t) {
    const int dim = model.input_dim(t);
    Eigen::MatrixXd X(train_indices.size(), dim);
    Eigen::VectorXd y(train_indices.size());
    for (size_t i = 0; i < train_indices.size(); ++i) {
      const Record& r = data.records[train_indices[i]];
      // View of the panel under the thinned masks.
      ObservedPanel thin_x(T, d);
      for (int j = 0; j < d; ++j) thin_x.set(0, j, *r.observed.cell(0, j));
      for (int s = 1; s <= t; ++s)
        for (int k = 0; k < K; ++k)
          if (thinned[i][s - 1].bit(k))
            for (int j : map.groups[k]) thin_x.set(s, j, *r.observed.cell(s, j));
      X.row(i) = model.encode(t, thin_x, thinned[i]).transpose();
      y[i] = r.labels[t - 1];
    }
    std::vector<double> trace;
    auto fit = fit_logistic_gd(X, y, cfg.learning_rate, cfg.epochs, cfg.l2,
                               loss_traces ? &trace : nullptr);
    if (loss_traces) loss_traces->push_back(std::move(trace));
    model.steps[t - 1].w = fit.w;
  }
  return model;
}

int predict(const ClassifierModel& model, int t, const ObservedPanel& hist_x,
            const MaskTrajectory& hist_a) {
  if (!model.fitted()) throw InvalidInput("predict: classifier not fitted");
  const Eigen::VectorXd x = model.encode(t, hist_x, hist_a);
  const Eigen::VectorXd& w = model.steps[t - 1].w;
  double score = w[w.size() - 1];
  score += w.head(w.size() - 1).dot(x);
  return score >= 0.0 ? 1 : 0;  // probability 0.5 breaks toward class 1
}

double step_cost(const StepMask& a_prime_t, const ObservedPanel& hist_x,
                 const MaskTrajectory& hist_a, int t, int y_t,
                 const ClassifierModel& model, const CostSpec& costs) {
  double c = 0.0;
  for (int k = 0; k < a_prime_t.size(); ++k)
    if (a_prime_t.bit(k)) c += costs.c_acq[k];
  const int pred = predict(model, t, hist_x, hist_a);
  if (pred != y_t) c += costs.c_mc;
  return c;
}

std::string classifier_to_json(const ClassifierModel& model) {
  json j;
  j["mu"] = model.mu;
  j["num_super"] = model.num_super;
  json steps = json::array();
  for (const auto& s : model.steps) {
    std::vector<double> w(s.w.data(), s.w.data() + s.w.size());
    steps.push_back({{"w", w}});
  }
  j["steps"] = steps;
  return j.dump(2);
}

ClassifierModel classifier_from_json(const std::string& text) {
  json j = json::parse(text);
  ClassifierModel m;
  m.mu = j.at("mu").get<std::vector<double>>();
  m.num_super = j.at("num_super").get<int>();
  for (const auto& s : j.at("steps")) {
    auto w = s.at("w").get<std::vector<double>>();
    ClassifierModel::StepModel sm;
    sm.w = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
    m.steps.push_back(std::move(sm));
  }
  return m;
}

}  // namespace afape
