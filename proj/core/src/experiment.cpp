#include "afape/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "afape/io.hpp"

namespace afape {

std::string to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::IpwOff: return "ipw-off";
    case EstimatorId::IpwMiss: return "ipw-miss";
    case EstimatorId::MiMiss: return "mi-miss";
    case EstimatorId::IpwSemi: return "ipw-semi";
    case EstimatorId::DmSemi: return "dm-semi";
    case EstimatorId::DrlSemi: return "drl-semi";
    case EstimatorId::ImpMean: return "imp-mean";
    case EstimatorId::Blocking: return "blocking";
    case EstimatorId::Cc: return "cc";
  }
  return "?";
}

EstimatorId estimator_from_string(const std::string& name) {
  for (EstimatorId id : all_estimators())
    if (to_string(id) == name) return id;
  throw ConfigError("unknown estimator: " + name);
}

std::vector<EstimatorId> all_estimators() {
  return {EstimatorId::IpwOff,  EstimatorId::IpwMiss, EstimatorId::MiMiss,
          EstimatorId::IpwSemi, EstimatorId::DmSemi,  EstimatorId::DrlSemi,
          EstimatorId::ImpMean, EstimatorId::Blocking, EstimatorId::Cc};
}

static std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    const int e = std::stoi(value);
    if (e < 1 || e > 5) throw ConfigError("experiment must be 1..5");
    experiment = static_cast<Experiment>(e);
  } else if (key == "n") {
    n = std::stoi(value);
  } else if (key == "seed") {
    seed = std::stoull(value);
  } else if (key == "agents") {
    agents = split_list(value);
  } else if (key == "estimators") {
    estimators = split_list(value);
  } else if (key == "n_mc") {
    n_mc = std::stoi(value);
  } else if (key == "m_imp") {
    m_imp = std::stoi(value);
  } else if (key == "bootstrap") {
    bootstrap_B = std::stoi(value);
  } else if (key == "level") {
    level = std::stod(value);
  } else if (key == "normalize") {
    normalize = value == "1" || value == "true";
  } else if (key == "oracle_propensity") {
    oracle_propensity = value == "1" || value == "true";
  } else if (key == "q_zero") {
    q_zero = value == "1" || value == "true";
  } else if (key == "drop_first_covariate") {
    drop_first_covariate = value == "1" || value == "true";
  } else if (key == "mi_condition_on_label") {
    mi_condition_on_label = value == "1" || value == "true";
  } else if (key == "terminal_cost_mode") {
    terminal_cost_mode = value == "1" || value == "true";
  } else if (key == "q_epochs") {
    q_epochs = std::stoi(value);
  } else if (key == "q_hidden_layers") {
    q_hidden_layers = std::stoi(value);
  } else if (key == "ns") {
    ns.clear();
    for (const auto& s : split_list(value)) ns.push_back(std::stoi(s));
  } else if (key == "n_seeds") {
    n_seeds = std::stoi(value);
  } else if (key == "out") {
    out_path = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  RunConfig run;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) run.apply(key, value);
  }
  return run;
}

PolicySpec parse_agent(const std::string& name, const DGPConfig& cfg) {
  const int K = cfg.map.num_super();
  if (name == "fixed100") return PolicySpec::fixed(StepMask::ones(K));
  if (name == "fixed0" || name == "none")
    return PolicySpec::fixed(StepMask::zeros(K));
  if (name == "threshold") {
    PolicySpec p = PolicySpec::threshold(cfg.w);
    p.impute.assign(cfg.map.num_sub(), 0.0);
    return p;
  }
  if (name.rfind("random", 0) == 0) {
    const int pct = std::stoi(name.substr(6));
    if (pct < 0 || pct > 100) throw ConfigError("bad agent: " + name);
    return PolicySpec::random_p(pct / 100.0);
  }
  throw ConfigError("unknown agent: " + name);
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

PipelineBase build_pipeline_base(const RunConfig& run) {
  PipelineBase base;
  base.cfg = DGPConfig::for_experiment(run.experiment, run.n, run.seed);
  base.data = generate_dataset(base.cfg);

  ClassifierFitConfig ccfg;  // subsample 0.5, lr 0.1, 500 epochs, l2 1e-4
  base.classifier = fit_classifier(base.data, base.data.split_indices(Split::Train),
                                   ccfg, run.seed);

  PropensityFitConfig pcfg;
  pcfg.covariate_cols = base.cfg.propensity_covariates;
  if (run.drop_first_covariate && !pcfg.covariate_cols.empty())
    pcfg.covariate_cols.erase(pcfg.covariate_cols.begin());
  pcfg.complete_history_only = base.cfg.mnar;
  base.prop = fit_propensity(base.data, base.data.split_indices(Split::Nuisance),
                             pcfg);
  base.prop_oracle = oracle_propensity(base.cfg);
  return base;
}

AgentArtifacts build_agent(const PipelineBase& base, const RunConfig& run,
                           const PolicySpec& target, bool with_truth) {
  AgentArtifacts a;
  a.target = target;

  a.sim_nuisance = sample_dprime(base.data,
                                 base.data.split_indices(Split::Nuisance), target,
                                 target, base.classifier, base.cfg.costs,
                                 run.n_mc, run.seed);
  a.sim_test = sample_dprime(base.data, base.data.split_indices(Split::Test),
                             target, target, base.classifier, base.cfg.costs,
                             run.n_mc, run.seed);
  if (run.terminal_cost_mode) {
    to_terminal_costs(a.sim_nuisance, base.cfg.costs);
    to_terminal_costs(a.sim_test, base.cfg.costs);
  }

  if (run.q_zero) {
    a.q = QSemiModel::zero_model(base.data.steps, base.data.map.num_super(),
                                 base.data.map.num_sub(), target);
  } else {
    QSemiFitConfig qcfg;
    qcfg.mlp.epochs = run.q_epochs;
    qcfg.mlp.hidden_layers = run.q_hidden_layers;
    a.q = fit_q_semi(base.data, a.sim_nuisance, target, base.classifier.mu, qcfg,
                     run.seed);
  }

  if (with_truth) {
    const int n_test =
        static_cast<int>(base.data.split_indices(Split::Test).size());
    a.truth = ground_truth_eval(base.data, target, base.classifier, base.cfg,
                                n_test, run.n_mc, run.seed,
                                run.terminal_cost_mode);
  }
  return a;
}

EstimateReport run_estimator(EstimatorId id, const PipelineBase& base,
                             const AgentArtifacts& agent, const RunConfig& run) {
  const auto test = base.data.split_indices(Split::Test);
  const PropensityModel& prop =
      run.oracle_propensity ? base.prop_oracle : base.prop;
  const auto& cl = base.classifier;
  const auto& costs = base.cfg.costs;
  StatTable table;

  switch (id) {
    case EstimatorId::IpwOff:
      table = prepare_off(base.data, test, prop, agent.target, cl, costs,
                          run.terminal_cost_mode);
      break;
    case EstimatorId::IpwMiss:
      table = prepare_miss(base.data, test, prop, agent.target, cl, costs,
                           run.n_mc, run.seed, run.terminal_cost_mode);
      break;
    case EstimatorId::MiMiss:
      table = prepare_mi_miss(base.data, test, base.cfg, agent.target, cl, costs,
                              run.m_imp, run.n_mc, run.seed,
                              run.mi_condition_on_label, run.terminal_cost_mode);
      break;
    case EstimatorId::IpwSemi:
      table = prepare_semi(base.data, agent.sim_test, prop,
                           PiIdVariant::TruncatedBeta);
      break;
    case EstimatorId::DmSemi:
      table = prepare_dm_semi(base.data, test, agent.q);
      break;
    case EstimatorId::DrlSemi:
      table = prepare_semi(base.data, agent.sim_test, prop,
                           PiIdVariant::TruncatedBeta, &agent.q);
      break;
    case EstimatorId::ImpMean:
      table = prepare_imp_mean(base.data, test, base.classifier.mu, agent.target,
                               cl, costs, run.n_mc, run.seed,
                               run.terminal_cost_mode);
      break;
    case EstimatorId::Blocking:
      table = prepare_blocking(base.data, agent.sim_test);
      break;
    case EstimatorId::Cc:
      table = prepare_cc(base.data, test, agent.target, cl, costs, run.n_mc,
                         run.seed, run.terminal_cost_mode);
      break;
  }
  return report_from_table(to_string(id), table, run.normalize, run.bootstrap_B,
                           run.level, run.seed);
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

static std::vector<EstimatorId> expand_estimators(
    const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("empty estimator list");
  std::vector<EstimatorId> out;
  for (const auto& name : names) {
    if (name == "all") {
      for (EstimatorId id : all_estimators()) out.push_back(id);
    } else {
      out.push_back(estimator_from_string(name));
    }
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "estimator,agent,experiment,n,estimate,ci_lo,ci_hi,truth,seed\n";
  for (const auto& r : rows) {
    f << r.estimator << ',' << r.agent << ',' << r.experiment << ',' << r.n
      << ',' << format_double(r.estimate) << ','
      << (std::isnan(r.ci_lo) ? "" : format_double(r.ci_lo)) << ','
      << (std::isnan(r.ci_hi) ? "" : format_double(r.ci_hi)) << ','
      << format_double(r.truth) << ',' << r.seed << '\n';
  }
}

std::vector<ResultRow> run_experiment(const RunConfig& run) {
  const std::vector<EstimatorId> ids = expand_estimators(run.estimators);
  if (run.agents.empty()) throw ConfigError("empty agent list");

  PipelineBase base = build_pipeline_base(run);
  std::vector<ResultRow> rows;
  for (const auto& agent_name : run.agents) {
    const PolicySpec target = parse_agent(agent_name, base.cfg);
    const AgentArtifacts agent = build_agent(base, run, target);
    for (EstimatorId id : ids) {
      ResultRow row;
      row.estimator = to_string(id);
      row.agent = agent_name;
      row.experiment = static_cast<int>(run.experiment);
      row.n = run.n;
      row.truth = agent.truth;
      row.seed = run.seed;
      const EstimateReport rep = run_estimator(id, base, agent, run);
      row.estimate = rep.estimate;
      row.ci_lo = rep.ci_lo;
      row.ci_hi = rep.ci_hi;
      rows.push_back(row);
    }
  }
  if (!run.out_path.empty()) write_results_csv(rows, run.out_path);
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "estimator,agent,n,seed,estimate,truth,abs_error\n";
  for (const auto& r : rows) {
    f << r.estimator << ',' << r.agent << ',' << r.n << ',' << r.seed_index
      << ',' << format_double(r.estimate) << ',' << format_double(r.truth)
      << ',' << format_double(r.abs_error) << '\n';
  }
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& run) {
  PipelineBase base = build_pipeline_base(run);
  const auto test = base.data.split_indices(Split::Test);
  const int n_test = static_cast<int>(test.size());
  for (int n_sub : run.ns)
    if (n_sub > n_test)
      throw ConfigError("convergence n exceeds the test split size");

  const PropensityModel& prop =
      run.oracle_propensity ? base.prop_oracle : base.prop;
  std::vector<ConvergenceRow> rows;

  for (const auto& agent_name : run.agents) {
    const PolicySpec target = parse_agent(agent_name, base.cfg);
    const AgentArtifacts agent = build_agent(base, run, target);

    struct Entry {
      std::string name;
      StatTable table;
    };
    std::vector<Entry> tables;
    tables.push_back({"ipw-off",
                      prepare_off(base.data, test, prop, target, base.classifier,
                                  base.cfg.costs, run.terminal_cost_mode)});
    tables.push_back({"ipw-miss",
                      prepare_miss(base.data, test, prop, target,
                                   base.classifier, base.cfg.costs, run.n_mc,
                                   run.seed, run.terminal_cost_mode)});
    tables.push_back({"ipw-semi", prepare_semi(base.data, agent.sim_test, prop,
                                               PiIdVariant::TruncatedBeta)});

    for (int n_sub : run.ns) {
      for (int s = 0; s < run.n_seeds; ++s) {
        // Deterministic subsample of test rows without replacement.
        RngStream rng(run.seed, static_cast<std::uint64_t>(s), RngTag::Subsample,
                      static_cast<std::uint64_t>(n_sub));
        std::vector<int> rows_idx(n_test);
        for (int i = 0; i < n_test; ++i) rows_idx[i] = i;
        for (int i = 0; i < n_sub; ++i) {
          const int j =
              i + static_cast<int>(rng.uniform_int(n_test - i));
          std::swap(rows_idx[i], rows_idx[j]);
        }
        rows_idx.resize(n_sub);
        for (const auto& entry : tables) {
          ConvergenceRow row;
          row.estimator = entry.name;
          row.agent = agent_name;
          row.n = n_sub;
          row.seed_index = s;
          row.truth = agent.truth;
          try {
            row.estimate = eval_table(entry.table, rows_idx, run.normalize);
            row.abs_error = std::abs(row.estimate - agent.truth);
          } catch (const PositivityError&) {
            row.estimate = std::numeric_limits<double>::quiet_NaN();
            row.abs_error = std::numeric_limits<double>::quiet_NaN();
          } catch (const InvalidInput&) {
            row.estimate = std::numeric_limits<double>::quiet_NaN();
            row.abs_error = std::numeric_limits<double>::quiet_NaN();
          }
          rows.push_back(row);
        }
      }
    }
  }
  if (!run.out_path.empty()) write_convergence_csv(rows, run.out_path);
  return rows;
}

}  // namespace afape
