// Command-line front end: dataset generation, semi-offline simulation,
// nuisance fitting, estimator evaluation, convergence sweeps and positivity
// diagnostics. All stages are deterministic given --seed (and invariant to
// AFAPE_WORKERS).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "afape/experiment.hpp"
#include "afape/io.hpp"

using namespace afape;

namespace {

struct CommonOpts {
  std::string config_path;
  int experiment = 1;
  int n = 100000;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "flat key=value config file");
  cmd->add_option("--experiment", c.experiment, "experiment id (1..5)")
      ->check(CLI::Range(1, 5));
  cmd->add_option("--n", c.n, "number of records");
  cmd->add_option("--seed", c.seed, "master seed");
}

RunConfig load_run(const CommonOpts& c, const CLI::App* cmd) {
  RunConfig run;
  if (!c.config_path.empty()) run = parse_config_file(c.config_path);
  if (cmd->count("--experiment")) run.experiment = static_cast<Experiment>(c.experiment);
  if (cmd->count("--n")) run.n = c.n;
  if (cmd->count("--seed")) run.seed = c.seed;
  if (c.config_path.empty()) {
    run.experiment = static_cast<Experiment>(c.experiment);
    run.n = c.n;
    run.seed = c.seed;
  }
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual cost estimation for active feature acquisition"};
  app.require_subcommand(1);

  // ---- generate ----
  CommonOpts g;
  std::string g_out = "dataset.csv", g_sidecar, g_format = "csv";
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_common(gen, g);
  gen->add_option("--out", g_out, "output path");
  gen->add_option("--sidecar", g_sidecar, "config + realized stats JSON path");
  gen->add_option("--format", g_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  // ---- simulate ----
  CommonOpts s;
  std::string s_agent = "random50", s_out = "dprime.csv";
  int s_nmc = 10;
  auto* sim = app.add_subcommand("simulate", "write the simulated dataset D'");
  add_common(sim, s);
  sim->add_option("--agent", s_agent, "target policy");
  sim->add_option("--n-mc", s_nmc, "replicates per record");
  sim->add_option("--out", s_out, "output path");

  // ---- fit-nuisance ----
  CommonOpts f;
  std::string f_data, f_outdir = ".";
  auto* fit = app.add_subcommand("fit-nuisance",
                                 "fit propensity + classifier from a dataset");
  add_common(fit, f);
  fit->add_option("--data", f_data, "dataset CSV (regenerated when omitted)");
  fit->add_option("--out-dir", f_outdir, "directory for model JSON files");

  // ---- evaluate ----
  CommonOpts e;
  std::string e_agents = "random50", e_estimators = "all", e_out;
  int e_bootstrap = -1;
  bool e_no_normalize = false, e_oracle = false;
  auto* ev = app.add_subcommand("evaluate", "run estimators and print a table");
  add_common(ev, e);
  ev->add_option("--agents", e_agents, "comma list of target policies");
  ev->add_option("--estimators", e_estimators, "comma list or 'all'");
  ev->add_option("--bootstrap", e_bootstrap, "bootstrap replicates (0 = none)");
  ev->add_flag("--no-normalize", e_no_normalize, "disable weight normalization");
  ev->add_flag("--oracle-propensity", e_oracle, "use the exact propensity");
  ev->add_option("--out", e_out, "results CSV path");

  // ---- experiment ----
  CommonOpts x;
  std::string x_agents, x_estimators, x_out;
  auto* ex = app.add_subcommand("experiment",
                                "full experiment table (agents x estimators)");
  add_common(ex, x);
  ex->add_option("--agents", x_agents, "comma list of target policies");
  ex->add_option("--estimators", x_estimators, "comma list or 'all'");
  ex->add_option("--out", x_out, "results CSV path");

  // ---- convergence ----
  CommonOpts c;
  std::string c_agents = "random50,fixed100", c_ns, c_out;
  int c_seeds = -1;
  auto* conv = app.add_subcommand("convergence",
                                  "error vs subsample size for IPW estimators");
  add_common(conv, c);
  conv->add_option("--agents", c_agents, "comma list of target policies");
  conv->add_option("--ns", c_ns, "comma list of subsample sizes");
  conv->add_option("--seeds", c_seeds, "subsample replicates per size");
  conv->add_option("--out", c_out, "convergence CSV path");

  // ---- diagnose ----
  CommonOpts d;
  std::string d_agent = "random50", d_view = "semi-maximal";
  double d_threshold = 0.01;
  int d_budget = 20000;
  auto* diag = app.add_subcommand("diagnose", "positivity diagnostic (JSON)");
  add_common(diag, d);
  diag->add_option("--agent", d_agent, "target policy");
  diag->add_option("--view", d_view, "offline | missing | semi-maximal");
  diag->add_option("--threshold", d_threshold, "mass threshold O");
  diag->add_option("--budget", d_budget, "sampled trajectories");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      RunConfig run = load_run(g, gen);
      DGPConfig cfg = DGPConfig::for_experiment(run.experiment, run.n, run.seed);
      Dataset data = generate_dataset(cfg);
      if (g_format == "jsonl")
        write_dataset_jsonl(data, g_out);
      else
        write_dataset_csv(data, g_out);
      const double cc = complete_case_fraction(data);
      if (!g_sidecar.empty()) {
        nlohmann::json j;
        j["experiment"] = static_cast<int>(run.experiment);
        j["n"] = run.n;
        j["seed"] = run.seed;
        j["T"] = cfg.T;
        j["gamma"] = cfg.gamma;
        j["sigma"] = cfg.sigma;
        j["zeta1"] = cfg.zeta1;
        j["zeta2"] = cfg.zeta2;
        j["w"] = cfg.w;
        j["c_acq"] = cfg.costs.c_acq;
        j["c_mc"] = cfg.costs.c_mc;
        j["complete_case_fraction"] = cc;
        std::ofstream out(g_sidecar);
        out << j.dump(2) << '\n';
      }
      std::cout << "wrote " << g_out << " (n=" << run.n
                << ", complete cases: " << cc * 100.0 << "%)\n";
    } else if (sim->parsed()) {
      RunConfig run = load_run(s, sim);
      run.n_mc = s_nmc;
      DGPConfig cfg = DGPConfig::for_experiment(run.experiment, run.n, run.seed);
      Dataset data = generate_dataset(cfg);
      ClassifierFitConfig ccfg;
      ClassifierModel cl = fit_classifier(
          data, data.split_indices(Split::Train), ccfg, run.seed);
      const PolicySpec target = parse_agent(s_agent, cfg);
      SimDataset dprime =
          sample_dprime(data, data.split_indices(Split::Test), target, target,
                        cl, cfg.costs, run.n_mc, run.seed);
      std::ofstream out(s_out);
      out << "parent_id,replicate,t,a_prime,cost,pi_alpha,pi_sim\n";
      for (const auto& sr : dprime.sims)
        for (int t = 1; t <= dprime.steps; ++t)
          out << sr.parent_id << ',' << sr.replicate << ',' << t << ','
              << sr.a_prime[t - 1].bits() << ','
              << format_double(sr.cost[t - 1]) << ','
              << format_double(sr.pi_alpha[t - 1]) << ','
              << format_double(sr.pi_sim[t - 1]) << '\n';
      std::cout << "wrote " << s_out << " (" << dprime.sims.size()
                << " trajectories)\n";
    } else if (fit->parsed()) {
      RunConfig run = load_run(f, fit);
      DGPConfig cfg = DGPConfig::for_experiment(run.experiment, run.n, run.seed);
      Dataset data = f_data.empty() ? generate_dataset(cfg)
                                    : read_dataset_csv(f_data, cfg.map);
      data.split = cfg.split;
      ClassifierFitConfig ccfg;
      ClassifierModel cl = fit_classifier(
          data, data.split_indices(Split::Train), ccfg, run.seed);
      PropensityFitConfig pcfg;
      pcfg.covariate_cols = cfg.propensity_covariates;
      pcfg.complete_history_only = cfg.mnar;
      PropensityModel prop =
          fit_propensity(data, data.split_indices(Split::Nuisance), pcfg);
      std::ofstream(f_outdir + "/classifier.json") << classifier_to_json(cl);
      std::ofstream(f_outdir + "/propensity.json") << propensity_to_json(prop);
      for (const auto& w : prop.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << f_outdir << "/classifier.json and "
                << f_outdir << "/propensity.json\n";
    } else if (ev->parsed() || ex->parsed()) {
      const bool is_ev = ev->parsed();
      RunConfig run = load_run(is_ev ? e : x, is_ev ? ev : ex);
      const std::string agents = is_ev ? e_agents : x_agents;
      const std::string estimators = is_ev ? e_estimators : x_estimators;
      if (!agents.empty()) run.apply("agents", agents);
      if (!estimators.empty()) run.apply("estimators", estimators);
      if (is_ev && e_bootstrap >= 0) run.bootstrap_B = e_bootstrap;
      if (is_ev && e_no_normalize) run.normalize = false;
      if (is_ev && e_oracle) run.oracle_propensity = true;
      const std::string out = is_ev ? e_out : x_out;
      if (!out.empty()) run.out_path = out;
      auto rows = run_experiment(run);
      std::cout << "estimator,agent,experiment,n,estimate,ci_lo,ci_hi,truth,seed\n";
      for (const auto& r : rows) {
        std::cout << r.estimator << ',' << r.agent << ',' << r.experiment << ','
                  << r.n << ',' << format_double(r.estimate) << ','
                  << (std::isnan(r.ci_lo) ? "" : format_double(r.ci_lo)) << ','
                  << (std::isnan(r.ci_hi) ? "" : format_double(r.ci_hi)) << ','
                  << format_double(r.truth) << ',' << r.seed << '\n';
      }
    } else if (conv->parsed()) {
      RunConfig run = load_run(c, conv);
      if (!c_agents.empty()) run.apply("agents", c_agents);
      if (!c_ns.empty()) run.apply("ns", c_ns);
      if (c_seeds > 0) run.n_seeds = c_seeds;
      if (!c_out.empty()) run.out_path = c_out;
      auto rows = run_convergence(run);
      if (run.out_path.empty()) {
        std::cout << "estimator,agent,n,seed,estimate,truth,abs_error\n";
        for (const auto& r : rows)
          std::cout << r.estimator << ',' << r.agent << ',' << r.n << ','
                    << r.seed_index << ',' << format_double(r.estimate) << ','
                    << format_double(r.truth) << ','
                    << format_double(r.abs_error) << '\n';
      }
    } else if (diag->parsed()) {
      RunConfig run = load_run(d, diag);
      DGPConfig cfg = DGPConfig::for_experiment(run.experiment, run.n, run.seed);
      Dataset data = generate_dataset(cfg);
      PropensityFitConfig pcfg;
      pcfg.covariate_cols = cfg.propensity_covariates;
      pcfg.complete_history_only = cfg.mnar;
      PropensityModel prop =
          fit_propensity(data, data.split_indices(Split::Nuisance), pcfg);
      PositivityView view = PositivityView::SemiMaximal;
      if (d_view == "offline") view = PositivityView::Offline;
      else if (d_view == "missing") view = PositivityView::Missing;
      const PolicySpec target = parse_agent(d_agent, cfg);
      PositivityReport rep =
          check_positivity(view, data, prop, target, std::vector<double>(
                               cfg.map.num_sub(), 0.0),
                           d_threshold, d_budget, run.seed);
      std::cout << rep.to_json() << '\n';
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
