#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recal/cli.hpp"
#include "recal/io/csv.hpp"

namespace {

using namespace recal;

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) fail(Errc::InvalidArgument, "cannot write '" + out + "'");
  f << text;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("RECAL_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0') fail(Errc::InvalidArgument, std::string("RECAL_SEED is not an unsigned integer: ") + s);
  return v;
}

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) fail(Errc::InvalidArgument, "sweep must look like name=v1,v2,... or name=lo:hi:steps");
  Sweep s{text.substr(0, eq), {}};
  const std::string rest = text.substr(eq + 1);
  if (std::count(rest.begin(), rest.end(), ':') == 2) {
    double lo = 0, hi = 0;
    int steps = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(rest);
    if (!(is >> lo >> c1 >> hi >> c2 >> steps) || steps < 1) fail(Errc::InvalidArgument, "bad range '" + rest + "'");
    s.values = linspace(lo, hi, steps);
  } else {
    std::istringstream is(rest);
    std::string item;
    while (std::getline(is, item, ',')) s.values.push_back(std::stod(item));
  }
  if (s.values.empty()) fail(Errc::InvalidArgument, "sweep '" + s.param + "' has no values");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression calibration with covariate-adjustment strategies for exposure measurement error"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Correct an exposure-outcome estimate using main and validation CSVs");
  std::string main_csv, valid_csv, config_path, est_format = "text", est_out;
  est->add_option("--main", main_csv, "Main-study CSV (surrogate, outcome, covariates)")->required();
  est->add_option("--validation", valid_csv, "Validation-study CSV (exposure, surrogate, covariates)")->required();
  est->add_option("--config", config_path, "Analysis YAML (columns, roles, outcome, strategies)")->required();
  est->add_option("--format", est_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  est->add_option("--out", est_out, "Output path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run Monte Carlo scenarios");
  std::string sim_config, sim_scenario, sim_catalog, sim_format = "markdown", sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_reps;
  unsigned sim_jobs = 0;
  bool sim_compare = false, sim_list = false;
  std::vector<std::string> sim_strategies;
  auto* g_sim = sim->add_option_group("source");
  g_sim->add_option("--config", sim_config, "Scenario YAML file");
  g_sim->add_option("--scenario", sim_scenario, "Catalog scenario name, e.g. dag4.base.continuous");
  g_sim->add_option("--catalog", sim_catalog, "Run every catalog scenario whose name contains all dot-separated tokens");
  g_sim->add_flag("--list", sim_list, "List catalog scenario names");
  g_sim->require_option(1);
  sim->add_option("--seed", sim_seed, "Seed (default: RECAL_SEED or the scenario seed)");
  sim->add_option("--replicates", sim_reps, "Override replicate count");
  sim->add_option("--jobs", sim_jobs, "Worker threads (0 = all cores)");
  sim->add_option("--strategies", sim_strategies, "Subset of OM NoneNone NoneM ONone");
  sim->add_option("--format", sim_format, "markdown, csv or json")->check(CLI::IsMember({"markdown", "csv", "json"}));
  sim->add_flag("--compare", sim_compare, "Append analytic ARE versus empirical ERE table");
  sim->add_option("--out", sim_out, "Output path (default stdout)");

  // are-grid
  auto* grid = app.add_subcommand("are-grid", "Analytic relative efficiency over a two-parameter grid");
  int grid_dag = 8;
  std::string sweep1, sweep2, grid_out;
  std::vector<std::string> grid_fixed;
  double grid_nms = 5000, grid_nvs = 400;
  grid->add_option("--dag", grid_dag, "DAG 1..8")->check(CLI::Range(1, 8));
  grid->add_option("--sweep1", sweep1, "name=v1,v2,... or name=lo:hi:steps");
  grid->add_option("--sweep2", sweep2, "second swept parameter");
  grid->add_option("--fixed", grid_fixed, "name=value for held parameters (rho_vx, rho_xz_v, rho_vz_x, rho_xy_v, rho_vy_x)");
  grid->add_option("--n-ms", grid_nms, "Main-study size");
  grid->add_option("--n-vs", grid_nvs, "Validation-study size");
  grid->add_option("--out", grid_out, "Output CSV path (default stdout)");

  // advise
  auto* adv = app.add_subcommand("advise", "Covariate placement advice from declared roles");
  std::string roles_path, adv_format = "text", adv_out, adv_outcome;
  adv->add_option("--roles", roles_path, "YAML file with a 'covariates' list")->required();
  adv->add_option("--outcome", adv_outcome, "continuous or binary (overrides the file)");
  adv->add_option("--format", adv_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  adv->add_option("--out", adv_out, "Output path (default stdout)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write one simulated replicate as main/validation CSVs");
  std::string gen_scenario, gen_config, gen_main, gen_valid;
  std::size_t gen_rep = 0;
  std::optional<std::uint64_t> gen_seed;
  auto* g_gen = gen->add_option_group("source");
  g_gen->add_option("--scenario", gen_scenario, "Catalog scenario name");
  g_gen->add_option("--config", gen_config, "Scenario YAML file");
  g_gen->require_option(1);
  gen->add_option("--replicate", gen_rep, "Replicate index");
  gen->add_option("--seed", gen_seed, "Seed (default: RECAL_SEED or the scenario seed)");
  gen->add_option("--main", gen_main, "Main-study CSV output")->required();
  gen->add_option("--validation", gen_valid, "Validation-study CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*est) {
      const auto cfg = io::load_analysis_config(config_path);
      const auto rep = cli::run_estimate(io::read_csv(main_csv), io::read_csv(valid_csv), cfg);
      emit(est_format == "json" ? cli::to_json(rep).dump(2) + "\n" : cli::report_text(rep), est_out);
    } else if (*sim) {
      if (sim_list) {
        std::string names;
        for (const auto& c : catalog()) names += c.name + "\n";
        emit(names, sim_out);
        return 0;
      }
      RunOptions opt;
      opt.jobs = sim_jobs;
      opt.replicates = sim_reps;
      opt.seed = sim_seed ? sim_seed : env_seed();
      opt.log = &std::cerr;
      std::vector<AdjustmentStrategy> strategies(kAllStrategies.begin(), kAllStrategies.end());
      if (!sim_strategies.empty()) {
        strategies.clear();
        for (const auto& s : sim_strategies) strategies.push_back(parse_strategy(s));
      }
      std::vector<SimResult> results;
      if (!sim_catalog.empty()) {
        results = run_catalog(sim_catalog, strategies, opt);
      } else {
        const auto cfg = sim_config.empty() ? find_scenario(sim_scenario) : io::load_scenario(sim_config);
        results.push_back(run_scenario(cfg, strategies, opt));
      }
      std::string text;
      if (sim_format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : results) j.push_back(cli::to_json(r));
        text = j.dump(2) + "\n";
      } else {
        const auto fmt = parse_table_format(sim_format);
        text = summary_table(results, fmt);
        if (sim_compare) text += "\n" + comparison_table(results, fmt);
      }
      emit(text, sim_out);
    } else if (*grid) {
      const auto dag = dag_from_index(grid_dag);
      DefaultGrid g;
      if (sweep1.empty() && sweep2.empty()) {
        g = default_grid(dag);
      } else if (!sweep1.empty() && !sweep2.empty()) {
        g.s1 = parse_sweep(sweep1);
        g.s2 = parse_sweep(sweep2);
        g.fixed.rho_xz_v = 0.7;
        g.fixed.rho_xy_v = 0.45;
      } else {
        fail(Errc::InvalidArgument, "give both --sweep1 and --sweep2, or neither for the default grid");
      }
      for (const auto& f : grid_fixed) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) fail(Errc::InvalidArgument, "--fixed expects name=value, got '" + f + "'");
        conditional_field(g.fixed, f.substr(0, eq)) = std::stod(f.substr(eq + 1));
      }
      g.fixed.n_ms = grid_nms;
      g.fixed.n_vs = grid_nvs;
      emit(grid_csv(are_grid(dag, g.s1, g.s2, g.fixed)), grid_out);
    } else if (*adv) {
      auto cfg = io::load_roles(roles_path);
      if (!adv_outcome.empty()) cfg.outcome = parse_outcome(adv_outcome);
      const auto a = advise(cfg.covariates, cfg.outcome);
      emit(adv_format == "json" ? cli::to_json(a).dump(2) + "\n" : cli::advice_text(a), adv_out);
    } else if (*gen) {
      auto cfg = gen_config.empty() ? find_scenario(gen_scenario) : io::load_scenario(gen_config);
      if (auto s = gen_seed ? gen_seed : env_seed()) cfg.seed = *s;
      const auto sample = generate(cfg, gen_rep);
      io::write_csv(sample.main, gen_main);
      io::write_csv(sample.validation, gen_valid);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
