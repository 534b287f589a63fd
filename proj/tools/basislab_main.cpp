#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "basislab/commands.hpp"
#include "basislab/errors.hpp"

namespace {

using basislab::cli::RunConfig;

void add_common_estimate_flags(CLI::App* cmd, RunConfig& config, std::vector<std::string>& bands,
                               std::string& from, std::string& to) {
  cmd->add_option("--plants", config.plants, "Plants CSV")->required();
  cmd->add_option("--elevators", config.elevators, "Elevators CSV")->required();
  cmd->add_option("--cash", config.cash, "Daily cash prices CSV")->required();
  cmd->add_option("--futures", config.futures, "Daily futures quotes CSV")->required();
  cmd->add_option("--bands", bands, "Distance bands to run (default: all five)")
      ->delimiter(',');
  cmd->add_option("--completeness", config.completeness,
                  "Minimum data completeness fraction (default 0.85)");
  cmd->add_option("--top-n", config.top_n, "Keep only the N most complete elevators");
  cmd->add_option("--hac-lag", config.hac_lag, "Newey-West lag (default: 4*(T/100)^(2/9))");
  cmd->add_option("--zeta", config.zeta, "SDID unit-weight regularization (default: data-driven)");
  cmd->add_option("--from", from, "Restrict the panel to dates >= YYYY-MM-DD");
  cmd->add_option("--to", to, "Restrict the panel to dates <= YYYY-MM-DD");
  cmd->add_option("--seed", config.seed, "Seed for placebo inference");
  cmd->add_option("--out", config.out_dir, "Output directory")->required();
}

void apply_band_selection(RunConfig& config, const std::vector<std::string>& bands) {
  if (bands.empty()) return;
  config.bands.clear();
  for (const std::string& label : bands) {
    config.bands.push_back(basislab::geo::band_from_label(label));
  }
}

void apply_range(RunConfig& config, const std::string& from, const std::string& to) {
  if (!from.empty()) config.from = basislab::Date::parse(from);
  if (!to.empty()) config.to = basislab::Date::parse(to);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial basis analysis around soybean crush plants"};
  app.require_subcommand(1);

  RunConfig sim_config;
  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic panel with known effects");
  sim->add_option("--scenario", sim_config.scenario, "Scenario key=value file")->required();
  sim->add_option("--seed", sim_config.seed, "Override the scenario seed");
  sim->add_option("--out", sim_config.out_dir, "Output directory")->required();

  RunConfig new_config;
  std::vector<std::string> new_bands;
  std::string new_from, new_to;
  CLI::App* enew = app.add_subcommand("estimate-new", "Event-window DiD/SC-DiD around new plants");
  add_common_estimate_flags(enew, new_config, new_bands, new_from, new_to);
  std::string exclude;
  enew->add_option("--exclude-plant", exclude, "Also report pooled results without this plant");
  enew->add_option("--placebo-reps", new_config.placebo_reps,
                   "Placebo replications for SDID standard errors (default 200)");

  RunConfig exist_config;
  std::vector<std::string> exist_bands;
  std::string exist_from, exist_to;
  CLI::App* eexist =
      app.add_subcommand("estimate-existing", "Monthly distance-band regressions, existing plants");
  add_common_estimate_flags(eexist, exist_config, exist_bands, exist_from, exist_to);

  basislab::cli::FeedstockConfig fuel_config;
  CLI::App* fuel = app.add_subcommand("feedstock", "LCFS credit and cost gap arithmetic");
  fuel->add_option("--ci-a", fuel_config.from.ci_score, "CI score of feedstock A (g/MJ)");
  fuel->add_option("--ci-b", fuel_config.to.ci_score, "CI score of feedstock B (g/MJ)");
  fuel->add_option("--price-a", fuel_config.from.price_per_lb, "Price of A ($/lb)");
  fuel->add_option("--price-b", fuel_config.to.price_per_lb, "Price of B ($/lb)");
  fuel->add_option("--credit-price", fuel_config.constants.credit_price_per_ton,
                   "LCFS credit price ($/metric ton)");
  fuel->add_option("--mj-per-gallon", fuel_config.constants.mj_per_gallon, "Energy per gallon");
  fuel->add_option("--lbs-per-gallon", fuel_config.constants.lbs_feedstock_per_gallon,
                   "Feedstock pounds per gallon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      basislab::cli::cmd_simulate(sim_config);
    } else if (enew->parsed()) {
      apply_band_selection(new_config, new_bands);
      apply_range(new_config, new_from, new_to);
      if (!exclude.empty()) new_config.exclude_plant = exclude;
      basislab::cli::cmd_estimate_new(new_config);
    } else if (eexist->parsed()) {
      apply_band_selection(exist_config, exist_bands);
      apply_range(exist_config, exist_from, exist_to);
      basislab::cli::cmd_estimate_existing(exist_config);
    } else if (fuel->parsed()) {
      basislab::cli::cmd_feedstock(fuel_config, std::cout);
    }
  } catch (const basislab::ValidationError& err) {
    std::cerr << "error: data: " << err.what() << "\n";
    return basislab::cli::kExitDataError;
  } catch (const basislab::EstimationError& err) {
    std::cerr << "error: estimation: " << err.what() << "\n";
    return basislab::cli::kExitEstimationError;
  } catch (const std::exception& err) {
    std::cerr << "error: internal: " << err.what() << "\n";
    return 1;
  }
  return basislab::cli::kExitOk;
}
