// Command-line front end: sweep, generate and replicate.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 fit failure.
// Failures print {"error": {"code": .., "kind": .., "message": ..}} on stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "pmcgd/datagen.hpp"
#include "pmcgd/errors.hpp"
#include "pmcgd/replicate.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kFit = 3 };

int fail(ExitCode code, const std::string& kind, const std::string& message) {
  nlohmann::json err = {{"error", {{"code", static_cast<int>(code)}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
  return code;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<pmcgd::StructureId> parse_structures(const std::string& s) {
  if (s == "all") return {pmcgd::kAllStructures.begin(), pmcgd::kAllStructures.end()};
  std::vector<pmcgd::StructureId> out;
  for (const auto& code : split_list(s)) out.push_back(pmcgd::parse_structure(code));
  return out;
}

void emit(const nlohmann::json& j, const std::string& output) {
  if (output.empty()) {
    std::cout << j.dump(2) << std::endl;
    return;
  }
  std::ofstream out(output);
  if (!out) throw pmcgd::DataError("cannot write '" + output + "'");
  out << j.dump(2) << '\n';
}

struct FitFlags {
  double epsilon = 1e-5;
  double eta_max = 1000.0;
  double alpha_min = 0.5;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iter = 1000;

  void attach(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Aitken convergence tolerance")->capture_default_str();
    app->add_option("--eta-max", eta_max, "upper bound on the inflation parameter")->capture_default_str();
    app->add_option("--alpha-min", alpha_min, "lower bound on the proportion of good points")->capture_default_str();
    app->add_option("--seed", seed, "seed for every random choice")->capture_default_str();
    app->add_option("--restarts", restarts, "random starts of the Gaussian initializer")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap per fit")->capture_default_str();
  }

  pmcgd::FitConfig config() const {
    pmcgd::FitConfig c;
    c.epsilon = epsilon;
    c.eta_star = eta_max;
    c.alpha_star = alpha_min;
    c.seed = seed;
    c.restarts = restarts;
    c.max_iter = max_iter;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust clustering with parsimonious mixtures of contaminated Gaussian distributions"};
  app.require_subcommand(1);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "fit a grid of structures and G, rank by BIC, report");
  std::string input, columns, label_column, structures = "all", output, plot;
  int g_min = 1, g_max = 3;
  double threshold = 0.5;
  unsigned workers = 0;
  FitFlags sweep_flags;
  sweep_cmd->add_option("--input", input, "CSV file")->required();
  sweep_cmd->add_option("--columns", columns, "comma list of feature columns (names or 1-based indices)");
  sweep_cmd->add_option("--label-column", label_column, "column with true classes, for evaluation only");
  sweep_cmd->add_option("--structures", structures, "comma list of structures or 'all'")->capture_default_str();
  sweep_cmd->add_option("--g-min", g_min)->capture_default_str();
  sweep_cmd->add_option("--g-max", g_max)->capture_default_str();
  sweep_cmd->add_option("--threshold", threshold, "good if v at the MAP component exceeds this")->capture_default_str();
  sweep_cmd->add_option("--workers", workers, "parallel fits (0 = all cores)");
  sweep_cmd->add_option("--output", output, "JSON report path (default stdout)");
  sweep_cmd->add_option("--plot", plot, "SVG scatter path (two features only)");
  sweep_flags.attach(sweep_cmd);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "write the two-component EVE sample with uniform noise as CSV");
  std::uint64_t gen_seed = 0;
  int gen_noise = 20;
  std::string gen_output;
  gen_cmd->add_option("--seed", gen_seed)->capture_default_str();
  gen_cmd->add_option("--noise", gen_noise, "number of uniform noise points")->capture_default_str();
  gen_cmd->add_option("--output", gen_output, "CSV path (default stdout)");

  // replicate
  auto* rep_cmd = app.add_subcommand("replicate", "run one of the bundled experiments end to end");
  std::string experiment, rep_input, rep_output, rep_label = "cultivar";
  int rep_seeds = 10;
  FitFlags rep_flags;
  rep_cmd->add_option("experiment", experiment, "synthetic-noise | crabs | wine")
      ->required()
      ->check(CLI::IsMember({"synthetic-noise", "crabs", "wine"}));
  rep_cmd->add_option("--input", rep_input, "dataset CSV (crabs: RW, CL, sex[, sp]; wine: 13 features + label)");
  rep_cmd->add_option("--label-column", rep_label, "wine class column")->capture_default_str();
  rep_cmd->add_option("--seeds", rep_seeds, "synthetic-noise: number of seeds")->capture_default_str();
  rep_cmd->add_option("--output", rep_output, "JSON path (default stdout)");
  rep_cmd->add_option("--workers", workers, "parallel fits for wine (0 = all cores)");
  rep_flags.attach(rep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*sweep_cmd) {
      pmcgd::RunConfig cfg;
      cfg.input = input;
      cfg.columns = split_list(columns);
      if (!label_column.empty()) cfg.label_column = label_column;
      cfg.structures = parse_structures(structures);
      cfg.g_min = g_min;
      cfg.g_max = g_max;
      cfg.good_threshold = threshold;
      cfg.fit = sweep_flags.config();
      cfg.workers = workers;
      if (!plot.empty()) cfg.plot = plot;
      if (!output.empty()) cfg.output = output;
      const auto report = pmcgd::run_sweep(cfg);
      if (output.empty()) std::cout << nlohmann::json(report).dump(2) << std::endl;
    } else if (*gen_cmd) {
      auto spec = pmcgd::eve_noise_scenario(gen_seed);
      spec.noise_count = gen_noise;
      const auto sample = pmcgd::sample_scenario(spec);
      if (gen_output.empty()) {
        pmcgd::write_labeled_csv(sample, std::cout);
      } else {
        std::ofstream out(gen_output);
        if (!out) throw pmcgd::DataError("cannot write '" + gen_output + "'");
        pmcgd::write_labeled_csv(sample, out);
      }
    } else if (*rep_cmd) {
      const auto fit_cfg = rep_flags.config();
      if (experiment == "synthetic-noise") {
        emit(pmcgd::summary_json(pmcgd::replicate_synthetic(fit_cfg.seed, rep_seeds, fit_cfg)), rep_output);
      } else {
        if (rep_input.empty()) return fail(kUsage, "usage", "--input is required for " + experiment);
        const auto table = pmcgd::read_csv(std::filesystem::path(rep_input));
        if (experiment == "crabs") emit(pmcgd::summary_json(pmcgd::replicate_crabs(table, fit_cfg)), rep_output);
        else emit(nlohmann::json(pmcgd::replicate_wine(table, rep_label, fit_cfg, workers)), rep_output);
      }
    }
  } catch (const pmcgd::DataError& e) {
    return fail(kData, "data", e.what());
  } catch (const pmcgd::DimensionError& e) {
    return fail(kData, "data", e.what());
  } catch (const pmcgd::FitError& e) {
    return fail(kFit, "fit", e.what());
  } catch (const pmcgd::NotPositiveDefinite& e) {
    return fail(kFit, "fit", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kUsage, "config", e.what());
  } catch (const std::exception& e) {
    return fail(kFit, "fit", e.what());
  }
  return kOk;
}
