#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmcgd/covariance.hpp"
#include "pmcgd/csv.hpp"
#include "pmcgd/ecm.hpp"
#include "pmcgd/report.hpp"

namespace pmcgd {

struct RunConfig {
  std::filesystem::path input;
  std::vector<std::string> columns;  // empty: every column except the label column
  std::optional<std::string> label_column;
  std::vector<StructureId> structures{kAllStructures.begin(), kAllStructures.end()};
  int g_min = 1;
  int g_max = 3;
  FitConfig fit;
  double good_threshold = 0.5;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> plot;
  unsigned workers = 0;

  void validate() const;
};

// Ingest, sweep, classify and assemble the report; writes the JSON and
// the optional plot when paths are set.
Report run_sweep(const RunConfig& cfg);

void write_report(const Report& r, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

// --- uniform-noise scenario -------------------------------------------------

struct SyntheticSeedResult {
  std::uint64_t seed = 0;
  double noise_recall = 0.0;   // fraction of the uniform points flagged bad
  double good_ari = 0.0;       // ARI on the non-noise points
  double eve_bic = 0.0;
  double eve_loglik = 0.0;
  double best_gpcm_bic = 0.0;
  std::string best_gpcm;       // e.g. "VVE/3"
  bool eve_beats_gpcm = false;
};

struct SyntheticSummary {
  std::vector<SyntheticSeedResult> seeds;
  double median_noise_recall = 0.0;
  double median_good_ari = 0.0;
  int eve_wins = 0;
};

// EVE contaminated fit at G = 2 against every Gaussian structure at
// G in {2, 3}, over seeds first_seed .. first_seed + n_seeds - 1.
SyntheticSummary replicate_synthetic(std::uint64_t first_seed, int n_seeds, const FitConfig& cfg);

// --- crab perturbation study -----------------------------------------------

inline constexpr std::array<double, 8> kCrabPerturbations = {-15, -10, -5, 0, 5, 10, 15, 20};

struct CrabRow {
  double value = 0.0;
  long gpcm_misallocated = 0;
  long misallocated = 0;
  double eta_outlier_group = 0.0;
  bool outlier_flagged_bad = false;
};

struct CrabSummary {
  std::vector<CrabRow> rows;
};

// Blue crabs (rows with sp == "B" when an sp column exists), features RW and
// CL, truth from sex. Row 25's CL is replaced by each value and a VVV model
// with G = 2 is fitted.
DataMatrix load_crabs(const CsvTable& table, std::vector<std::string>* sex = nullptr);
CrabSummary replicate_crabs(const CsvTable& table, const FitConfig& cfg,
                            std::span<const double> values = kCrabPerturbations);

// --- wine ------------------------------------------------------------------

// Sweep over every structure and G = 1..4 with the label column held out;
// the report's statistics carry the bad-point breakdown by class.
Report replicate_wine(const CsvTable& table, const std::string& label_column, const FitConfig& cfg,
                      unsigned workers = 0);

nlohmann::json summary_json(const SyntheticSummary& s);
nlohmann::json summary_json(const CrabSummary& s);

}  // namespace pmcgd
