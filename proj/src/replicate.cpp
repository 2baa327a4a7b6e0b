#include "pmcgd/replicate.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "pmcgd/classification.hpp"
#include "pmcgd/datagen.hpp"
#include "pmcgd/errors.hpp"
#include "pmcgd/model_selection.hpp"
#include "pmcgd/svg.hpp"

namespace pmcgd {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<std::string> feature_columns(const CsvTable& table, const std::optional<std::string>& label) {
  std::vector<std::string> cols;
  std::optional<std::size_t> skip;
  if (label) skip = table.column_index(*label);
  for (std::size_t j = 0; j < table.columns(); ++j) {
    if (skip && *skip == j) continue;
    cols.push_back(j < table.header.size() ? table.header[j] : std::to_string(j + 1));
  }
  return cols;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int g = lo; g <= hi; ++g) v.push_back(g);
  return v;
}

}  // namespace

void RunConfig::validate() const {
  if (structures.empty()) throw std::invalid_argument("no structures selected");
  if (g_min < 1 || g_max < g_min) throw std::invalid_argument("G range must satisfy 1 <= g-min <= g-max");
  if (!(good_threshold >= 0.0 && good_threshold < 1.0))
    throw std::invalid_argument("bad-point threshold must lie in [0, 1)");
  fit.validate();
}

Report run_sweep(const RunConfig& cfg) {
  cfg.validate();
  const CsvTable table = read_csv(cfg.input);
  const auto cols = cfg.columns.empty() ? feature_columns(table, cfg.label_column) : cfg.columns;
  const DataMatrix X = to_data_matrix(table, cols);
  std::optional<std::vector<std::string>> truth;
  if (cfg.label_column) truth = table.column(*cfg.label_column);

  SweepGrid grid{cfg.structures, range(cfg.g_min, cfg.g_max), cfg.fit, cfg.workers};
  const auto ranked = sweep(X, grid);
  Report r = build_report(X, ranked, cfg.good_threshold, truth);
  if (cfg.output) write_report(r, *cfg.output);
  if (cfg.plot) {
    if (X.cols() != 2) throw std::invalid_argument("--plot needs exactly two feature columns");
    emit_svg_scatter(X, r.labels, *cfg.plot);
  }
  return r;
}

void write_report(const Report& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << nlohmann::json(r).dump(2) << '\n';
}

Report read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return nlohmann::json::parse(in).get<Report>();
}

SyntheticSummary replicate_synthetic(std::uint64_t first_seed, int n_seeds, const FitConfig& cfg) {
  SyntheticSummary out;
  std::vector<double> recalls, aris;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(k);
    const auto sample = sample_scenario(eve_noise_scenario(seed));
    const auto& X = sample.data;
    const long n = static_cast<long>(X.rows());
    FitConfig run = cfg;
    run.seed = seed;

    SyntheticSeedResult res;
    res.seed = seed;
    const auto eve = fit(X, StructureId::EVE, 2, run);
    res.eve_loglik = eve.loglik();
    res.eve_bic = bic(eve.loglik(), count_free_params(StructureId::EVE, 2, X.cols()), n);

    const auto clusters = map_assign(eve.posteriors.Z);
    const auto bad = detect_bad(eve.posteriors.Z, eve.posteriors.V);
    int noise = 0, caught = 0;
    std::vector<int> truth_good, pred_good;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (sample.true_component[i] == 0) {
        ++noise;
        caught += bad[i] ? 1 : 0;
      } else {
        truth_good.push_back(sample.true_component[i]);
        pred_good.push_back(clusters[i]);
      }
    }
    res.noise_recall = noise ? static_cast<double>(caught) / noise : 1.0;
    res.good_ari = adjusted_rand_index(truth_good, pred_good);

    res.best_gpcm_bic = -std::numeric_limits<double>::infinity();
    for (auto s : kAllStructures) {
      for (int G : {2, 3}) {
        try {
          const auto g = init_from_gpcm(X, s, G, run);
          const double b = bic(g.loglik, count_free_params(s, G, X.cols(), false), n);
          if (b > res.best_gpcm_bic) {
            res.best_gpcm_bic = b;
            res.best_gpcm = std::string(to_string(s)) + "/" + std::to_string(G);
          }
        } catch (const std::runtime_error&) {
          // a failed Gaussian fit simply does not compete
        }
      }
    }
    res.eve_beats_gpcm = res.eve_bic > res.best_gpcm_bic;
    out.eve_wins += res.eve_beats_gpcm ? 1 : 0;
    recalls.push_back(res.noise_recall);
    aris.push_back(res.good_ari);
    out.seeds.push_back(res);
  }
  out.median_noise_recall = median(recalls);
  out.median_good_ari = median(aris);
  return out;
}

DataMatrix load_crabs(const CsvTable& table, std::vector<std::string>* sex) {
  CsvTable blue = table;
  if (std::find(table.header.begin(), table.header.end(), "sp") != table.header.end()) {
    const auto sp = table.column("sp");
    blue.rows.clear();
    blue.line_numbers.clear();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (sp[i] == "B") {
        blue.rows.push_back(table.rows[i]);
        blue.line_numbers.push_back(table.line_numbers[i]);
      }
    }
  }
  if (blue.rows.size() < 25) throw DataError("crab data needs at least 25 blue crabs");
  if (sex) *sex = blue.column("sex");
  return to_data_matrix(blue, {"RW", "CL"});
}

CrabSummary replicate_crabs(const CsvTable& table, const FitConfig& cfg, std::span<const double> values) {
  std::vector<std::string> sex;
  const DataMatrix base = load_crabs(table, &sex);
  const auto truth = encode_labels(sex).codes;
  constexpr Eigen::Index kRow = 24;  // 25th crab
  constexpr Eigen::Index kCl = 1;
  CrabSummary out;
  for (double value : values) {
    const DataMatrix X = perturb_observation(base, kRow, kCl, value);
    const auto res = fit(X, StructureId::VVV, 2, cfg);
    CrabRow row;
    row.value = value;
    const auto clusters = map_assign(res.posteriors.Z);
    const auto bad = detect_bad(res.posteriors.Z, res.posteriors.V);
    row.misallocated = misallocation_count(clusters, truth);
    row.eta_outlier_group = res.params.eta[static_cast<std::size_t>(clusters[kRow])];
    row.outlier_flagged_bad = bad[kRow];

    const auto init = init_from_gpcm(X, StructureId::VVV, 2, cfg);
    row.gpcm_misallocated = misallocation_count(map_assign(e_step(X, init.params).posteriors.Z), truth);
    out.rows.push_back(row);
  }
  return out;
}

Report replicate_wine(const CsvTable& table, const std::string& label_column, const FitConfig& cfg, unsigned workers) {
  const auto cols = feature_columns(table, label_column);
  const DataMatrix X = to_data_matrix(table, cols);
  const auto truth = table.column(label_column);
  SweepGrid grid{{kAllStructures.begin(), kAllStructures.end()}, {1, 2, 3, 4}, cfg, workers};
  const auto ranked = sweep(X, grid);
  Report r = build_report(X, ranked, kDefaultGoodThreshold, truth);

  nlohmann::json bad_by_class = nlohmann::json::object();
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    if (r.labels[i].is_bad) bad_by_class[truth[i]] = bad_by_class.value(truth[i], 0) + 1;
  r.statistics = {{"experiment", "wine"},
                  {"best_structure", r.best.structure},
                  {"best_G", r.best.G},
                  {"bad_count", r.bad_count},
                  {"bad_by_class", bad_by_class},
                  {"misallocated_merged", *r.misallocated_merged}};
  return r;
}

nlohmann::json summary_json(const SyntheticSummary& s) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : s.seeds)
    seeds.push_back({{"seed", r.seed},
                     {"noise_recall", r.noise_recall},
                     {"good_ari", r.good_ari},
                     {"eve_bic", r.eve_bic},
                     {"eve_loglik", r.eve_loglik},
                     {"best_gpcm", r.best_gpcm},
                     {"best_gpcm_bic", r.best_gpcm_bic},
                     {"eve_beats_gpcm", r.eve_beats_gpcm}});
  return {{"experiment", "synthetic-noise"},
          {"seeds", seeds},
          {"median_noise_recall", s.median_noise_recall},
          {"median_good_ari", s.median_good_ari},
          {"eve_wins", s.eve_wins}};
}

nlohmann::json summary_json(const CrabSummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"value", r.value},
                    {"gpcm_vvv_misallocated", r.gpcm_misallocated},
                    {"pmcgd_vvv_misallocated", r.misallocated},
                    {"eta_outlier_group", r.eta_outlier_group},
                    {"outlier_flagged_bad", r.outlier_flagged_bad}});
  return {{"experiment", "crabs"}, {"rows", rows}};
}

}  // namespace pmcgd
