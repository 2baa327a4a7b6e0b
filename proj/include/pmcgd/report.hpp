#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmcgd/classification.hpp"
#include "pmcgd/data.hpp"
#include "pmcgd/model_selection.hpp"

namespace pmcgd {

struct ModelSummary {
  std::string structure;
  int G = 0;
  long m = 0;
  double bic = 0.0;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;

  bool operator==(const ModelSummary&) const = default;
};

struct FailureSummary {
  std::string structure;
  int G = 0;
  std::string error;

  bool operator==(const FailureSummary&) const = default;
};

struct ComponentEstimate {
  double pi = 0.0;
  double alpha = 0.0;
  std::vector<double> mu;
  std::vector<std::vector<double>> sigma;
  double eta = 0.0;

  bool operator==(const ComponentEstimate&) const = default;
};

struct Report {
  ModelSummary best;
  std::vector<ModelSummary> ranking;
  std::vector<FailureSummary> failures;
  std::vector<ObservationLabel> labels;
  std::vector<ComponentEstimate> components;
  long bad_count = 0;
  std::optional<ConfusionTable> merged_confusion;
  std::optional<ConfusionTable> separated_confusion;
  std::optional<long> misallocated_merged;
  std::optional<long> misallocated_good_only;
  std::vector<std::string> warnings;
  nlohmann::json statistics = nlohmann::json::object();  // experiment-specific extras

  bool operator==(const Report&) const = default;
};

// Labels, estimates and (when truth is given) confusion tables for the
// best-ranked model.
Report build_report(const DataMatrix& X, const RankedResults& ranked, double good_threshold,
                    const std::optional<std::vector<std::string>>& truth = std::nullopt);

void to_json(nlohmann::json& j, const ModelSummary& m);
void from_json(const nlohmann::json& j, ModelSummary& m);
void to_json(nlohmann::json& j, const FailureSummary& f);
void from_json(const nlohmann::json& j, FailureSummary& f);
void to_json(nlohmann::json& j, const ComponentEstimate& c);
void from_json(const nlohmann::json& j, ComponentEstimate& c);
void to_json(nlohmann::json& j, const ObservationLabel& l);
void from_json(const nlohmann::json& j, ObservationLabel& l);
void to_json(nlohmann::json& j, const ConfusionTable& t);
void from_json(const nlohmann::json& j, ConfusionTable& t);
void to_json(nlohmann::json& j, const Report& r);
void from_json(const nlohmann::json& j, Report& r);

}  // namespace pmcgd
