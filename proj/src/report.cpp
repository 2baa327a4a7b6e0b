#include "pmcgd/report.hpp"

namespace pmcgd {

namespace {

ModelSummary summarize(const RankedEntry& e) {
  return {std::string(to_string(e.structure)), e.G, e.m, e.bic, e.fit.loglik(), e.fit.converged, e.fit.iterations};
}

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
  else j[key] = nullptr;
}

template <typename T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
  else v.reset();
}

}  // namespace

Report build_report(const DataMatrix& X, const RankedResults& ranked, double good_threshold,
                    const std::optional<std::vector<std::string>>& truth) {
  Report r;
  const auto& best = ranked.best();
  r.best = summarize(best);
  for (const auto& e : ranked.entries) r.ranking.push_back(summarize(e));
  for (const auto& f : ranked.failures) r.failures.push_back({std::string(to_string(f.structure)), f.G, f.error});

  const auto& post = best.fit.posteriors;
  r.labels = label_observations(X, post.Z, post.V, good_threshold);
  for (const auto& l : r.labels) r.bad_count += l.is_bad ? 1 : 0;

  const auto& psi = best.fit.params;
  for (std::size_t g = 0; g < psi.G(); ++g) {
    ComponentEstimate c{psi.pi[g], psi.alpha[g], {}, {}, psi.eta[g]};
    c.mu.assign(psi.mu[g].data(), psi.mu[g].data() + psi.mu[g].size());
    const Eigen::MatrixXd s = psi.sigma[g].matrix();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(s.cols()));
      for (Eigen::Index k = 0; k < s.cols(); ++k) row[static_cast<std::size_t>(k)] = s(i, k);
      c.sigma.push_back(std::move(row));
    }
    r.components.push_back(std::move(c));
  }

  if (truth) {
    const auto enc = encode_labels(*truth);
    std::vector<int> clusters;
    std::vector<bool> bad;
    for (const auto& l : r.labels) {
      clusters.push_back(l.cluster - 1);
      bad.push_back(l.is_bad);
    }
    r.merged_confusion = merged_confusion(enc, clusters, best.G);
    r.separated_confusion = separated_confusion(enc, clusters, bad, best.G);
    r.misallocated_merged = misallocation_count(clusters, enc.codes, bad, MisallocationMode::Merged);
    r.misallocated_good_only = misallocation_count(clusters, enc.codes, bad, MisallocationMode::GoodOnly);
  }
  r.warnings = best.fit.warnings;
  return r;
}

void to_json(nlohmann::json& j, const ModelSummary& m) {
  j = {{"structure", m.structure}, {"G", m.G},           {"m", m.m},
       {"bic", m.bic},             {"loglik", m.loglik}, {"converged", m.converged},
       {"iterations", m.iterations}};
}

void from_json(const nlohmann::json& j, ModelSummary& m) {
  j.at("structure").get_to(m.structure);
  j.at("G").get_to(m.G);
  j.at("m").get_to(m.m);
  j.at("bic").get_to(m.bic);
  j.at("loglik").get_to(m.loglik);
  j.at("converged").get_to(m.converged);
  j.at("iterations").get_to(m.iterations);
}

void to_json(nlohmann::json& j, const FailureSummary& f) {
  j = {{"structure", f.structure}, {"G", f.G}, {"error", f.error}};
}

void from_json(const nlohmann::json& j, FailureSummary& f) {
  j.at("structure").get_to(f.structure);
  j.at("G").get_to(f.G);
  j.at("error").get_to(f.error);
}

void to_json(nlohmann::json& j, const ComponentEstimate& c) {
  j = {{"pi", c.pi}, {"alpha", c.alpha}, {"mu", c.mu}, {"sigma", c.sigma}, {"eta", c.eta}};
}

void from_json(const nlohmann::json& j, ComponentEstimate& c) {
  j.at("pi").get_to(c.pi);
  j.at("alpha").get_to(c.alpha);
  j.at("mu").get_to(c.mu);
  j.at("sigma").get_to(c.sigma);
  j.at("eta").get_to(c.eta);
}

void to_json(nlohmann::json& j, const ObservationLabel& l) {
  j = {{"row_id", l.row_id}, {"cluster", l.cluster}, {"is_bad", l.is_bad}, {"z_max", l.z_max}, {"v_at_map", l.v_at_map}};
}

void from_json(const nlohmann::json& j, ObservationLabel& l) {
  j.at("row_id").get_to(l.row_id);
  j.at("cluster").get_to(l.cluster);
  j.at("is_bad").get_to(l.is_bad);
  j.at("z_max").get_to(l.z_max);
  j.at("v_at_map").get_to(l.v_at_map);
}

void to_json(nlohmann::json& j, const ConfusionTable& t) {
  j = {{"rows", t.row_labels}, {"columns", t.col_labels}, {"counts", t.counts}};
}

void from_json(const nlohmann::json& j, ConfusionTable& t) {
  j.at("rows").get_to(t.row_labels);
  j.at("columns").get_to(t.col_labels);
  j.at("counts").get_to(t.counts);
}

void to_json(nlohmann::json& j, const Report& r) {
  j = {{"best", r.best},
       {"ranking", r.ranking},
       {"failures", r.failures},
       {"labels", r.labels},
       {"components", r.components},
       {"bad_count", r.bad_count},
       {"warnings", r.warnings},
       {"statistics", r.statistics}};
  put_optional(j, "merged_confusion", r.merged_confusion);
  put_optional(j, "separated_confusion", r.separated_confusion);
  put_optional(j, "misallocated_merged", r.misallocated_merged);
  put_optional(j, "misallocated_good_only", r.misallocated_good_only);
}

void from_json(const nlohmann::json& j, Report& r) {
  j.at("best").get_to(r.best);
  j.at("ranking").get_to(r.ranking);
  j.at("failures").get_to(r.failures);
  j.at("labels").get_to(r.labels);
  j.at("components").get_to(r.components);
  j.at("bad_count").get_to(r.bad_count);
  j.at("warnings").get_to(r.warnings);
  r.statistics = j.value("statistics", nlohmann::json::object());
  get_optional(j, "merged_confusion", r.merged_confusion);
  get_optional(j, "separated_confusion", r.separated_confusion);
  get_optional(j, "misallocated_merged", r.misallocated_merged);
  get_optional(j, "misallocated_good_only", r.misallocated_good_only);
}

}  // namespace pmcgd
