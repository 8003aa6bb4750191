// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ltrr/common.hpp"
#include "ltrr/features.hpp"
#include "ltrr/labels.hpp"
#include "ltrr/train.hpp"

namespace ltrr {

struct RoutingDecision {
    std::string query_id;
    std::string chosen_retriever_id;  // first of the ranking
    std::vector<std::string> ranked_retriever_ids;
};

enum class TrainFreeHeuristic { overall_sim, avg_sim, max_sim, var_sim, moran };

TrainFreeHeuristic heuristic_from_string(const std::string& s);
std::string to_string(TrainFreeHeuristic h);

/// Ranks retrievers by the named post-retrieval feature, descending, except
/// var_sim where lower is preferred. Ties break by retriever id ascending.
/// R_0 is excluded (it has no post features).
RoutingDecision route_train_free(TrainFreeHeuristic heuristic,
                                 const std::string& query_id,
                                 const std::map<std::string, PostFeatures>& features);

/// Ranking by model score descending, top-1 chosen; R_0 may win.
RoutingDecision route_learned(const RouterModel& model, const std::string& query_id,
                              const std::vector<FeatureVector>& features);

/// Argmax labeled utility; the routing upper bound.
RoutingDecision route_oracle(const std::vector<UtilityRecord>& label_row);

/// Single retriever (R_0 excluded) with the highest mean utility on the
/// selection ids; returns (retriever_id, mean utility over report_ids).
std::pair<std::string, double> best_standard_baseline(const LabelMatrix& matrix,
                                                      const std::vector<std::string>& selection_ids,
                                                      const std::vector<std::string>& report_ids,
                                                      const std::string& noret_id);

struct PolicyEvaluation {
    double mean_utility = 0.0;
    Vec per_query_utilities;  // in test-id order
};

/// Per-query utility of each decision's chosen retriever, averaged over the split.
PolicyEvaluation evaluate_policy(const std::vector<RoutingDecision>& decisions,
                                 const LabelMatrix& matrix,
                                 const std::vector<std::string>& test_ids);

struct WilcoxonResult {
    double statistic = 0.0;  // W+ (sum of positive ranks)
    double p_value = 1.0;
    bool degenerate = false;  // all differences zero
    int n = 0;                // nonzero differences
};

/// Paired two-sided test. Zero differences dropped, mid-rank ties; exact
/// distribution for n <= 12, normal approximation with tie correction above.
WilcoxonResult wilcoxon_signed_rank(const Vec& x, const Vec& y);

double bonferroni(double p, int m);

/// (concordant - discordant) / (n(n-1)/2) over two permutations of the same ids.
double kendall_tau(const std::vector<std::string>& ranking_a,
                   const std::vector<std::string>& ranking_b);

struct PolicyReport {
    std::string policy;
    std::map<std::string, double> mean_by_split;
    std::map<std::string, double> p_by_split;          // vs best-standard, uncorrected
    std::map<std::string, bool> significant_by_split;  // Bonferroni-corrected, one-sided marking
};

struct EvalReport {
    std::vector<std::string> split_names;
    std::vector<PolicyReport> policies;  // includes oracle and best-standard rows
    std::string metric;
    double alpha = 0.05;
    int bonferroni_m = 1;
    std::uint64_t config_fingerprint = 0;
};

/// Marks significance for policies whose mean exceeds best-standard with
/// Bonferroni-corrected Wilcoxon p < alpha. m defaults to the number of
/// compared policies when passed as 0.
EvalReport build_report(const std::vector<std::string>& split_names,
                        const std::vector<std::string>& policy_names,
                        const std::map<std::string, std::map<std::string, PolicyEvaluation>>& results,
                        const std::string& best_standard_name, double alpha, int m);

/// Fixed-width human-readable grid.
std::string render_report_text(const EvalReport& report);
/// Tab-delimited table.
std::string render_report_tsv(const EvalReport& report);

}  // namespace ltrr
