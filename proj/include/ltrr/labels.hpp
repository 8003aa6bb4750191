// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ltrr/common.hpp"
#include "ltrr/corpus.hpp"
#include "ltrr/retrieval.hpp"

namespace ltrr {

enum class UtilityMetric { token_f1, exact_match, context_recall };

UtilityMetric utility_metric_from_string(const std::string& s);
std::string to_string(UtilityMetric m);

/// String utility in [0,1]. token_f1: harmonic mean of token precision and
/// recall. exact_match: 1 iff normalized token sequences are equal.
/// context_recall: fraction of gold-answer tokens present in the candidate
/// text (the simulated-generator oracle).
double utility_metric(const std::string& prediction_or_context, const std::string& gold_answer,
                      UtilityMetric metric);

/// Utility gain relative to the no-retrieval baseline.
double compute_delta(double utility_i, double utility_noret);

/// (d - min)/(max - min); degenerate all-equal rows map to 0.5.
Vec min_max_normalize(const Vec& deltas);

struct UtilityRecord {
    std::string query_id;
    std::string retriever_id;
    double utility = 0.0;
    double delta = 0.0;
    double delta_norm = 0.0;
    bool absent = false;  // retrieval failed for this cell
};

struct LabelMatrix {
    // insertion order = query order; each row covers the whole pool
    std::vector<std::string> query_ids;
    std::map<std::string, std::vector<UtilityRecord>> rows;
    std::vector<std::string> flagged_query_ids;  // excluded from training

    const std::vector<UtilityRecord>& row(const std::string& query_id) const;
    bool is_flagged(const std::string& query_id) const;
};

/// Runs every pool retriever on every query, scores utilities with the given
/// metric (the no-retrieval utility comes from the query's no_ret_utility
/// field, default 0), computes deltas and per-query min-max normalization
/// with the R_0 delta = 0 included in the normalization set.
LabelMatrix build_label_matrix(const std::vector<QueryRecord>& queries, const RetrieverPool& pool,
                               int k, UtilityMetric metric);

/// Recomputes delta/delta_norm for a row whose utilities were changed in place.
void renormalize_row(std::vector<UtilityRecord>& row, const std::string& noret_id);

void write_labels(const LabelMatrix& matrix, const std::string& path);
void write_labels(const LabelMatrix& matrix, std::ostream& out);
LabelMatrix read_labels(const std::string& path);

}  // namespace ltrr
