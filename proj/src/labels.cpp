// SPDX-License-Identifier: Apache-2.0
#include "ltrr/labels.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ltrr {

UtilityMetric utility_metric_from_string(const std::string& s) {
    if (s == "token_f1") return UtilityMetric::token_f1;
    if (s == "exact_match") return UtilityMetric::exact_match;
    if (s == "context_recall") return UtilityMetric::context_recall;
    throw std::invalid_argument("unknown utility metric: " + s);
}

std::string to_string(UtilityMetric m) {
    switch (m) {
        case UtilityMetric::token_f1: return "token_f1";
        case UtilityMetric::exact_match: return "exact_match";
        case UtilityMetric::context_recall: return "context_recall";
    }
    throw std::logic_error("unreachable metric");
}

double utility_metric(const std::string& prediction_or_context, const std::string& gold_answer,
                      UtilityMetric metric) {
    if (gold_answer.empty()) throw std::invalid_argument("utility_metric: empty gold answer");
    auto pred_tokens = tokenize(prediction_or_context);
    auto gold_tokens = tokenize(gold_answer);
    switch (metric) {
        case UtilityMetric::exact_match:
            return pred_tokens == gold_tokens ? 1.0 : 0.0;
        case UtilityMetric::token_f1: {
            if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;
            std::unordered_map<std::string, int> gold_counts;
            for (const auto& t : gold_tokens) ++gold_counts[t];
            int overlap = 0;
            for (const auto& t : pred_tokens) {
                auto it = gold_counts.find(t);
                if (it != gold_counts.end() && it->second > 0) {
                    --it->second;
                    ++overlap;
                }
            }
            if (overlap == 0) return 0.0;
            double precision = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
            double recall = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
            return 2.0 * precision * recall / (precision + recall);
        }
        case UtilityMetric::context_recall: {
            if (gold_tokens.empty()) return 0.0;
            std::unordered_set<std::string> context(pred_tokens.begin(), pred_tokens.end());
            int hit = 0;
            for (const auto& t : gold_tokens) {
                if (context.count(t)) ++hit;
            }
            return static_cast<double>(hit) / static_cast<double>(gold_tokens.size());
        }
    }
    throw std::logic_error("unreachable metric");
}

double compute_delta(double utility_i, double utility_noret) { return utility_i - utility_noret; }

Vec min_max_normalize(const Vec& deltas) {
    if (deltas.empty()) throw std::invalid_argument("min_max_normalize: empty input");
    double lo = *std::min_element(deltas.begin(), deltas.end());
    double hi = *std::max_element(deltas.begin(), deltas.end());
    Vec out(deltas.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) out[i] = (deltas[i] - lo) / (hi - lo);
    return out;
}

const std::vector<UtilityRecord>& LabelMatrix::row(const std::string& query_id) const {
    auto it = rows.find(query_id);
    if (it == rows.end()) throw std::invalid_argument("no label row for query " + query_id);
    return it->second;
}

bool LabelMatrix::is_flagged(const std::string& query_id) const {
    return std::find(flagged_query_ids.begin(), flagged_query_ids.end(), query_id) !=
           flagged_query_ids.end();
}

void renormalize_row(std::vector<UtilityRecord>& row, const std::string& noret_id) {
    double noret_utility = 0.0;
    for (const auto& rec : row) {
        if (rec.retriever_id == noret_id) noret_utility = rec.utility;
    }
    Vec deltas;
    deltas.reserve(row.size());
    for (auto& rec : row) {
        rec.delta = rec.retriever_id == noret_id ? 0.0 : compute_delta(rec.utility, noret_utility);
        deltas.push_back(rec.delta);
    }
    Vec norm = min_max_normalize(deltas);
    for (std::size_t i = 0; i < row.size(); ++i) row[i].delta_norm = norm[i];
}

LabelMatrix build_label_matrix(const std::vector<QueryRecord>& queries, const RetrieverPool& pool,
                               int k, UtilityMetric metric) {
    if (pool.noret_id().empty()) {
        throw std::invalid_argument("build_label_matrix: pool must include the no-retrieval option");
    }
    LabelMatrix matrix;
    for (const auto& query : queries) {
        std::vector<UtilityRecord> row;
        bool flagged = false;
        double noret_utility = query.no_ret_utility.value_or(0.0);
        for (const auto& rid : pool.ids()) {
            UtilityRecord rec;
            rec.query_id = query.id;
            rec.retriever_id = rid;
            if (rid == pool.noret_id()) {
                rec.utility = noret_utility;
            } else {
                try {
                    RankedList list = pool.retrieve(rid, query.text, k);
                    std::string context;
                    for (const auto& item : list.items) {
                        context += pool.document_text(item.doc_id);
                        context += ' ';
                    }
                    rec.utility = utility_metric(context, query.gold_answer, metric);
                } catch (const std::exception&) {
                    rec.absent = true;
                    flagged = true;
                }
            }
            row.push_back(std::move(rec));
        }
        if (!flagged) renormalize_row(row, pool.noret_id());
        else matrix.flagged_query_ids.push_back(query.id);
        matrix.query_ids.push_back(query.id);
        matrix.rows.emplace(query.id, std::move(row));
    }
    return matrix;
}

void write_labels(const LabelMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    write_labels(matrix, out);
}

void write_labels(const LabelMatrix& matrix, std::ostream& out) {
    for (const auto& qid : matrix.query_ids) {
        for (const auto& rec : matrix.row(qid)) {
            nlohmann::ordered_json j;
            j["query_id"] = rec.query_id;
            j["retriever_id"] = rec.retriever_id;
            j["utility"] = rec.utility;
            j["delta"] = rec.delta;
            j["delta_norm"] = rec.delta_norm;
            if (rec.absent) j["absent"] = true;
            out << j.dump() << '\n';
        }
    }
}

LabelMatrix read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    LabelMatrix matrix;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.contains("artifact")) continue;  // pipeline header record
        UtilityRecord rec;
        rec.query_id = j.at("query_id").get<std::string>();
        rec.retriever_id = j.at("retriever_id").get<std::string>();
        rec.utility = j.at("utility").get<double>();
        rec.delta = j.at("delta").get<double>();
        rec.delta_norm = j.at("delta_norm").get<double>();
        rec.absent = j.value("absent", false);
        auto it = matrix.rows.find(rec.query_id);
        if (it == matrix.rows.end()) {
            matrix.query_ids.push_back(rec.query_id);
            it = matrix.rows.emplace(rec.query_id, std::vector<UtilityRecord>{}).first;
        }
        if (rec.absent && !matrix.is_flagged(rec.query_id)) {
            matrix.flagged_query_ids.push_back(rec.query_id);
        }
        it->second.push_back(std::move(rec));
    }
    return matrix;
}

}  // namespace ltrr
