// SPDX-License-Identifier: Apache-2.0
#include "ltrr/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ltrr {

TrainFreeHeuristic heuristic_from_string(const std::string& s) {
    if (s == "overall_sim") return TrainFreeHeuristic::overall_sim;
    if (s == "avg_sim") return TrainFreeHeuristic::avg_sim;
    if (s == "max_sim") return TrainFreeHeuristic::max_sim;
    if (s == "var_sim") return TrainFreeHeuristic::var_sim;
    if (s == "moran") return TrainFreeHeuristic::moran;
    throw std::invalid_argument("unknown train-free heuristic: " + s);
}

std::string to_string(TrainFreeHeuristic h) {
    switch (h) {
        case TrainFreeHeuristic::overall_sim: return "overall_sim";
        case TrainFreeHeuristic::avg_sim: return "avg_sim";
        case TrainFreeHeuristic::max_sim: return "max_sim";
        case TrainFreeHeuristic::var_sim: return "var_sim";
        case TrainFreeHeuristic::moran: return "moran";
    }
    throw std::logic_error("unreachable heuristic");
}

RoutingDecision route_train_free(TrainFreeHeuristic heuristic, const std::string& query_id,
                                 const std::map<std::string, PostFeatures>& features) {
    if (features.empty()) throw std::invalid_argument("route_train_free: no post features");
    auto value_of = [&](const PostFeatures& pf) {
        switch (heuristic) {
            case TrainFreeHeuristic::overall_sim: return pf.overall_sim;
            case TrainFreeHeuristic::avg_sim: return pf.avg_sim;
            case TrainFreeHeuristic::max_sim: return pf.max_sim;
            case TrainFreeHeuristic::var_sim: return -pf.var_sim;  // lower variance preferred
            case TrainFreeHeuristic::moran: return pf.moran;
        }
        throw std::logic_error("unreachable heuristic");
    };
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [rid, pf] : features) scored.emplace_back(rid, value_of(pf));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    RoutingDecision out;
    out.query_id = query_id;
    for (const auto& [rid, v] : scored) out.ranked_retriever_ids.push_back(rid);
    out.chosen_retriever_id = out.ranked_retriever_ids.front();
    return out;
}

RoutingDecision route_learned(const RouterModel& model, const std::string& query_id,
                              const std::vector<FeatureVector>& features) {
    std::unordered_map<std::string, bool> present;
    for (const auto& fv : features) present[fv.retriever_id] = true;
    for (const auto& rid : model.pool_ids) {
        if (!present.count(rid)) {
            throw std::invalid_argument("route_learned: missing pool option " + rid);
        }
    }
    Vec scores = score_retrievers(model, features);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return features[a].retriever_id < features[b].retriever_id;
    });
    RoutingDecision out;
    out.query_id = query_id;
    for (std::size_t i : order) out.ranked_retriever_ids.push_back(features[i].retriever_id);
    out.chosen_retriever_id = out.ranked_retriever_ids.front();
    return out;
}

RoutingDecision route_oracle(const std::vector<UtilityRecord>& label_row) {
    if (label_row.empty()) throw std::invalid_argument("route_oracle: empty label row");
    std::vector<const UtilityRecord*> order;
    for (const auto& rec : label_row) order.push_back(&rec);
    std::sort(order.begin(), order.end(), [](const UtilityRecord* a, const UtilityRecord* b) {
        if (a->utility != b->utility) return a->utility > b->utility;
        return a->retriever_id < b->retriever_id;
    });
    RoutingDecision out;
    out.query_id = label_row.front().query_id;
    for (const auto* rec : order) out.ranked_retriever_ids.push_back(rec->retriever_id);
    out.chosen_retriever_id = out.ranked_retriever_ids.front();
    return out;
}

std::pair<std::string, double> best_standard_baseline(const LabelMatrix& matrix,
                                                      const std::vector<std::string>& selection_ids,
                                                      const std::vector<std::string>& report_ids,
                                                      const std::string& noret_id) {
    if (selection_ids.empty() || report_ids.empty()) {
        throw std::invalid_argument("best_standard_baseline: empty split");
    }
    std::map<std::string, std::pair<double, int>> sums;  // retriever -> (sum, count)
    for (const auto& qid : selection_ids) {
        if (matrix.is_flagged(qid)) continue;
        for (const auto& rec : matrix.row(qid)) {
            if (rec.retriever_id == noret_id) continue;
            auto& [sum, count] = sums[rec.retriever_id];
            sum += rec.utility;
            ++count;
        }
    }
    if (sums.empty()) throw std::invalid_argument("best_standard_baseline: no usable rows");
    std::string best;
    double best_mean = -1.0;
    for (const auto& [rid, sc] : sums) {
        double mean = sc.first / static_cast<double>(sc.second);
        if (mean > best_mean) {  // map order makes ties pick the lowest id
            best_mean = mean;
            best = rid;
        }
    }
    double report_sum = 0.0;
    int report_count = 0;
    for (const auto& qid : report_ids) {
        if (matrix.is_flagged(qid)) continue;
        for (const auto& rec : matrix.row(qid)) {
            if (rec.retriever_id == best) {
                report_sum += rec.utility;
                ++report_count;
            }
        }
    }
    if (report_count == 0) throw std::invalid_argument("best_standard_baseline: empty report split");
    return {best, report_sum / static_cast<double>(report_count)};
}

PolicyEvaluation evaluate_policy(const std::vector<RoutingDecision>& decisions,
                                 const LabelMatrix& matrix,
                                 const std::vector<std::string>& test_ids) {
    std::unordered_map<std::string, const RoutingDecision*> by_query;
    for (const auto& d : decisions) by_query[d.query_id] = &d;
    std::unordered_map<std::string, bool> in_split;
    for (const auto& qid : test_ids) in_split[qid] = true;
    for (const auto& d : decisions) {
        if (!in_split.count(d.query_id)) {
            throw std::invalid_argument("evaluate_policy: decision for query outside the split: " +
                                        d.query_id);
        }
    }
    PolicyEvaluation out;
    for (const auto& qid : test_ids) {
        if (matrix.is_flagged(qid)) continue;
        auto it = by_query.find(qid);
        if (it == by_query.end()) {
            throw std::invalid_argument("evaluate_policy: no decision for query " + qid);
        }
        double utility = 0.0;
        bool found = false;
        for (const auto& rec : matrix.row(qid)) {
            if (rec.retriever_id == it->second->chosen_retriever_id) {
                utility = rec.utility;
                found = true;
            }
        }
        if (!found) {
            throw std::invalid_argument("evaluate_policy: chosen retriever missing from labels for " + qid);
        }
        out.per_query_utilities.push_back(utility);
    }
    if (out.per_query_utilities.empty()) {
        throw std::invalid_argument("evaluate_policy: empty split");
    }
    out.mean_utility = std::accumulate(out.per_query_utilities.begin(),
                                       out.per_query_utilities.end(), 0.0) /
                       static_cast<double>(out.per_query_utilities.size());
    return out;
}

WilcoxonResult wilcoxon_signed_rank(const Vec& x, const Vec& y) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("wilcoxon_signed_rank: inputs must be equal nonzero length");
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    WilcoxonResult res;
    res.n = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });
    Vec ranks(n, 0.0);
    std::vector<double> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mid;
        tie_sizes.push_back(static_cast<double>(j - i));
        i = j;
    }
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (diffs[i] > 0.0) w_plus += ranks[i];
    }
    res.statistic = w_plus;

    if (n <= 12) {
        // exact null distribution over 2^n sign assignments via subset-sum
        // counting on doubled (integer) ranks
        std::vector<long long> r2(n);
        long long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r2[i] = std::llround(2.0 * ranks[i]);
            total += r2[i];
        }
        std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
        counts[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (long long s = total; s >= r2[i]; --s) {
                counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r2[i])];
            }
        }
        double denom = std::pow(2.0, static_cast<double>(n));
        long long w2 = std::llround(2.0 * w_plus);
        double p_le = 0.0, p_ge = 0.0;
        for (long long s = 0; s <= total; ++s) {
            if (s <= w2) p_le += counts[static_cast<std::size_t>(s)];
            if (s >= w2) p_ge += counts[static_cast<std::size_t>(s)];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge) / denom);
        return res;
    }

    double dn = static_cast<double>(n);
    double mu = dn * (dn + 1.0) / 4.0;
    double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    for (double t : tie_sizes) var -= (t * t * t - t) / 48.0;
    if (var <= 0.0) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    double z = (w_plus - mu) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    return res;
}

double bonferroni(double p, int m) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("bonferroni: p must be in [0,1]");
    if (m < 1) throw std::invalid_argument("bonferroni: m must be >= 1");
    return std::min(1.0, static_cast<double>(m) * p);
}

double kendall_tau(const std::vector<std::string>& ranking_a,
                   const std::vector<std::string>& ranking_b) {
    if (ranking_a.size() != ranking_b.size() || ranking_a.size() < 2) {
        throw std::invalid_argument("kendall_tau: rankings must match and have >= 2 items");
    }
    std::unordered_map<std::string, std::size_t> pos_b;
    for (std::size_t i = 0; i < ranking_b.size(); ++i) pos_b[ranking_b[i]] = i;
    for (const auto& id : ranking_a) {
        if (!pos_b.count(id)) throw std::invalid_argument("kendall_tau: id mismatch: " + id);
    }
    if (pos_b.size() != ranking_b.size()) throw std::invalid_argument("kendall_tau: duplicate ids");
    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < ranking_a.size(); ++i) {
        for (std::size_t j = i + 1; j < ranking_a.size(); ++j) {
            if (pos_b[ranking_a[i]] < pos_b[ranking_a[j]]) ++concordant;
            else ++discordant;
        }
    }
    double n = static_cast<double>(ranking_a.size());
    return static_cast<double>(concordant - discordant) / (n * (n - 1.0) / 2.0);
}

EvalReport build_report(const std::vector<std::string>& split_names,
                        const std::vector<std::string>& policy_names,
                        const std::map<std::string, std::map<std::string, PolicyEvaluation>>& results,
                        const std::string& best_standard_name, double alpha, int m) {
    if (split_names.empty() || policy_names.empty()) {
        throw std::invalid_argument("build_report: empty input");
    }
    if (!std::count(policy_names.begin(), policy_names.end(), best_standard_name)) {
        throw std::invalid_argument("build_report: baseline policy missing: " + best_standard_name);
    }
    EvalReport report;
    report.split_names = split_names;
    report.alpha = alpha;
    int compared = static_cast<int>(policy_names.size()) - 1;  // everything but the baseline row
    report.bonferroni_m = m > 0 ? m : std::max(1, compared);

    for (const auto& policy : policy_names) {
        PolicyReport row;
        row.policy = policy;
        for (const auto& split : split_names) {
            const auto& eval = results.at(policy).at(split);
            const auto& base = results.at(best_standard_name).at(split);
            row.mean_by_split[split] = eval.mean_utility;
            if (policy == best_standard_name) {
                row.p_by_split[split] = 1.0;
                row.significant_by_split[split] = false;
                continue;
            }
            auto w = wilcoxon_signed_rank(eval.per_query_utilities, base.per_query_utilities);
            row.p_by_split[split] = w.p_value;
            double corrected = bonferroni(w.p_value, report.bonferroni_m);
            // one-sided marking: improvement over the baseline only
            row.significant_by_split[split] =
                eval.mean_utility > base.mean_utility && corrected < alpha && !w.degenerate;
        }
        report.policies.push_back(std::move(row));
    }
    return report;
}

std::string render_report_text(const EvalReport& report) {
    std::ostringstream out;
    const int name_w = 24, cell_w = 14;
    out << std::left << std::setw(name_w) << "policy";
    for (const auto& split : report.split_names) out << std::right << std::setw(cell_w) << split;
    out << '\n';
    out << std::string(static_cast<std::size_t>(name_w) +
                           report.split_names.size() * static_cast<std::size_t>(cell_w),
                       '-')
        << '\n';
    for (const auto& row : report.policies) {
        out << std::left << std::setw(name_w) << row.policy;
        for (const auto& split : report.split_names) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << row.mean_by_split.at(split);
            if (row.significant_by_split.at(split)) cell << '*';
            out << std::right << std::setw(cell_w) << cell.str();
        }
        out << '\n';
    }
    out << "\n* significant improvement over the best standard baseline"
        << " (paired Wilcoxon, Bonferroni m=" << report.bonferroni_m
        << ", alpha=" << report.alpha << ")\n";
    return out.str();
}

std::string render_report_tsv(const EvalReport& report) {
    std::ostringstream out;
    out << "policy";
    for (const auto& split : report.split_names) {
        out << '\t' << split << "\tp(" << split << ")\tsig(" << split << ")";
    }
    out << '\n';
    for (const auto& row : report.policies) {
        out << row.policy;
        for (const auto& split : report.split_names) {
            out << '\t' << std::setprecision(10) << row.mean_by_split.at(split) << '\t'
                << row.p_by_split.at(split) << '\t' << (row.significant_by_split.at(split) ? 1 : 0);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ltrr
