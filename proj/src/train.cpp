// SPDX-License-Identifier: Apache-2.0
#include "ltrr/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

namespace ltrr {

namespace {

constexpr double kLossSlack = 1e-12;

double softplus(double x) {
    // log(1 + exp(x)), stable for large |x|
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t post_offset(const TrainSample& s) {
    if (s.features.size() < kPostFeatureCount) {
        throw std::invalid_argument("train: feature vector shorter than the post block");
    }
    return s.features.size() - kPostFeatureCount;
}

double linear_score(const LinearScorer& scorer, const TrainSample& s) {
    double acc = scorer.bias;
    std::size_t off = post_offset(s);
    bool learned = s.is_noret && !scorer.noret_vector.empty();
    for (std::size_t i = 0; i < s.features.size(); ++i) {
        double x = (learned && i >= off) ? scorer.noret_vector[i - off] : s.features[i];
        acc += scorer.weights[i] * x;
    }
    return acc;
}

struct LinearGrad {
    Vec weights;
    double bias = 0.0;
    Vec noret;
};

/// Adds d(score)/d(params) * coeff for one sample.
void accumulate_score_grad(const LinearScorer& scorer, const TrainSample& s, double coeff,
                           LinearGrad& grad) {
    std::size_t off = post_offset(s);
    bool learned = s.is_noret && !scorer.noret_vector.empty();
    for (std::size_t i = 0; i < s.features.size(); ++i) {
        double x = (learned && i >= off) ? scorer.noret_vector[i - off] : s.features[i];
        grad.weights[i] += coeff * x;
    }
    grad.bias += coeff;
    if (learned) {
        for (std::size_t i = 0; i < scorer.noret_vector.size(); ++i) {
            grad.noret[i] += coeff * scorer.weights[off + i];
        }
    }
}

/// Full-batch gradient descent with backtracking line search; the recorded
/// loss history is non-increasing by construction.
void gradient_descent(LinearScorer& scorer, const TrainConfig& cfg,
                      const std::function<double(const LinearScorer&)>& loss_fn,
                      const std::function<LinearGrad(const LinearScorer&)>& grad_fn,
                      Vec& history) {
    double loss = loss_fn(scorer);
    history.push_back(loss);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LinearGrad grad = grad_fn(scorer);
        double step = cfg.learning_rate;
        LinearScorer best = scorer;
        double best_loss = loss;
        for (int attempt = 0; attempt < 50; ++attempt) {
            LinearScorer trial = scorer;
            for (std::size_t i = 0; i < trial.weights.size(); ++i) {
                trial.weights[i] -= step * grad.weights[i];
            }
            trial.bias -= step * grad.bias;
            for (std::size_t i = 0; i < trial.noret_vector.size(); ++i) {
                trial.noret_vector[i] -= step * grad.noret[i];
            }
            double trial_loss = loss_fn(trial);
            if (trial_loss <= best_loss + kLossSlack) {
                best = std::move(trial);
                best_loss = trial_loss;
                break;
            }
            step *= 0.5;
        }
        scorer = std::move(best);
        loss = std::min(best_loss, loss);
        history.push_back(loss);
    }
}

void fit_tree_node(RegressionTree& tree, int node_idx, const std::vector<Vec>& X, const Vec& y,
                   std::vector<std::size_t> idx, int depth) {
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_idx)];
    double mean = 0.0;
    for (std::size_t i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());
    node.value = mean;
    if (depth <= 0 || idx.size() < 2) return;

    double base_sse = 0.0;
    for (std::size_t i : idx) base_sse += (y[i] - mean) * (y[i] - mean);
    if (base_sse == 0.0) return;

    const std::size_t n_features = X.front().size();
    int best_feature = -1;
    double best_threshold = 0.0, best_sse = base_sse;
    for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<std::size_t> order = idx;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (X[a][f] != X[b][f]) return X[a][f] < X[b][f];
            return a < b;
        });
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (std::size_t i : order) {
            total_sum += y[i];
            total_sq += y[i] * y[i];
        }
        for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
            double yi = y[order[pos]];
            left_sum += yi;
            left_sq += yi * yi;
            double xv = X[order[pos]][f];
            double xn = X[order[pos + 1]][f];
            if (xv == xn) continue;
            double nl = static_cast<double>(pos + 1);
            double nr = static_cast<double>(order.size()) - nl;
            double sse = (left_sq - left_sum * left_sum / nl) +
                         ((total_sq - left_sq) - (total_sum - left_sum) * (total_sum - left_sum) / nr);
            if (sse < best_sse - 1e-12) {
                best_sse = sse;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (xv + xn);
            }
        }
    }
    if (best_feature < 0) return;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
        if (X[i][static_cast<std::size_t>(best_feature)] <= best_threshold) left_idx.push_back(i);
        else right_idx.push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return;

    int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    // re-fetch: emplace_back may have reallocated
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(node_idx)];
    parent.feature = best_feature;
    parent.threshold = best_threshold;
    parent.left = left;
    parent.right = right;
    fit_tree_node(tree, left, X, y, std::move(left_idx), depth - 1);
    fit_tree_node(tree, right, X, y, std::move(right_idx), depth - 1);
}

RegressionTree fit_tree(const std::vector<Vec>& X, const Vec& y, int depth) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    fit_tree_node(tree, 0, X, y, std::move(idx), depth);
    return tree;
}

struct PairRef {
    std::size_t winner;
    std::size_t loser;
};

/// Flattens groups into a sample list plus index pairs (winner, loser).
struct PairData {
    std::vector<const TrainSample*> samples;
    std::vector<PairRef> pairs;
};

PairData collect_pairs(const std::vector<QueryGroup>& groups) {
    PairData data;
    for (const auto& group : groups) {
        std::size_t base = data.samples.size();
        for (const auto& s : group.samples) data.samples.push_back(&s);
        for (std::size_t i = 0; i < group.samples.size(); ++i) {
            for (std::size_t j = 0; j < group.samples.size(); ++j) {
                if (group.samples[i].delta > group.samples[j].delta) {
                    data.pairs.push_back({base + i, base + j});
                }
            }
        }
    }
    return data;
}

void check_groups(const std::vector<QueryGroup>& groups) {
    if (groups.empty()) throw std::invalid_argument("train: no training rows");
    std::size_t len = groups.front().samples.empty() ? 0 : groups.front().samples.front().features.size();
    for (const auto& g : groups) {
        for (const auto& s : g.samples) {
            if (s.features.size() != len) {
                throw std::invalid_argument("train: inconsistent feature lengths");
            }
        }
    }
    if (len == 0) throw std::invalid_argument("train: empty feature vectors");
}

LinearScorer init_linear(const std::vector<QueryGroup>& groups, bool learnable_noret) {
    LinearScorer scorer;
    const auto& first = groups.front().samples.front();
    scorer.weights.assign(first.features.size(), 0.0);
    if (learnable_noret) {
        // initialized to the training medians carried by the R_0 samples
        for (const auto& g : groups) {
            for (const auto& s : g.samples) {
                if (s.is_noret) {
                    std::size_t off = post_offset(s);
                    scorer.noret_vector.assign(s.features.begin() + static_cast<std::ptrdiff_t>(off),
                                               s.features.end());
                    return scorer;
                }
            }
        }
    }
    return scorer;
}

}  // namespace

void TrainConfig::validate() const {
    if (loss_family != "pointwise" && loss_family != "pairwise" && loss_family != "listwise") {
        throw std::invalid_argument("unknown loss family: " + loss_family);
    }
    if (learner != "linear" && learner != "gbrt") {
        throw std::invalid_argument("unknown learner: " + learner);
    }
    if (loss_family == "listwise" && learner != "linear") {
        throw std::invalid_argument("listwise training supports the linear learner only");
    }
    if (epochs <= 0 || rounds <= 0 || learning_rate <= 0.0 || tree_depth <= 0) {
        throw std::invalid_argument("train config: counts and rates must be positive");
    }
    if (ridge_lambda < 0.0) throw std::invalid_argument("train config: ridge_lambda must be >= 0");
}

double RegressionTree::predict(const Vec& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

double TreeEnsembleScorer::predict(const Vec& x) const {
    double acc = base_score;
    for (const auto& t : trees) acc += t.predict(x);
    return acc;
}

std::vector<QueryGroup> assemble_groups(const std::vector<FeatureVector>& features,
                                        const LabelMatrix& labels, const PostBlock& medians,
                                        const std::vector<std::string>& query_ids) {
    std::map<std::string, std::map<std::string, const FeatureVector*>> by_query;
    for (const auto& fv : features) by_query[fv.query_id][fv.retriever_id] = &fv;

    std::vector<std::string> wanted = query_ids.empty() ? labels.query_ids : query_ids;
    std::vector<QueryGroup> groups;
    for (const auto& qid : wanted) {
        if (labels.is_flagged(qid)) continue;
        auto fit = by_query.find(qid);
        if (fit == by_query.end()) continue;
        QueryGroup group;
        group.query_id = qid;
        bool complete = true;
        for (const auto& rec : labels.row(qid)) {
            auto it = fit->second.find(rec.retriever_id);
            if (it == fit->second.end()) {
                complete = false;
                break;
            }
            TrainSample s;
            s.retriever_id = rec.retriever_id;
            s.is_noret = !it->second->post.has_value();
            s.features = flatten_features(*it->second, medians);
            s.delta = rec.delta;
            s.delta_norm = rec.delta_norm;
            group.samples.push_back(std::move(s));
        }
        if (complete && !group.samples.empty()) groups.push_back(std::move(group));
    }
    return groups;
}

std::vector<std::pair<std::string, std::string>> build_pairs(
    const std::vector<UtilityRecord>& label_row) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : label_row) {
        for (const auto& b : label_row) {
            if (a.delta > b.delta) pairs.emplace_back(a.retriever_id, b.retriever_id);
        }
    }
    return pairs;
}

RouterModel train_pointwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg) {
    check_groups(groups);
    RouterModel model;
    model.loss_family = "pointwise";
    model.learner = cfg.learner;

    std::vector<Vec> X;
    Vec y;
    for (const auto& g : groups) {
        for (const auto& s : g.samples) {
            X.push_back(s.features);
            y.push_back(s.delta_norm);
        }
    }
    const auto n = static_cast<Eigen::Index>(X.size());
    const auto d = static_cast<Eigen::Index>(X.front().size());

    if (cfg.learner == "linear") {
        // closed-form ridge on the bias-augmented system; the bias column is unregularized
        Eigen::MatrixXd A(n, d + 1);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) A(i, j) = X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            A(i, d) = 1.0;
            b(i) = y[static_cast<std::size_t>(i)];
        }
        Eigen::VectorXd w;
        if (cfg.ridge_lambda > 0.0) {
            Eigen::MatrixXd normal = A.transpose() * A;
            for (Eigen::Index j = 0; j < d; ++j) normal(j, j) += cfg.ridge_lambda;
            w = normal.ldlt().solve(A.transpose() * b);
        } else {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
            if (qr.rank() < d + 1) {
                throw std::runtime_error(
                    "train_pointwise: singular system; set ridge_lambda > 0");
            }
            w = qr.solve(b);
        }
        model.linear.weights.assign(w.data(), w.data() + d);
        model.linear.bias = w(d);
        double mse = (A * w - b).squaredNorm() / static_cast<double>(n);
        model.loss_history.push_back(mse);
        return model;
    }

    // gbrt on squared loss
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    model.ensemble.base_score = mean;
    Vec pred(y.size(), mean);
    auto mse = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
        return s / static_cast<double>(y.size());
    };
    model.loss_history.push_back(mse());
    for (int round = 0; round < cfg.rounds; ++round) {
        Vec residual(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - pred[i];
        RegressionTree tree = fit_tree(X, residual, cfg.tree_depth);
        for (auto& node : tree.nodes) node.value *= cfg.learning_rate;
        for (std::size_t i = 0; i < y.size(); ++i) pred[i] += tree.predict(X[i]);
        model.ensemble.trees.push_back(std::move(tree));
        model.loss_history.push_back(mse());
    }
    return model;
}

RouterModel train_pairwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg) {
    check_groups(groups);
    PairData data = collect_pairs(groups);
    if (data.pairs.empty()) throw std::invalid_argument("train_pairwise: no pairs (all labels tied)");

    RouterModel model;
    model.loss_family = "pairwise";
    model.learner = cfg.learner;

    if (cfg.learner == "linear") {
        model.linear = init_linear(groups, /*learnable_noret=*/true);
        auto loss_fn = [&](const LinearScorer& s) {
            double loss = 0.0;
            Vec scores(data.samples.size());
            for (std::size_t i = 0; i < data.samples.size(); ++i) {
                scores[i] = linear_score(s, *data.samples[i]);
            }
            for (const auto& p : data.pairs) loss += softplus(scores[p.loser] - scores[p.winner]);
            return loss / static_cast<double>(data.pairs.size());
        };
        auto grad_fn = [&](const LinearScorer& s) {
            LinearGrad grad;
            grad.weights.assign(s.weights.size(), 0.0);
            grad.noret.assign(s.noret_vector.size(), 0.0);
            Vec scores(data.samples.size());
            for (std::size_t i = 0; i < data.samples.size(); ++i) {
                scores[i] = linear_score(s, *data.samples[i]);
            }
            Vec coeff(data.samples.size(), 0.0);
            for (const auto& p : data.pairs) {
                double c = -sigmoid(scores[p.loser] - scores[p.winner]);
                coeff[p.winner] += c;
                coeff[p.loser] -= c;
            }
            double scale = 1.0 / static_cast<double>(data.pairs.size());
            for (std::size_t i = 0; i < data.samples.size(); ++i) {
                if (coeff[i] != 0.0) accumulate_score_grad(s, *data.samples[i], coeff[i] * scale, grad);
            }
            return grad;
        };
        gradient_descent(model.linear, cfg, loss_fn, grad_fn, model.loss_history);
        return model;
    }

    // gbrt on the logistic surrogate's pseudo-gradients
    std::vector<Vec> X;
    X.reserve(data.samples.size());
    for (const auto* s : data.samples) X.push_back(s->features);
    model.ensemble.base_score = 0.0;
    Vec pred(X.size(), 0.0);
    auto pair_loss = [&](const Vec& scores) {
        double loss = 0.0;
        for (const auto& p : data.pairs) loss += softplus(scores[p.loser] - scores[p.winner]);
        return loss / static_cast<double>(data.pairs.size());
    };
    double loss = pair_loss(pred);
    model.loss_history.push_back(loss);
    for (int round = 0; round < cfg.rounds; ++round) {
        Vec target(X.size(), 0.0);
        for (const auto& p : data.pairs) {
            double c = sigmoid(pred[p.loser] - pred[p.winner]);
            target[p.winner] += c;
            target[p.loser] -= c;
        }
        RegressionTree tree = fit_tree(X, target, cfg.tree_depth);
        // backtracking on the shrinkage so the surrogate never increases
        Vec delta(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) delta[i] = tree.predict(X[i]);
        double step = cfg.learning_rate;
        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Vec trial(X.size());
            for (std::size_t i = 0; i < X.size(); ++i) trial[i] = pred[i] + step * delta[i];
            double trial_loss = pair_loss(trial);
            if (trial_loss <= loss + kLossSlack) {
                pred = std::move(trial);
                loss = std::min(trial_loss, loss);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) step = 0.0;
        for (auto& node : tree.nodes) node.value *= step;
        model.ensemble.trees.push_back(std::move(tree));
        model.loss_history.push_back(loss);
    }
    return model;
}

namespace {

Vec group_softmax(const Vec& v) {
    double mx = *std::max_element(v.begin(), v.end());
    Vec out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

}  // namespace

double listwise_loss(const LinearScorer& scorer, const std::vector<QueryGroup>& groups) {
    double loss = 0.0;
    for (const auto& g : groups) {
        Vec labels, scores;
        for (const auto& sample : g.samples) {
            labels.push_back(sample.delta_norm);
            scores.push_back(linear_score(scorer, sample));
        }
        Vec p = group_softmax(labels), q = group_softmax(scores);
        for (std::size_t i = 0; i < p.size(); ++i) loss -= p[i] * std::log(std::max(q[i], 1e-300));
    }
    return loss;
}

LinearScorer listwise_loss_gradient(const LinearScorer& scorer,
                                    const std::vector<QueryGroup>& groups) {
    LinearGrad grad;
    grad.weights.assign(scorer.weights.size(), 0.0);
    grad.noret.assign(scorer.noret_vector.size(), 0.0);
    for (const auto& g : groups) {
        Vec labels, scores;
        for (const auto& sample : g.samples) {
            labels.push_back(sample.delta_norm);
            scores.push_back(linear_score(scorer, sample));
        }
        Vec p = group_softmax(labels), q = group_softmax(scores);
        for (std::size_t i = 0; i < g.samples.size(); ++i) {
            accumulate_score_grad(scorer, g.samples[i], q[i] - p[i], grad);
        }
    }
    LinearScorer packed;
    packed.weights = std::move(grad.weights);
    packed.bias = grad.bias;
    packed.noret_vector = std::move(grad.noret);
    return packed;
}

RouterModel train_listwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg) {
    check_groups(groups);
    RouterModel model;
    model.loss_family = "listwise";
    model.learner = "linear";
    model.linear = init_linear(groups, /*learnable_noret=*/true);

    auto loss_fn = [&](const LinearScorer& s) { return listwise_loss(s, groups); };
    auto grad_fn = [&](const LinearScorer& s) {
        LinearScorer packed = listwise_loss_gradient(s, groups);
        LinearGrad grad;
        grad.weights = std::move(packed.weights);
        grad.bias = packed.bias;
        grad.noret = std::move(packed.noret_vector);
        return grad;
    };
    gradient_descent(model.linear, cfg, loss_fn, grad_fn, model.loss_history);
    return model;
}

RouterModel train_router(const std::vector<QueryGroup>& groups, const TrainConfig& cfg,
                         const PcaModel& pca, const PostBlock& medians,
                         const std::vector<std::string>& pool_ids, const std::string& noret_id,
                         std::uint64_t config_fingerprint) {
    cfg.validate();
    RouterModel model;
    if (cfg.loss_family == "pointwise") model = train_pointwise(groups, cfg);
    else if (cfg.loss_family == "pairwise") model = train_pairwise(groups, cfg);
    else model = train_listwise(groups, cfg);
    model.pca = pca;
    model.medians = medians;
    model.pool_ids = pool_ids;
    model.noret_id = noret_id;
    model.config_fingerprint = config_fingerprint;
    for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
        if (model.loss_history[i] > model.loss_history[i - 1] + 1e-9) {
            throw std::logic_error("train: loss increased across steps");
        }
    }
    return model;
}

double score_sample(const RouterModel& model, const TrainSample& sample) {
    if (model.is_linear()) {
        if (sample.features.size() != model.linear.weights.size()) {
            throw std::invalid_argument("score: expected feature length " +
                                        std::to_string(model.linear.weights.size()) + ", got " +
                                        std::to_string(sample.features.size()));
        }
        return linear_score(model.linear, sample);
    }
    return model.ensemble.predict(sample.features);
}

Vec score_retrievers(const RouterModel& model, const std::vector<FeatureVector>& features) {
    std::size_t expected = feature_length(model.pca);
    Vec out;
    out.reserve(features.size());
    for (const auto& fv : features) {
        TrainSample s;
        s.retriever_id = fv.retriever_id;
        s.is_noret = !fv.post.has_value();
        s.features = flatten_features(fv, model.medians);
        if (s.features.size() != expected) {
            throw std::invalid_argument("score_retrievers: expected feature length " +
                                        std::to_string(expected) + ", got " +
                                        std::to_string(s.features.size()));
        }
        out.push_back(score_sample(model, s));
    }
    return out;
}

namespace {

nlohmann::ordered_json tree_to_json(const RegressionTree& tree) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
    }
    return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
    RegressionTree tree;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        tree.nodes.push_back(node);
    }
    return tree;
}

}  // namespace

void save_model(const RouterModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["version"] = model.version;
    j["loss_family"] = model.loss_family;
    j["learner"] = model.learner;
    if (model.is_linear()) {
        j["weights"] = model.linear.weights;
        j["bias"] = model.linear.bias;
        if (!model.linear.noret_vector.empty()) j["noret_vector"] = model.linear.noret_vector;
    } else {
        nlohmann::ordered_json trees = nlohmann::ordered_json::array();
        for (const auto& t : model.ensemble.trees) trees.push_back(tree_to_json(t));
        j["trees"] = trees;
        j["base_score"] = model.ensemble.base_score;
    }
    j["medians"] = model.medians;
    j["pca"] = {{"mean", model.pca.mean}, {"basis", model.pca.basis}, {"r", model.pca.r}};
    j["pool_ids"] = model.pool_ids;
    j["noret_id"] = model.noret_id;
    j["config_fingerprint"] = model.config_fingerprint;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

RouterModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("load_model: cannot parse " + path);
    }
    RouterModel model;
    int version = j.at("version").get<int>();
    if (version != model.version) {
        throw std::runtime_error("load_model: file version " + std::to_string(version) +
                                 " does not match supported version " +
                                 std::to_string(model.version));
    }
    model.loss_family = j.at("loss_family").get<std::string>();
    model.learner = j.at("learner").get<std::string>();
    if (model.is_linear()) {
        model.linear.weights = j.at("weights").get<Vec>();
        model.linear.bias = j.at("bias").get<double>();
        if (j.contains("noret_vector")) model.linear.noret_vector = j.at("noret_vector").get<Vec>();
    } else {
        for (const auto& t : j.at("trees")) model.ensemble.trees.push_back(tree_from_json(t));
        model.ensemble.base_score = j.at("base_score").get<double>();
    }
    auto medians = j.at("medians").get<Vec>();
    if (medians.size() != model.medians.size()) throw std::runtime_error("load_model: bad medians block");
    std::copy(medians.begin(), medians.end(), model.medians.begin());
    model.pca.mean = j.at("pca").at("mean").get<Vec>();
    model.pca.basis = j.at("pca").at("basis").get<std::vector<Vec>>();
    model.pca.r = j.at("pca").at("r").get<int>();
    model.pool_ids = j.at("pool_ids").get<std::vector<std::string>>();
    model.noret_id = j.at("noret_id").get<std::string>();
    model.config_fingerprint = j.at("config_fingerprint").get<std::uint64_t>();
    return model;
}

}  // namespace ltrr
