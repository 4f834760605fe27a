#include "skewmorph/classifier.hpp"
#include "skewmorph/errors.hpp"
#include "skewmorph/log.hpp"
#include "skewmorph/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace skewmorph {
namespace {

struct Encoded {
    std::vector<std::string> labels;
    std::vector<const std::vector<double>*> x;
    std::vector<std::uint32_t> y;
    std::size_t d = 0;
};

/// Canonical row order (label, then features) with labels mapped to sorted indices.
Encoded encode(const LabeledDataset& data) {
    Encoded e;
    e.d = data.dims();
    e.labels = data.label_set();
    std::vector<const LabeledRow*> rows;
    for (const LabeledRow& r : data.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const LabeledRow* a, const LabeledRow* b) {
        return a->label != b->label ? a->label < b->label : a->x < b->x;
    });
    for (const LabeledRow* r : rows) {
        e.x.push_back(&r->x);
        const auto it = std::lower_bound(e.labels.begin(), e.labels.end(), r->label);
        e.y.push_back(static_cast<std::uint32_t>(it - e.labels.begin()));
    }
    return e;
}

std::size_t argmax_low(std::span<const std::uint32_t> counts) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return best;
}

struct Split {
    bool found = false;
    double impurity = 0.0;
    std::int32_t feature = 0;
    double threshold = 0.0;

    bool better_than(const Split& o) const {
        if (!o.found) return true;
        if (impurity != o.impurity) return impurity < o.impurity;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const Encoded& e, const TrainConfig& cfg, std::size_t mtry, std::uint64_t seed)
        : e_(e), cfg_(cfg), mtry_(mtry), rng_(seed), k_(e.labels.size()) {}

    Tree build(std::vector<std::uint32_t> sample) {
        tree_.nodes.clear();
        grow(sample, 0);
        return std::move(tree_);
    }

private:
    double value(std::uint32_t row, std::size_t f) const { return (*e_.x[row])[f]; }

    static double gini_sum(std::span<const std::uint32_t> counts, std::uint32_t n) {
        // n * gini = n - sum(c^2) / n
        double sq = 0.0;
        for (std::uint32_t c : counts) sq += double(c) * double(c);
        return double(n) - sq / double(n);
    }

    Split best_on(std::span<const std::uint32_t> sample, std::size_t f, std::span<const std::uint32_t> total) {
        std::vector<std::uint32_t> order(sample.begin(), sample.end());
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return value(a, f) < value(b, f);
        });
        Split best;
        std::vector<std::uint32_t> left(k_, 0), right(total.begin(), total.end());
        const auto n = static_cast<std::uint32_t>(order.size());
        for (std::uint32_t i = 0; i + 1 < n; ++i) {
            ++left[e_.y[order[i]]];
            --right[e_.y[order[i]]];
            const double v = value(order[i], f);
            if (!(v < value(order[i + 1], f))) continue;
            Split s;
            s.found = true;
            s.impurity = gini_sum(left, i + 1) + gini_sum(right, n - i - 1);
            s.feature = static_cast<std::int32_t>(f);
            s.threshold = v;
            if (s.better_than(best)) best = s;
        }
        return best;
    }

    std::int32_t grow(std::span<const std::uint32_t> sample, int depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::vector<std::uint32_t> counts(k_, 0);
        for (std::uint32_t r : sample) ++counts[e_.y[r]];

        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
        if (pure || depth >= cfg_.max_depth || sample.size() < std::size_t(cfg_.min_samples_split)) {
            tree_.nodes[id].counts = std::move(counts);
            return id;
        }

        std::vector<std::size_t> features(e_.d);
        std::iota(features.begin(), features.end(), 0);
        std::shuffle(features.begin(), features.end(), rng_);
        Split best;
        for (std::size_t i = 0; i < features.size(); ++i) {
            // past the first mtry, keep looking only until some split exists
            if (i >= mtry_ && best.found) break;
            const Split s = best_on(sample, features[i], counts);
            if (s.found && s.better_than(best)) best = s;
        }
        if (!best.found) {
            tree_.nodes[id].counts = std::move(counts);
            return id;
        }

        std::vector<std::uint32_t> lo, hi;
        for (std::uint32_t r : sample) {
            (value(r, std::size_t(best.feature)) <= best.threshold ? lo : hi).push_back(r);
        }
        const std::int32_t l = grow(lo, depth + 1);
        const std::int32_t h = grow(hi, depth + 1);
        TreeNode& node = tree_.nodes[id];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = h;
        return id;
    }

    const Encoded& e_;
    const TrainConfig& cfg_;
    std::size_t mtry_;
    std::mt19937_64 rng_;
    std::size_t k_;
    Tree tree_;
};

std::size_t vote(const Forest& forest, std::span<const double> x) {
    std::vector<std::uint32_t> votes(forest.labels.size(), 0);
    for (const Tree& t : forest.trees) ++votes[t.predict_index(x)];
    return argmax_low(votes);
}

}  // namespace

void LabeledDataset::add(const FlowFeatureVector& features, std::string label) {
    rows.push_back({std::vector<double>(features.values.begin(), features.values.end()), std::move(label)});
}

void LabeledDataset::add(std::vector<double> x, std::string label) {
    rows.push_back({std::move(x), std::move(label)});
}

std::size_t LabeledDataset::dims() const {
    if (rows.empty()) {
        throw DomainError("dataset is empty");
    }
    const std::size_t d = rows.front().x.size();
    for (const LabeledRow& r : rows) {
        if (r.x.size() != d) {
            throw DomainError("dataset rows have different lengths");
        }
    }
    return d;
}

std::vector<std::string> LabeledDataset::label_set() const {
    std::vector<std::string> out;
    for (const LabeledRow& r : rows) out.push_back(r.label);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void TrainConfig::validate() const {
    if (n_trees < 1 || max_depth < 1 || min_samples_split < 2 || features_per_split < 0) {
        throw DomainError("invalid forest hyperparameters");
    }
}

std::size_t Tree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes[i].is_leaf()) {
            d[std::size_t(nodes[i].left)] = d[i] + 1;
            d[std::size_t(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::size_t Tree::predict_index(std::span<const double> x) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
        const TreeNode& n = nodes[at];
        at = std::size_t(x[std::size_t(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return argmax_low(nodes[at].counts);
}

Forest train_forest(const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const Encoded e = encode(data);
    if (e.d == 0) {
        throw DomainError("dataset has no features");
    }
    if (e.labels.size() < 2) {
        warn("training on a single label '" + e.labels.front() + "'; every prediction will be that label");
    }
    const std::size_t mtry = cfg.features_per_split > 0
                                 ? std::min<std::size_t>(std::size_t(cfg.features_per_split), e.d)
                                 : static_cast<std::size_t>(std::ceil(std::sqrt(double(e.d))));

    Forest forest;
    forest.config = cfg;
    forest.n_features = e.d;
    forest.labels = e.labels;

    const std::size_t n = e.y.size();
    std::vector<std::vector<std::uint32_t>> oob_votes(n, std::vector<std::uint32_t>(e.labels.size(), 0));
    for (int t = 0; t < cfg.n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(cfg.seed, std::uint64_t(t));
        std::mt19937_64 rng(tree_seed);
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
        std::vector<std::uint32_t> sample(n);
        std::vector<bool> in_bag(n, false);
        for (auto& s : sample) {
            s = pick(rng);
            in_bag[s] = true;
        }
        TreeBuilder builder(e, cfg, mtry, rng());
        forest.trees.push_back(builder.build(sample));
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_bag[i]) ++oob_votes[i][forest.trees.back().predict_index(*e.x[i])];
        }
    }

    std::size_t scored = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::accumulate(oob_votes[i].begin(), oob_votes[i].end(), 0u) == 0) continue;
        ++scored;
        correct += argmax_low(oob_votes[i]) == e.y[i];
    }
    if (scored > 0) {
        forest.oob_accuracy = double(correct) / double(scored);
    }
    return forest;
}

std::string predict(const Forest& forest, std::span<const double> x) {
    if (x.size() != forest.n_features) {
        throw DomainError("feature vector has " + std::to_string(x.size()) + " values, forest expects " +
                          std::to_string(forest.n_features));
    }
    if (forest.trees.empty()) {
        throw DomainError("forest has no trees");
    }
    return forest.labels[vote(forest, x)];
}

std::string predict(const Forest& forest, const FlowFeatureVector& x) {
    return predict(forest, std::span<const double>(x.values));
}

std::vector<double> kfold_cv(const LabeledDataset& data, const TrainConfig& cfg, int k) {
    if (k < 2) {
        throw DomainError("k-fold cross-validation needs k >= 2");
    }
    const Encoded e = encode(data);
    std::map<std::uint32_t, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < e.y.size(); ++i) by_label[e.y[i]].push_back(i);

    std::vector<int> fold(e.y.size(), 0);
    std::mt19937_64 rng(derive_seed(cfg.seed, std::string_view("kfold")));
    for (auto& [label, idx] : by_label) {
        if (idx.size() < std::size_t(k)) {
            throw DomainError("label '" + e.labels[label] + "' has fewer than " + std::to_string(k) + " rows");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = int(j % std::size_t(k));
    }

    std::vector<double> acc;
    for (int f = 0; f < k; ++f) {
        LabeledDataset train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < e.y.size(); ++i) {
            if (fold[i] == f) {
                test.push_back(i);
            } else {
                train.add(*e.x[i], e.labels[e.y[i]]);
            }
        }
        const Forest forest = train_forest(train, cfg);
        std::size_t correct = 0;
        for (std::size_t i : test) correct += predict(forest, *e.x[i]) == e.labels[e.y[i]];
        acc.push_back(double(correct) / double(test.size()));
    }
    return acc;
}

}  // namespace skewmorph
