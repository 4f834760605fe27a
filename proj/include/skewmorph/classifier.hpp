#pragma once

#include "skewmorph/trace_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skewmorph {

struct LabeledRow {
    std::vector<double> x;
    std::string label;

    bool operator==(const LabeledRow&) const = default;
};

struct LabeledDataset {
    std::vector<LabeledRow> rows;

    void add(const FlowFeatureVector& features, std::string label);
    void add(std::vector<double> x, std::string label);

    /// Feature count; throws DomainError if rows disagree.
    std::size_t dims() const;
    /// Distinct labels, sorted.
    std::vector<std::string> label_set() const;
};

struct TrainConfig {
    int n_trees = 100;
    int max_depth = 32;
    int min_samples_split = 2;
    /// 0 means ceil(sqrt(d)).
    int features_per_split = 0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// Internal nodes send x[feature] <= threshold to `left`. Leaves have feature == -1
/// and hold per-label training counts.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::uint32_t> counts;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at 0

    std::size_t depth() const;
    /// Index into the forest's label list.
    std::size_t predict_index(std::span<const double> x) const;
    bool operator==(const Tree&) const = default;
};

struct Forest {
    TrainConfig config;
    std::size_t n_features = 0;
    std::vector<std::string> labels;  // sorted
    std::vector<Tree> trees;
    std::optional<double> oob_accuracy;

    bool operator==(const Forest&) const = default;
};

/// Bagged Gini trees. Rows are put in a canonical order first, so the result
/// depends only on the multiset of rows and the seed.
Forest train_forest(const LabeledDataset& data, const TrainConfig& cfg);

/// Majority vote of the trees; ties go to the smallest label.
std::string predict(const Forest& forest, std::span<const double> x);
std::string predict(const Forest& forest, const FlowFeatureVector& x);

/// Stratified k-fold accuracies, in fold order.
std::vector<double> kfold_cv(const LabeledDataset& data, const TrainConfig& cfg, int k);

std::string serialize_forest(const Forest& forest);
Forest deserialize_forest(std::string_view text);

}  // namespace skewmorph
