#include "skewmorph/classifier.hpp"
#include "skewmorph/errors.hpp"

#include <json.hpp>

namespace skewmorph {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "skewmorph-forest";
constexpr int kVersion = 1;

}  // namespace

std::string serialize_forest(const Forest& forest) {
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["config"] = {{"n_trees", forest.config.n_trees},
                     {"max_depth", forest.config.max_depth},
                     {"min_samples_split", forest.config.min_samples_split},
                     {"features_per_split", forest.config.features_per_split},
                     {"seed", forest.config.seed}};
    doc["n_features"] = forest.n_features;
    doc["labels"] = forest.labels;
    doc["oob_accuracy"] = forest.oob_accuracy ? json(*forest.oob_accuracy) : json(nullptr);
    json trees = json::array();
    for (const Tree& t : forest.trees) {
        json feature = json::array(), threshold = json::array(), left = json::array(),
             right = json::array(), counts = json::array();
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            counts.push_back(n.counts);
        }
        trees.push_back({{"feature", feature},
                         {"threshold", threshold},
                         {"left", left},
                         {"right", right},
                         {"counts", counts}});
    }
    doc["trees"] = std::move(trees);
    return doc.dump() + "\n";
}

Forest deserialize_forest(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("forest document: ") + ex.what());
    }
    try {
        if (doc.at("format") != kFormat) {
            throw SchemaError("not a forest document");
        }
        if (doc.at("version") != kVersion) {
            throw SchemaError("unsupported forest version " + doc.at("version").dump());
        }
        Forest f;
        const json& c = doc.at("config");
        f.config.n_trees = c.at("n_trees").get<int>();
        f.config.max_depth = c.at("max_depth").get<int>();
        f.config.min_samples_split = c.at("min_samples_split").get<int>();
        f.config.features_per_split = c.at("features_per_split").get<int>();
        f.config.seed = c.at("seed").get<std::uint64_t>();
        f.n_features = doc.at("n_features").get<std::size_t>();
        f.labels = doc.at("labels").get<std::vector<std::string>>();
        if (!doc.at("oob_accuracy").is_null()) {
            f.oob_accuracy = doc.at("oob_accuracy").get<double>();
        }
        for (const json& t : doc.at("trees")) {
            const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto left = t.at("left").get<std::vector<std::int32_t>>();
            const auto right = t.at("right").get<std::vector<std::int32_t>>();
            const auto counts = t.at("counts").get<std::vector<std::vector<std::uint32_t>>>();
            const std::size_t n = feature.size();
            if (threshold.size() != n || left.size() != n || right.size() != n || counts.size() != n || n == 0) {
                throw SchemaError("tree node arrays have different lengths");
            }
            Tree tree;
            for (std::size_t i = 0; i < n; ++i) {
                TreeNode node{feature[i], threshold[i], left[i], right[i], counts[i]};
                if (node.is_leaf()) {
                    if (node.counts.size() != f.labels.size()) {
                        throw SchemaError("leaf counts do not match the label list");
                    }
                } else if (std::size_t(node.feature) >= f.n_features || node.left <= std::int32_t(i) ||
                           node.right <= std::int32_t(i) || std::size_t(node.left) >= n ||
                           std::size_t(node.right) >= n) {
                    throw SchemaError("tree node " + std::to_string(i) + " is malformed");
                }
                tree.nodes.push_back(std::move(node));
            }
            f.trees.push_back(std::move(tree));
        }
        return f;
    } catch (const json::exception& ex) {
        throw SchemaError(std::string("forest document: ") + ex.what());
    }
}

}  // namespace skewmorph
