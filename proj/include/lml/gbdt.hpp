#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "lml/decision_tree.hpp"
#include "lml/matrix.hpp"

namespace lml {

struct GbdtParams {
    std::size_t n_iterations = 100;
    double learning_rate = 0.1;
    std::size_t max_leaves = 31;
    std::size_t histogram_bins = 255;
    std::size_t min_samples_leaf = 20;
    double lambda_l2 = 1.0;
    std::uint64_t seed = 0;  // reserved for row/feature subsampling; unused at defaults
};

// Leaf-wise histogram gradient boosting with logistic loss. Trees are
// regression trees whose leaf values are raw additive scores:
// p(x) = sigmoid(initial_score + learning_rate * sum_t tree_t(x)).
struct GbdtModel {
    double initial_score = 0.0;
    std::vector<std::vector<TreeNode>> trees;
    GbdtParams params;
    std::size_t n_features = 0;
};

GbdtModel train_gbdt(const Matrix& x, const std::vector<int>& y, const GbdtParams& params = {});

// n_trees_limit truncates the ensemble (staged predictions for loss curves).
std::vector<double> predict_proba(const GbdtModel& model, const Matrix& x,
                                  std::size_t n_trees_limit =
                                      std::numeric_limits<std::size_t>::max());

}  // namespace lml
