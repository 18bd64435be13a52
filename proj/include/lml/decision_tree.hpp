#pragma once

#include <cstdint>
#include <vector>

#include "lml/matrix.hpp"
#include "lml/rng.hpp"

namespace lml {

// Binary tree node stored in a flat arena; nodes[0] is the root. For
// classification trees the leaf value is the positive-class fraction; for
// boosted regression trees it is an additive raw score.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    std::size_t max_features = 0;  // 0 = consider every feature
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;
    std::size_t n_features = 0;
    TreeParams params;
};

// Greedy CART with gini impurity. Splits sit at midpoints of consecutive
// distinct sorted values; ties break to the lowest feature index, then the
// smallest threshold. rng is only consumed when params.max_features

// restricts the candidate set.
DecisionTreeModel train_decision_tree(const Matrix& x, const std::vector<int>& y,
                                      const TreeParams& params = {}, Rng* rng = nullptr);

// Same tree induction over a caller-supplied row multiset (bootstrap support).
DecisionTreeModel train_decision_tree_on_rows(const Matrix& x, const std::vector<int>& y,
                                              const std::vector<std::size_t>& rows,
                                              const TreeParams& params, Rng* rng);

double tree_predict_row(const std::vector<TreeNode>& nodes, const double* row);

std::vector<double> predict_proba(const DecisionTreeModel& model, const Matrix& x);

}  // namespace lml
