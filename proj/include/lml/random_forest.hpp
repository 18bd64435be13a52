#pragma once

#include <cstdint>
#include <vector>

#include "lml/decision_tree.hpp"
#include "lml/matrix.hpp"

namespace lml {

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;  // 0 = floor(sqrt(d))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;
    ForestParams params;
    std::size_t n_features = 0;
};

// Bagged CART ensemble. Tree t draws its bootstrap sample and feature
// subsets from a stream derived as Rng::derive(seed, t), so training order
// is immaterial.
RandomForestModel train_random_forest(const Matrix& x, const std::vector<int>& y,
                                      const ForestParams& params = {});

// Mean of member-tree leaf values.
std::vector<double> predict_proba(const RandomForestModel& model, const Matrix& x);

}  // namespace lml
