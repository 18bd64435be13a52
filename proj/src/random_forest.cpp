#include "lml/random_forest.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lml/errors.hpp"
#include "lml/rng.hpp"

namespace lml {

RandomForestModel train_random_forest(const Matrix& x, const std::vector<int>& y,
                                      const ForestParams& params) {
    if (x.rows() == 0)
        throw PreconditionError("train_random_forest: empty training set");
    if (params.n_trees == 0)
        throw PreconditionError("train_random_forest: n_trees must be positive");

    RandomForestModel model;
    model.params = params;
    model.n_features = x.cols();

    std::size_t max_features = params.max_features;
    if (max_features == 0)
        max_features = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));

    TreeParams tree_params;
    tree_params.max_features = max_features;

    const std::size_t n = x.rows();
    model.trees.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng(Rng::derive(params.seed, t));
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            for (auto& r : rows)
                r = static_cast<std::size_t>(rng.bounded(n));
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model.trees.push_back(train_decision_tree_on_rows(x, y, rows, tree_params, &rng));
    }
    return model;
}

std::vector<double> predict_proba(const RandomForestModel& model, const Matrix& x) {
    if (x.cols() != model.n_features)
        throw ShapeError("random forest expects " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.cols()));
    std::vector<double> out(x.rows(), 0.0);
    for (const auto& tree : model.trees)
        for (std::size_t i = 0; i < x.rows(); ++i)
            out[i] += tree_predict_row(tree.nodes, x.row_ptr(i));
    const double inv = 1.0 / static_cast<double>(model.trees.size());
    for (double& v : out)
        v *= inv;
    return out;
}

}  // namespace lml
