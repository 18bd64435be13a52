#include "lml/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lml/errors.hpp"

namespace lml {

namespace {

double gini_from_counts(std::size_t n, std::size_t pos) {
    const double p1 = static_cast<double>(pos) / static_cast<double>(n);
    const double p0 = 1.0 - p1;
    return 1.0 - p1 * p1 - p0 * p0;
}

struct BestSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;
};

struct BuildItem {
    int node_id;
    std::size_t begin, end;  // range into the shared index array
    std::size_t depth;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, const TreeParams& params, Rng* rng)
        : x_(x), y_(y), params_(params), rng_(rng) {}

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        std::vector<TreeNode> nodes;
        nodes.emplace_back();
        std::vector<BuildItem> stack{{0, 0, rows.size(), 0}};
        while (!stack.empty()) {
            BuildItem item = stack.back();
            stack.pop_back();
            const std::size_t n = item.end - item.begin;
            std::size_t pos = 0;
            for (std::size_t i = item.begin; i < item.end; ++i)
                pos += y_[rows[i]];

            TreeNode& node = nodes[item.node_id];
            const bool depth_capped = params_.max_depth > 0 && item.depth >= params_.max_depth;
            if (pos == 0 || pos == n || n < params_.min_samples_split || depth_capped) {
                node.value = static_cast<double>(pos) / static_cast<double>(n);
                continue;
            }

            BestSplit best = find_best_split(rows, item.begin, item.end, n, pos);
            if (!best.found) {
                node.value = static_cast<double>(pos) / static_cast<double>(n);
                continue;
            }

            auto mid_it = std::partition(
                rows.begin() + item.begin, rows.begin() + item.end,
                [&](std::size_t r) { return x_(r, best.feature) <= best.threshold; });
            const std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());

            node.feature = static_cast<int>(best.feature);
            node.threshold = best.threshold;
            node.left = static_cast<int>(nodes.size());
            node.right = static_cast<int>(nodes.size() + 1);
            const int left_id = node.left, right_id = node.right;
            nodes.emplace_back();
            nodes.emplace_back();
            stack.push_back({right_id, mid, item.end, item.depth + 1});
            stack.push_back({left_id, item.begin, mid, item.depth + 1});
        }
        return nodes;
    }

private:
    BestSplit find_best_split(const std::vector<std::size_t>& rows, std::size_t begin,
                              std::size_t end, std::size_t n, std::size_t pos) {
        const std::size_t d = x_.cols();
        features_.clear();
        if (params_.max_features > 0 && params_.max_features < d && rng_ != nullptr) {
            // Partial Fisher-Yates draw of max_features distinct features,
            // then sorted so tie-breaking stays "lowest feature wins".
            pool_.resize(d);
            std::iota(pool_.begin(), pool_.end(), std::size_t{0});
            for (std::size_t i = 0; i < params_.max_features; ++i) {
                std::size_t j = i + static_cast<std::size_t>(rng_->bounded(d - i));
                std::swap(pool_[i], pool_[j]);
                features_.push_back(pool_[i]);
            }
            std::sort(features_.begin(), features_.end());
        } else {
            features_.resize(d);
            std::iota(features_.begin(), features_.end(), std::size_t{0});
        }

        const double parent_gini = gini_from_counts(n, pos);
        BestSplit best;
        scratch_.resize(n);
        for (std::size_t f : features_) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = rows[begin + i];
                scratch_[i] = {x_(r, f), y_[r]};
            }
            std::sort(scratch_.begin(), scratch_.end());
            std::size_t left_pos = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_pos += static_cast<std::size_t>(scratch_[i].second);
                if (scratch_[i + 1].first <= scratch_[i].first)
                    continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf)
                    continue;
                const double weighted =
                    (static_cast<double>(n_left) * gini_from_counts(n_left, left_pos) +
                     static_cast<double>(n_right) * gini_from_counts(n_right, pos - left_pos)) /
                    static_cast<double>(n);
                const double decrease = parent_gini - weighted;
                if (!best.found || decrease > best.decrease) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = (scratch_[i].first + scratch_[i + 1].first) / 2.0;
                    best.decrease = decrease;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    const TreeParams& params_;
    Rng* rng_;
    std::vector<std::pair<double, int>> scratch_;
    std::vector<std::size_t> features_;
    std::vector<std::size_t> pool_;
};

}  // namespace

DecisionTreeModel train_decision_tree_on_rows(const Matrix& x, const std::vector<int>& y,
                                              const std::vector<std::size_t>& rows,
                                              const TreeParams& params, Rng* rng) {
    if (rows.empty())
        throw PreconditionError("train_decision_tree: empty training set");
    if (x.rows() != y.size())
        throw ShapeError("train_decision_tree: feature rows and label count differ");
    for (std::size_t r : rows)
        if (y[r] != 0 && y[r] != 1)
            throw PreconditionError("train_decision_tree: labels must be binary, got " +
                                    std::to_string(y[r]));

    DecisionTreeModel model;
    model.n_features = x.cols();
    model.params = params;
    TreeBuilder builder(x, y, params, rng);
    model.nodes = builder.build(rows);
    return model;
}

DecisionTreeModel train_decision_tree(const Matrix& x, const std::vector<int>& y,
                                      const TreeParams& params, Rng* rng) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train_decision_tree_on_rows(x, y, rows, params, rng);
}

double tree_predict_row(const std::vector<TreeNode>& nodes, const double* row) {
    int at = 0;
    while (!nodes[at].is_leaf())
        at = row[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
}

std::vector<double> predict_proba(const DecisionTreeModel& model, const Matrix& x) {
    if (x.cols() != model.n_features)
        throw ShapeError("decision tree expects " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.cols()));
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        out[i] = tree_predict_row(model.nodes, x.row_ptr(i));
    return out;
}

}  // namespace lml
