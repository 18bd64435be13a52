#include "lml/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lml/errors.hpp"

namespace lml {

namespace {

double stable_sigmoid(double a) {
    if (a >= 0.0)
        return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

struct LeafState {
    int node_id = 0;
    std::vector<std::size_t> rows;
    double sum_g = 0.0, sum_h = 0.0;
    bool consumed = false;
    // best candidate boundary for this leaf
    bool has_split = false;
    double gain = 0.0;
    std::size_t feature = 0;
    std::size_t bin = 0;
    double threshold = 0.0;
    double left_g = 0.0, left_h = 0.0;
    std::size_t left_n = 0;
};

class GbdtTrainer {
public:
    GbdtTrainer(const Matrix& x, const std::vector<int>& y, const GbdtParams& params)
        : x_(x), y_(y), params_(params), n_(x.rows()), d_(x.cols()) {
        build_bins();
    }

    GbdtModel train() {
        GbdtModel model;
        model.params = params_;
        model.n_features = d_;

        double base_rate = 0.0;
        for (int label : y_)
            base_rate += label;
        base_rate /= static_cast<double>(n_);
        base_rate = std::clamp(base_rate, 1e-15, 1.0 - 1e-15);
        model.initial_score = std::log(base_rate / (1.0 - base_rate));

        std::vector<double> scores(n_, model.initial_score);
        grad_.resize(n_);
        hess_.resize(n_);
        for (std::size_t iter = 0; iter < params_.n_iterations; ++iter) {
            for (std::size_t i = 0; i < n_; ++i) {
                const double p = stable_sigmoid(scores[i]);
                grad_[i] = p - static_cast<double>(y_[i]);
                hess_[i] = p * (1.0 - p);
            }
            model.trees.push_back(grow_tree(scores));
        }
        return model;
    }

private:
    void build_bins() {
        cuts_.resize(d_);
        binned_.resize(n_ * d_);
        std::vector<double> sorted(n_);
        const std::size_t bins = params_.histogram_bins;
        for (std::size_t f = 0; f < d_; ++f) {
            for (std::size_t i = 0; i < n_; ++i)
                sorted[i] = x_(i, f);
            std::sort(sorted.begin(), sorted.end());
            auto& cuts = cuts_[f];
            // Equal-frequency cut points at the raw data values.
            for (std::size_t k = 1; k < bins; ++k) {
                const double v = sorted[(k * n_) / bins];
                if (cuts.empty() || v > cuts.back())
                    cuts.push_back(v);
            }
            if (cuts.empty())
                cuts.push_back(sorted.back());
            for (std::size_t i = 0; i < n_; ++i) {
                const auto it = std::lower_bound(cuts.begin(), cuts.end(), x_(i, f));
                binned_[i * d_ + f] = static_cast<std::uint16_t>(it - cuts.begin());
            }
        }
    }

    void find_best_split(LeafState& leaf) {
        leaf.has_split = false;
        if (leaf.rows.size() < 2 * params_.min_samples_leaf)
            return;
        const double lambda = params_.lambda_l2;
        const double parent_score =
            leaf.sum_g * leaf.sum_g / (leaf.sum_h + lambda);
        for (std::size_t f = 0; f < d_; ++f) {
            const std::size_t nb = cuts_[f].size() + 1;
            hist_g_.assign(nb, 0.0);
            hist_h_.assign(nb, 0.0);
            hist_n_.assign(nb, 0);
            for (std::size_t r : leaf.rows) {
                const std::uint16_t b = binned_[r * d_ + f];
                hist_g_[b] += grad_[r];
                hist_h_[b] += hess_[r];
                hist_n_[b] += 1;
            }
            double gl = 0.0, hl = 0.0;
            std::size_t nl = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                gl += hist_g_[b];
                hl += hist_h_[b];
                nl += hist_n_[b];
                const std::size_t nr = leaf.rows.size() - nl;
                if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf)
                    continue;
                const double gr = leaf.sum_g - gl;
                const double hr = leaf.sum_h - hl;
                const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                           parent_score);
                if (!leaf.has_split || gain > leaf.gain) {
                    leaf.has_split = true;
                    leaf.gain = gain;
                    leaf.feature = f;
                    leaf.bin = b;
                    leaf.threshold = cuts_[f][b];
                    leaf.left_g = gl;
                    leaf.left_h = hl;
                    leaf.left_n = nl;
                }
            }
        }
    }

    std::vector<TreeNode> grow_tree(std::vector<double>& scores) {
        std::vector<TreeNode> nodes(1);
        std::vector<LeafState> leaves;
        {
            LeafState root;
            root.node_id = 0;
            root.rows.resize(n_);
            for (std::size_t i = 0; i < n_; ++i)
                root.rows[i] = i;
            for (std::size_t i = 0; i < n_; ++i) {
                root.sum_g += grad_[i];
                root.sum_h += hess_[i];
            }
            find_best_split(root);
            leaves.push_back(std::move(root));
        }
        std::size_t n_leaves = 1;
        while (n_leaves < params_.max_leaves) {
            // Earliest-created leaf wins gain ties.
            std::size_t best = leaves.size();
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (leaves[i].consumed || !leaves[i].has_split || leaves[i].gain <= 0.0)
                    continue;
                if (best == leaves.size() || leaves[i].gain > leaves[best].gain)
                    best = i;
            }
            if (best == leaves.size())
                break;

            LeafState& parent = leaves[best];
            parent.consumed = true;
            TreeNode& node = nodes[parent.node_id];
            node.feature = static_cast<int>(parent.feature);
            node.threshold = parent.threshold;
            node.left = static_cast<int>(nodes.size());
            node.right = static_cast<int>(nodes.size() + 1);
            nodes.emplace_back();
            nodes.emplace_back();

            LeafState left, right;
            left.node_id = node.left;
            right.node_id = node.right;
            left.rows.reserve(parent.left_n);
            right.rows.reserve(parent.rows.size() - parent.left_n);
            for (std::size_t r : parent.rows) {
                if (binned_[r * d_ + parent.feature] <= parent.bin)
                    left.rows.push_back(r);
                else
                    right.rows.push_back(r);
            }
            parent.rows.clear();
            parent.rows.shrink_to_fit();
            left.sum_g = parent.left_g;
            left.sum_h = parent.left_h;
            right.sum_g = parent.sum_g - parent.left_g;
            right.sum_h = parent.sum_h - parent.left_h;
            find_best_split(left);
            find_best_split(right);
            leaves.push_back(std::move(left));
            leaves.push_back(std::move(right));
            ++n_leaves;
        }

        const double lambda = params_.lambda_l2;
        for (const LeafState& leaf : leaves) {
            if (leaf.consumed)
                continue;
            const double value = -leaf.sum_g / (leaf.sum_h + lambda);
            nodes[leaf.node_id].value = value;
            for (std::size_t r : leaf.rows)
                scores[r] += params_.learning_rate * value;
        }
        return nodes;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    const GbdtParams& params_;
    const std::size_t n_, d_;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::uint16_t> binned_;
    std::vector<double> grad_, hess_;
    std::vector<double> hist_g_, hist_h_;
    std::vector<std::size_t> hist_n_;
};

}  // namespace

GbdtModel train_gbdt(const Matrix& x, const std::vector<int>& y, const GbdtParams& params) {
    if (x.rows() == 0)
        throw PreconditionError("train_gbdt: empty training set");
    if (x.rows() != y.size())
        throw ShapeError("train_gbdt: feature rows and label count differ");
    for (int label : y)
        if (label != 0 && label != 1)
            throw PreconditionError("train_gbdt: labels must be binary, got " +
                                    std::to_string(label));
    if (params.histogram_bins < 2 || params.histogram_bins > 65535)
        throw PreconditionError("train_gbdt: histogram_bins out of range");
    if (params.max_leaves < 2)
        throw PreconditionError("train_gbdt: max_leaves must be at least 2");

    GbdtTrainer trainer(x, y, params);
    return trainer.train();
}

std::vector<double> predict_proba(const GbdtModel& model, const Matrix& x,
                                  std::size_t n_trees_limit) {
    if (x.cols() != model.n_features)
        throw ShapeError("gbdt expects " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.cols()));
    const std::size_t used = std::min(n_trees_limit, model.trees.size());
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double score = model.initial_score;
        for (std::size_t t = 0; t < used; ++t)
            score += model.params.learning_rate * tree_predict_row(model.trees[t], x.row_ptr(i));
        out[i] = stable_sigmoid(score);
    }
    return out;
}

}  // namespace lml
