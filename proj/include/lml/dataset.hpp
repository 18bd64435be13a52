#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lml/matrix.hpp"

namespace lml {

// Feature matrix plus binary labels. Labels may still contain the unlabeled
// sentinel before drop_unlabeled; afterwards they are {0,1}.
struct Dataset {
    Matrix features;          // N x d
    std::vector<int> labels;  // length N
    std::string name;

    std::size_t size() const { return features.rows(); }
    std::size_t feature_dim() const { return features.cols(); }
};

// Per-feature min/max, fitted on training data only.
struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t dim() const { return min.size(); }
};

struct SplitSpec {
    double train_fraction = 0.0;
    double test_fraction = 0.0;
    double holdout_fraction = 0.0;
    std::uint64_t seed = 0;
    bool stratified = false;  // optional; default mirrors plain shuffling
};

struct SplitResult {
    Dataset train;
    Dataset test;
    Dataset holdout;
};

// Desk-scale stand-in for the real feature corpora: class-conditional
// Gaussians on the informative columns, pure noise elsewhere, squashed
// into [0,1] by a logistic so downstream sigmoid outputs match the range.
struct SyntheticSpec {
    std::size_t n_samples = 0;
    std::size_t feature_dim = 0;
    std::size_t n_informative = 0;
    double class_separation = 1.0;
    double label_balance = 0.5;
};

inline constexpr int kUnlabeledSentinel = -1;

// Remove every row whose label equals the sentinel; survivor order preserved.
Dataset drop_unlabeled(const Dataset& ds, int sentinel = kUnlabeledSentinel);

ScalerParams fit_scaler(const Dataset& train);

// x' = (x - min)/(max - min), constant columns map to 0, output clamped to [0,1].
Dataset apply_scaler(const ScalerParams& params, const Dataset& ds);

// Seed-deterministic shuffle partitioned by fractions: train gets
// floor(N*train_fraction), test floor(N*test_fraction), holdout the rest.
SplitResult split(const Dataset& ds, const SplitSpec& spec);

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace lml
