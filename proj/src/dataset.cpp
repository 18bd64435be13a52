#include "lml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lml/errors.hpp"
#include "lml/rng.hpp"

namespace lml {

Dataset drop_unlabeled(const Dataset& ds, int sentinel) {
    std::vector<std::size_t> keep;
    keep.reserve(ds.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] != sentinel)
            keep.push_back(i);

    Dataset out;
    out.name = ds.name;
    out.features = Matrix(keep.size(), ds.feature_dim());
    out.labels.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const double* src = ds.features.row_ptr(keep[r]);
        std::copy(src, src + ds.feature_dim(), out.features.row_ptr(r));
        out.labels.push_back(ds.labels[keep[r]]);
    }
    return out;
}

ScalerParams fit_scaler(const Dataset& train) {
    if (train.size() == 0 || train.feature_dim() == 0)
        throw PreconditionError("fit_scaler: empty training set");
    const std::size_t d = train.feature_dim();
    ScalerParams params;
    params.min.assign(train.features.row_ptr(0), train.features.row_ptr(0) + d);
    params.max = params.min;
    for (std::size_t i = 1; i < train.size(); ++i) {
        const double* row = train.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            params.min[j] = std::min(params.min[j], row[j]);
            params.max[j] = std::max(params.max[j], row[j]);
        }
    }
    return params;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& ds) {
    if (ds.feature_dim() != params.dim())
        throw ShapeError("apply_scaler: dataset has " + std::to_string(ds.feature_dim()) +
                         " features, scaler expects " + std::to_string(params.dim()));
    Dataset out = ds;
    const std::size_t d = params.dim();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double* row = out.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double range = params.max[j] - params.min[j];
            double v = range > 0.0 ? (row[j] - params.min[j]) / range : 0.0;
            row[j] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

namespace {

void validate_split_spec(const SplitSpec& spec) {
    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_unit(spec.train_fraction) || !in_unit(spec.test_fraction) ||
        !in_unit(spec.holdout_fraction))
        throw PreconditionError("split: fractions must lie in [0,1]");
    const double sum = spec.train_fraction + spec.test_fraction + spec.holdout_fraction;
    if (std::fabs(sum - 1.0) > 1e-9)
        throw PreconditionError("split: fractions sum to " + std::to_string(sum) +
                                ", expected 1.0");
}

Dataset gather_rows(const Dataset& ds, const std::vector<std::size_t>& idx, std::size_t begin,
                    std::size_t end) {
    Dataset out;
    out.name = ds.name;
    out.features = Matrix(end - begin, ds.feature_dim());
    out.labels.reserve(end - begin);
    for (std::size_t r = begin; r < end; ++r) {
        const double* src = ds.features.row_ptr(idx[r]);
        std::copy(src, src + ds.feature_dim(), out.features.row_ptr(r - begin));
        out.labels.push_back(ds.labels[idx[r]]);
    }
    return out;
}

}  // namespace

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
    validate_split_spec(spec);
    const std::size_t n = ds.size();
    if (n < 3)
        throw PreconditionError("split: need at least 3 rows, got " + std::to_string(n));

    Rng rng(spec.seed);
    std::vector<std::size_t> order;
    if (spec.stratified) {
        // Permute within each class, allocate fractions per class.
        std::vector<std::size_t> by_class[2];
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
            int y = ds.labels[i];
            if (y == 0 || y == 1)
                by_class[y].push_back(i);
            else
                rest.push_back(i);
        }
        rng.shuffle(by_class[0]);
        rng.shuffle(by_class[1]);
        rng.shuffle(rest);
        std::vector<std::size_t> trains, tests, holds;
        for (auto* group : {&by_class[0], &by_class[1], &rest}) {
            const std::size_t gn = group->size();
            const std::size_t gt = static_cast<std::size_t>(gn * spec.train_fraction);
            const std::size_t gs = static_cast<std::size_t>(gn * spec.test_fraction);
            trains.insert(trains.end(), group->begin(), group->begin() + gt);
            tests.insert(tests.end(), group->begin() + gt, group->begin() + gt + gs);
            holds.insert(holds.end(), group->begin() + gt + gs, group->end());
        }
        order = trains;
        order.insert(order.end(), tests.begin(), tests.end());
        order.insert(order.end(), holds.begin(), holds.end());
        SplitResult res;
        res.train = gather_rows(ds, order, 0, trains.size());
        res.test = gather_rows(ds, order, trains.size(), trains.size() + tests.size());
        res.holdout = gather_rows(ds, order, trains.size() + tests.size(), order.size());
        return res;
    }

    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const std::size_t n_train = static_cast<std::size_t>(n * spec.train_fraction);
    const std::size_t n_test = static_cast<std::size_t>(n * spec.test_fraction);
    SplitResult res;
    res.train = gather_rows(ds, order, 0, n_train);
    res.test = gather_rows(ds, order, n_train, n_train + n_test);
    res.holdout = gather_rows(ds, order, n_train + n_test, n);
    return res;
}

namespace {

double logistic(double v) {
    if (v >= 0.0)
        return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n_informative > spec.feature_dim)
        throw PreconditionError("generate_synthetic: n_informative exceeds feature_dim");
    if (!(spec.label_balance > 0.0 && spec.label_balance < 1.0))
        throw PreconditionError("generate_synthetic: label_balance must be in (0,1)");

    Dataset ds;
    ds.name = "synthetic";
    ds.features = Matrix(spec.n_samples, spec.feature_dim);
    ds.labels.resize(spec.n_samples);

    Rng rng(seed);
    const double shift = spec.class_separation / 2.0;
    // Per row: one uniform for the label, then feature_dim normals.
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const int label = rng.uniform() < spec.label_balance ? 1 : 0;
        ds.labels[i] = label;
        const double mean = label == 1 ? shift : -shift;
        auto noise = rng.standard_normal(spec.feature_dim);
        double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < spec.feature_dim; ++j) {
            const double raw = j < spec.n_informative ? noise[j] + mean : noise[j];
            row[j] = logistic(raw);
        }
    }
    return ds;
}

}  // namespace lml
