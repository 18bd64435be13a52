#include "lml/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
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

void apply_activation(Matrix& m, Activation act) {
    switch (act) {
    case Activation::Relu:
        for (double& v : m.values())
            v = v > 0.0 ? v : 0.0;
        break;
    case Activation::Sigmoid:
        for (double& v : m.values())
            v = stable_sigmoid(v);
        break;
    case Activation::Linear:
        break;
    }
}

Matrix dense_preactivation(const DenseLayer& layer, const Matrix& x) {
    if (x.cols() != layer.in_dim())
        throw ShapeError("dense layer expects " + std::to_string(layer.in_dim()) +
                         " inputs, got " + std::to_string(x.cols()));
    Matrix pre = matmul(x, layer.weights);
    for (std::size_t i = 0; i < pre.rows(); ++i) {
        double* row = pre.row_ptr(i);
        for (std::size_t j = 0; j < pre.cols(); ++j)
            row[j] += layer.bias[j];
    }
    return pre;
}

DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim, Activation act, Rng& rng) {
    DenseLayer layer;
    layer.weights = Matrix(in_dim, out_dim);
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weights.values())
        w = bound * (2.0 * rng.uniform() - 1.0);
    layer.bias.assign(out_dim, 0.0);
    layer.activation = act;
    return layer;
}

// Everything backward needs from the forward pass.
struct ForwardTrace {
    std::vector<Matrix> enc_pre, enc_act;
    Matrix mu;
    Matrix lv_raw;  // before clamping, for the clamp subgradient
    Matrix lv;
    Matrix sigma;
    Matrix z;
    std::vector<Matrix> dec_pre, dec_act;
    Matrix out_pre;
    Matrix x_hat;
};

ForwardTrace run_forward(const VaeModel& model, const Matrix& x, const Matrix& eps) {
    if (x.cols() != model.input_dim)
        throw ShapeError("vae forward: input has " + std::to_string(x.cols()) +
                         " features, model expects " + std::to_string(model.input_dim));
    if (eps.rows() != x.rows() || eps.cols() != model.latent_dim)
        throw ShapeError("vae forward: eps shape mismatch");

    ForwardTrace t;
    const Matrix* cur = &x;
    for (const DenseLayer& layer : model.encoder_hidden) {
        t.enc_pre.push_back(dense_preactivation(layer, *cur));
        Matrix act = t.enc_pre.back();
        apply_activation(act, layer.activation);
        t.enc_act.push_back(std::move(act));
        cur = &t.enc_act.back();
    }
    t.mu = dense_preactivation(model.mean_head, *cur);
    t.lv_raw = dense_preactivation(model.logvar_head, *cur);
    t.lv = t.lv_raw;
    for (double& v : t.lv.values())
        v = std::clamp(v, kLogVarMin, kLogVarMax);

    t.sigma = t.lv;
    for (double& v : t.sigma.values())
        v = std::exp(0.5 * v);

    t.z = t.mu;
    for (std::size_t i = 0; i < t.z.size(); ++i)
        t.z.values()[i] += t.sigma.values()[i] * eps.values()[i];

    cur = &t.z;
    for (const DenseLayer& layer : model.decoder_hidden) {
        t.dec_pre.push_back(dense_preactivation(layer, *cur));
        Matrix act = t.dec_pre.back();
        apply_activation(act, layer.activation);
        t.dec_act.push_back(std::move(act));
        cur = &t.dec_act.back();
    }
    t.out_pre = dense_preactivation(model.output_layer, *cur);
    t.x_hat = t.out_pre;
    apply_activation(t.x_hat, model.output_layer.activation);
    return t;
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols(); ++j)
            sums[j] += row[j];
    }
    return sums;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx, std::size_t begin,
                 std::size_t end) {
    Matrix out(end - begin, m.cols());
    for (std::size_t r = begin; r < end; ++r)
        std::copy(m.row_ptr(idx[r]), m.row_ptr(idx[r]) + m.cols(), out.row_ptr(r - begin));
    return out;
}

void check_unit_range(const Matrix& m, const char* who) {
    for (double v : m.values())
        if (!(v >= 0.0 && v <= 1.0))
            throw PreconditionError(std::string(who) + ": features must be scaled to [0,1], found " +
                                    std::to_string(v));
}

}  // namespace

VaeModel init_vae(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                  std::size_t latent_dim, std::uint64_t seed) {
    if (input_dim == 0 || latent_dim == 0)
        throw PreconditionError("init_vae: input_dim and latent_dim must be positive");
    for (std::size_t h : hidden_dims)
        if (h == 0)
            throw PreconditionError("init_vae: hidden widths must be positive");

    Rng rng(seed);
    VaeModel model;
    model.input_dim = input_dim;
    model.latent_dim = latent_dim;

    std::size_t prev = input_dim;
    for (std::size_t h : hidden_dims) {
        model.encoder_hidden.push_back(make_layer(prev, h, Activation::Relu, rng));
        prev = h;
    }
    model.mean_head = make_layer(prev, latent_dim, Activation::Linear, rng);
    model.logvar_head = make_layer(prev, latent_dim, Activation::Linear, rng);

    prev = latent_dim;
    for (auto it = hidden_dims.rbegin(); it != hidden_dims.rend(); ++it) {
        model.decoder_hidden.push_back(make_layer(prev, *it, Activation::Relu, rng));
        prev = *it;
    }
    model.output_layer = make_layer(prev, input_dim, Activation::Sigmoid, rng);
    return model;
}

std::vector<DenseLayer*> layer_sequence(VaeModel& model) {
    std::vector<DenseLayer*> seq;
    for (auto& l : model.encoder_hidden)
        seq.push_back(&l);
    seq.push_back(&model.mean_head);
    seq.push_back(&model.logvar_head);
    for (auto& l : model.decoder_hidden)
        seq.push_back(&l);
    seq.push_back(&model.output_layer);
    return seq;
}

std::vector<const DenseLayer*> layer_sequence(const VaeModel& model) {
    std::vector<const DenseLayer*> seq;
    for (auto& l : model.encoder_hidden)
        seq.push_back(&l);
    seq.push_back(&model.mean_head);
    seq.push_back(&model.logvar_head);
    for (auto& l : model.decoder_hidden)
        seq.push_back(&l);
    seq.push_back(&model.output_layer);
    return seq;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
    Matrix out = dense_preactivation(layer, x);
    apply_activation(out, layer.activation);
    return out;
}

std::pair<Matrix, Matrix> encode(const VaeModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim)
        throw ShapeError("encode: input has " + std::to_string(x.cols()) +
                         " features, model expects " + std::to_string(model.input_dim));
    const Matrix* cur = &x;
    Matrix h;
    for (const DenseLayer& layer : model.encoder_hidden) {
        h = dense_forward(layer, *cur);
        cur = &h;
    }
    Matrix mu = dense_forward(model.mean_head, *cur);
    Matrix lv = dense_forward(model.logvar_head, *cur);
    for (double& v : lv.values())
        v = std::clamp(v, kLogVarMin, kLogVarMax);
    return {std::move(mu), std::move(lv)};
}

Matrix reparameterize(const Matrix& z_mean, const Matrix& z_log_var, Rng& rng) {
    if (z_mean.rows() != z_log_var.rows() || z_mean.cols() != z_log_var.cols())
        throw ShapeError("reparameterize: mean and logvar shapes differ");
    auto eps = rng.standard_normal(z_mean.size());
    Matrix z = z_mean;
    for (std::size_t i = 0; i < z.size(); ++i)
        z.values()[i] += std::exp(0.5 * z_log_var.values()[i]) * eps[i];
    return z;
}

Matrix decode(const VaeModel& model, const Matrix& z) {
    if (z.cols() != model.latent_dim)
        throw ShapeError("decode: input has " + std::to_string(z.cols()) +
                         " columns, model expects latent_dim " +
                         std::to_string(model.latent_dim));
    const Matrix* cur = &z;
    Matrix h;
    for (const DenseLayer& layer : model.decoder_hidden) {
        h = dense_forward(layer, *cur);
        cur = &h;
    }
    return dense_forward(model.output_layer, *cur);
}

LossBreakdown vae_loss(const Matrix& x, const Matrix& x_hat, const Matrix& z_mean,
                       const Matrix& z_log_var) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
        throw ShapeError("vae_loss: x and x_hat shapes differ");
    if (z_mean.rows() != x.rows() || z_log_var.rows() != x.rows() ||
        z_mean.cols() != z_log_var.cols())
        throw ShapeError("vae_loss: latent shapes inconsistent");

    const double inv_batch = 1.0 / static_cast<double>(x.rows());
    LossBreakdown loss;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x.values()[i] - x_hat.values()[i];
        loss.reconstruction += diff * diff;
    }
    loss.reconstruction *= inv_batch;
    for (std::size_t i = 0; i < z_mean.size(); ++i) {
        const double mu = z_mean.values()[i];
        const double lv = z_log_var.values()[i];
        loss.kl += 0.5 * (mu * mu + std::exp(lv) - lv - 1.0);
    }
    loss.kl *= inv_batch;
    loss.total = loss.reconstruction + loss.kl;
    return loss;
}

LossBreakdown vae_loss_with_noise(const VaeModel& model, const Matrix& x, const Matrix& eps) {
    ForwardTrace t = run_forward(model, x, eps);
    return vae_loss(x, t.x_hat, t.mu, t.lv);
}

namespace {

VaeGradients backward_from_trace(const VaeModel& model, const Matrix& x, const Matrix& eps,
                                 const ForwardTrace& t) {
    const double inv_batch = 1.0 / static_cast<double>(x.rows());

    const std::size_t n_enc = model.encoder_hidden.size();
    const std::size_t n_dec = model.decoder_hidden.size();
    VaeGradients grads;
    grads.layers.resize(n_enc + 2 + n_dec + 1);
    auto grad_slot = [&](std::size_t i) -> LayerGrads& { return grads.layers[i]; };

    // Output layer: d/d x_hat of the batch-mean squared error, through the
    // sigmoid.
    Matrix delta = t.x_hat;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        const double xh = t.x_hat.values()[i];
        const double dmse = 2.0 * inv_batch * (xh - x.values()[i]);
        delta.values()[i] = dmse * xh * (1.0 - xh);
    }
    const Matrix& out_input = n_dec > 0 ? t.dec_act.back() : t.z;
    grad_slot(n_enc + 2 + n_dec) = {matmul_transpose_a(out_input, delta), column_sums(delta)};
    delta = matmul_transpose_b(delta, model.output_layer.weights);

    for (std::size_t li = n_dec; li-- > 0;) {
        const Matrix& pre = t.dec_pre[li];
        for (std::size_t i = 0; i < delta.size(); ++i)
            if (pre.values()[i] <= 0.0)
                delta.values()[i] = 0.0;
        const Matrix& input = li > 0 ? t.dec_act[li - 1] : t.z;
        grad_slot(n_enc + 2 + li) = {matmul_transpose_a(input, delta), column_sums(delta)};
        delta = matmul_transpose_b(delta, model.decoder_hidden[li].weights);
    }

    // delta now holds dL/dz. Split into the mean and logvar paths and add the
    // KL contributions.
    Matrix d_mu = delta;
    for (std::size_t i = 0; i < d_mu.size(); ++i)
        d_mu.values()[i] += inv_batch * t.mu.values()[i];

    Matrix d_lv = delta;
    for (std::size_t i = 0; i < d_lv.size(); ++i) {
        double g = delta.values()[i] * 0.5 * t.sigma.values()[i] * eps.values()[i];
        g += 0.5 * inv_batch * (std::exp(t.lv.values()[i]) - 1.0);
        const double raw = t.lv_raw.values()[i];
        d_lv.values()[i] = (raw < kLogVarMin || raw > kLogVarMax) ? 0.0 : g;
    }

    const Matrix& head_input = n_enc > 0 ? t.enc_act.back() : x;
    grad_slot(n_enc) = {matmul_transpose_a(head_input, d_mu), column_sums(d_mu)};
    grad_slot(n_enc + 1) = {matmul_transpose_a(head_input, d_lv), column_sums(d_lv)};

    Matrix delta_h = matmul_transpose_b(d_mu, model.mean_head.weights);
    {
        Matrix via_lv = matmul_transpose_b(d_lv, model.logvar_head.weights);
        for (std::size_t i = 0; i < delta_h.size(); ++i)
            delta_h.values()[i] += via_lv.values()[i];
    }

    for (std::size_t li = n_enc; li-- > 0;) {
        const Matrix& pre = t.enc_pre[li];
        for (std::size_t i = 0; i < delta_h.size(); ++i)
            if (pre.values()[i] <= 0.0)
                delta_h.values()[i] = 0.0;
        const Matrix& input = li > 0 ? t.enc_act[li - 1] : x;
        grad_slot(li) = {matmul_transpose_a(input, delta_h), column_sums(delta_h)};
        if (li > 0)
            delta_h = matmul_transpose_b(delta_h, model.encoder_hidden[li].weights);
    }
    return grads;
}

}  // namespace

VaeGradients vae_backward(const VaeModel& model, const Matrix& x, const Matrix& eps) {
    ForwardTrace t = run_forward(model, x, eps);
    return backward_from_trace(model, x, eps, t);
}

VaeGradients backward(const VaeModel& model, const Matrix& batch, Rng& rng) {
    Matrix eps(batch.rows(), model.latent_dim);
    eps.values() = rng.standard_normal(batch.rows() * model.latent_dim);
    return vae_backward(model, batch, eps);
}

void adam_step(VaeModel& model, const VaeGradients& grads, AdamState& state,
               const TrainConfig& config) {
    auto layers = layer_sequence(model);
    if (state.first_moment.empty()) {
        state.first_moment.resize(layers.size());
        state.second_moment.resize(layers.size());
        for (std::size_t i = 0; i < layers.size(); ++i) {
            state.first_moment[i] = {Matrix(layers[i]->weights.rows(), layers[i]->weights.cols()),
                                     std::vector<double>(layers[i]->bias.size(), 0.0)};
            state.second_moment[i] = state.first_moment[i];
        }
    }
    state.timestep += 1;
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.timestep));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.timestep));

    auto update = [&](double& param, double g, double& m, double& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double m_hat = m / bias1;
        const double v_hat = v / bias2;
        param -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    };

    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& w = layers[i]->weights.values();
        const auto& gw = grads.layers[i].weights.values();
        auto& mw = state.first_moment[i].weights.values();
        auto& vw = state.second_moment[i].weights.values();
        for (std::size_t k = 0; k < w.size(); ++k)
            update(w[k], gw[k], mw[k], vw[k]);
        auto& b = layers[i]->bias;
        const auto& gb = grads.layers[i].bias;
        auto& mb = state.first_moment[i].bias;
        auto& vb = state.second_moment[i].bias;
        for (std::size_t k = 0; k < b.size(); ++k)
            update(b[k], gb[k], mb[k], vb[k]);
    }
}

std::pair<VaeModel, std::vector<LossBreakdown>> train_vae(VaeModel model, const Dataset& train,
                                                          const TrainConfig& config) {
    if (config.epochs < 1 || config.batch_size < 1)
        throw PreconditionError("train_vae: epochs and batch_size must be >= 1");
    if (train.size() == 0)
        throw PreconditionError("train_vae: empty training set");
    check_unit_range(train.features, "train_vae");

    Rng rng(config.seed);
    AdamState adam;
    std::vector<LossBreakdown> history;
    history.reserve(config.epochs);

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        LossBreakdown epoch_loss;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            Matrix batch = take_rows(train.features, order, start, end);
            Matrix eps(batch.rows(), model.latent_dim);
            eps.values() = rng.standard_normal(batch.rows() * model.latent_dim);

            ForwardTrace trace = run_forward(model, batch, eps);
            LossBreakdown loss = vae_loss(batch, trace.x_hat, trace.mu, trace.lv);
            VaeGradients grads = backward_from_trace(model, batch, eps, trace);
            adam_step(model, grads, adam, config);

            const double weight = static_cast<double>(batch.rows());
            epoch_loss.total += loss.total * weight;
            epoch_loss.reconstruction += loss.reconstruction * weight;
            epoch_loss.kl += loss.kl * weight;
        }
        epoch_loss.total /= static_cast<double>(n);
        epoch_loss.reconstruction /= static_cast<double>(n);
        epoch_loss.kl /= static_cast<double>(n);
        history.push_back(epoch_loss);
    }
    return {std::move(model), std::move(history)};
}

Dataset extract_latent(const VaeModel& model, const Dataset& ds) {
    check_unit_range(ds.features, "extract_latent");
    Dataset out;
    out.name = ds.name;
    out.features = encode(model, ds.features).first;
    out.labels = ds.labels;
    return out;
}

}  // namespace lml
