#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "lml/dataset.hpp"
#include "lml/errors.hpp"
#include "lml/rng.hpp"
#include "lml/vae.hpp"

using namespace lml;

namespace {

VaeModel zero_model(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t latent) {
    VaeModel m = init_vae(input_dim, hidden, latent, 0);
    for (DenseLayer* layer : layer_sequence(m)) {
        std::fill(layer->weights.values().begin(), layer->weights.values().end(), 0.0);
        std::fill(layer->bias.begin(), layer->bias.end(), 0.0);
    }
    return m;
}

Matrix random_unit_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.values())
        v = rng.uniform();
    return m;
}

// Central finite differences against the frozen-noise loss.
double max_relative_gradient_error(VaeModel& model, const Matrix& x, const Matrix& eps,
                                   double h) {
    VaeGradients analytic = vae_backward(model, x, eps);
    auto layers = layer_sequence(model);
    double worst = 0.0;
    auto probe = [&](double& param, double grad) {
        const double saved = param;
        param = saved + h;
        const double up = vae_loss_with_noise(model, x, eps).total;
        param = saved - h;
        const double down = vae_loss_with_noise(model, x, eps).total;
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({1e-6, std::fabs(grad), std::fabs(numeric)});
        worst = std::max(worst, std::fabs(grad - numeric) / scale);
    };
    for (std::size_t li = 0; li < layers.size(); ++li) {
        auto& w = layers[li]->weights.values();
        for (std::size_t k = 0; k < w.size(); ++k)
            probe(w[k], analytic.layers[li].weights.values()[k]);
        for (std::size_t k = 0; k < layers[li]->bias.size(); ++k)
            probe(layers[li]->bias[k], analytic.layers[li].bias[k]);
    }
    return worst;
}

}  // namespace

TEST_CASE("init_vae shape bookkeeping") {
    VaeModel m = init_vae(8, {4}, 2, 1);
    REQUIRE(m.encoder_hidden.size() == 1);
    CHECK(m.encoder_hidden[0].in_dim() == 8);
    CHECK(m.encoder_hidden[0].out_dim() == 4);
    CHECK(m.mean_head.in_dim() == 4);
    CHECK(m.mean_head.out_dim() == 2);
    CHECK(m.logvar_head.in_dim() == 4);
    CHECK(m.logvar_head.out_dim() == 2);
    REQUIRE(m.decoder_hidden.size() == 1);
    CHECK(m.decoder_hidden[0].in_dim() == 2);
    CHECK(m.decoder_hidden[0].out_dim() == 4);
    CHECK(m.output_layer.in_dim() == 4);
    CHECK(m.output_layer.out_dim() == 8);
    CHECK(m.output_layer.activation == Activation::Sigmoid);
}

TEST_CASE("init_vae deterministic and Glorot bounded") {
    VaeModel a = init_vae(8, {4}, 2, 42);
    VaeModel b = init_vae(8, {4}, 2, 42);
    auto la = layer_sequence(a), lb = layer_sequence(b);
    for (std::size_t i = 0; i < la.size(); ++i) {
        CHECK(la[i]->weights == lb[i]->weights);
        CHECK(la[i]->bias == lb[i]->bias);
    }
    const double bound = std::sqrt(6.0 / 12.0);
    for (double w : a.encoder_hidden[0].weights.values()) {
        CHECK(w <= bound);
        CHECK(w >= -bound);
    }
    for (double bv : a.encoder_hidden[0].bias)
        CHECK(bv == 0.0);
}

TEST_CASE("init_vae rejects zero dims") {
    CHECK_THROWS_AS(init_vae(0, {4}, 2, 1), PreconditionError);
    CHECK_THROWS_AS(init_vae(4, {4}, 0, 1), PreconditionError);
}

TEST_CASE("encode zero model gives zero heads") {
    VaeModel m = zero_model(6, {3}, 2);
    Matrix x(1, 6, 0.7);
    auto [mu, lv] = encode(m, x);
    for (double v : mu.values())
        CHECK(v == 0.0);
    for (double v : lv.values())
        CHECK(v == 0.0);
}

TEST_CASE("encode output shapes") {
    VaeModel m = init_vae(5, {4}, 3, 9);
    Rng rng(2);
    Matrix x = random_unit_matrix(3, 5, rng);
    auto [mu, lv] = encode(m, x);
    CHECK(mu.rows() == 3);
    CHECK(mu.cols() == 3);
    CHECK(lv.rows() == 3);
    CHECK(lv.cols() == 3);
    CHECK_THROWS_AS(encode(m, Matrix(2, 4)), ShapeError);
}

TEST_CASE("encode matches hand-computed relu affine chain") {
    VaeModel m = zero_model(2, {2}, 1);
    // hidden: h = relu(x W + b)
    m.encoder_hidden[0].weights = Matrix::from_rows({{1.0, -1.0}, {0.5, 2.0}});
    m.encoder_hidden[0].bias = {0.1, -0.2};
    m.mean_head.weights = Matrix::from_rows({{2.0}, {-1.0}});
    m.mean_head.bias = {0.05};
    m.logvar_head.weights = Matrix::from_rows({{1.0}, {1.0}});
    m.logvar_head.bias = {-0.5};

    Matrix x = Matrix::from_rows({{0.3, 0.4}});
    // pre = [0.3*1+0.4*0.5+0.1, 0.3*(-1)+0.4*2+(-0.2)] = [0.6, 0.3]
    // h   = relu -> [0.6, 0.3]
    // mu  = 0.6*2 + 0.3*(-1) + 0.05 = 0.95
    // lv  = 0.6 + 0.3 - 0.5 = 0.4
    auto [mu, lv] = encode(m, x);
    CHECK(std::fabs(mu(0, 0) - 0.95) < 1e-12);
    CHECK(std::fabs(lv(0, 0) - 0.4) < 1e-12);
}

TEST_CASE("reparameterize with unit variance adds the exact noise stream") {
    Matrix mu = Matrix::from_rows({{0.5, -1.0}, {2.0, 0.0}});
    Matrix lv(2, 2, 0.0);
    Rng rng(77);
    Matrix z = reparameterize(mu, lv, rng);
    auto eps = Rng(77).standard_normal(4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(z.values()[i] == mu.values()[i] + eps[i]);
}

TEST_CASE("reparameterize with vanishing variance returns the mean") {
    Matrix mu = Matrix::from_rows({{1.5, -2.5}});
    Matrix lv(1, 2, -60.0);
    Rng rng(3);
    Matrix z = reparameterize(mu, lv, rng);
    CHECK(std::fabs(z(0, 0) - 1.5) < 1e-9);
    CHECK(std::fabs(z(0, 1) + 2.5) < 1e-9);
}

TEST_CASE("reparameterize empirical std matches exp(logvar/2)") {
    const std::size_t n = 10000;
    Matrix mu(n, 1, 0.0);
    Matrix lv(n, 1, std::log(4.0));
    Rng rng(123);
    Matrix z = reparameterize(mu, lv, rng);
    double mean = std::accumulate(z.values().begin(), z.values().end(), 0.0) / n;
    double var = 0.0;
    for (double v : z.values())
        var += (v - mean) * (v - mean);
    var /= n;
    CHECK(std::fabs(std::sqrt(var) - 2.0) < 0.05);
}

TEST_CASE("decode zero model outputs exactly 0.5") {
    VaeModel m = zero_model(4, {3}, 2);
    Matrix z(2, 2, 1.3);
    Matrix out = decode(m, z);
    for (double v : out.values())
        CHECK(v == 0.5);
}

TEST_CASE("decode shapes and hand oracle") {
    VaeModel m = init_vae(4, {3}, 2, 5);
    Matrix z(5, 2, 0.1);
    Matrix out = decode(m, z);
    CHECK(out.rows() == 5);
    CHECK(out.cols() == 4);
    for (double v : out.values()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(decode(m, Matrix(1, 3)), ShapeError);

    VaeModel hand = zero_model(1, {1}, 1);
    hand.decoder_hidden[0].weights = Matrix::from_rows({{2.0}});
    hand.decoder_hidden[0].bias = {-0.5};
    hand.output_layer.weights = Matrix::from_rows({{3.0}});
    hand.output_layer.bias = {0.25};
    Matrix zz = Matrix::from_rows({{0.75}});
    // hidden = relu(0.75*2 - 0.5) = 1.0; out = sigmoid(1*3 + 0.25)
    double want = 1.0 / (1.0 + std::exp(-3.25));
    CHECK(std::fabs(decode(hand, zz)(0, 0) - want) < 1e-12);
}

TEST_CASE("vae_loss perfect reconstruction with prior-matched posterior") {
    Matrix x = Matrix::from_rows({{0.2, 0.8}});
    Matrix mu(1, 3, 0.0), lv(1, 3, 0.0);
    LossBreakdown loss = vae_loss(x, x, mu, lv);
    CHECK(loss.total == 0.0);
    CHECK(loss.reconstruction == 0.0);
    CHECK(loss.kl == 0.0);
}

TEST_CASE("vae_loss single-dim kl is 0.5") {
    Matrix x(1, 2, 0.5);
    Matrix mu(1, 1, 1.0), lv(1, 1, 0.0);
    LossBreakdown loss = vae_loss(x, x, mu, lv);
    CHECK(std::fabs(loss.kl - 0.5) < 1e-12);
}

TEST_CASE("vae_loss kl matches Monte Carlo estimate") {
    const double mu = 0.7, lv = 0.3;
    Matrix x(1, 1, 0.5);
    Matrix m(1, 1, mu), l(1, 1, lv);
    const double analytic = vae_loss(x, x, m, l).kl;

    // MC estimate of E_q[log q(z) - log p(z)], z ~ N(mu, exp(lv)).
    const double sigma = std::exp(0.5 * lv);
    Rng rng(55);
    const std::size_t samples = 400000;
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double z = mu + sigma * rng.normal();
        const double logq = -0.5 * std::log(2.0 * M_PI) - 0.5 * lv -
                            (z - mu) * (z - mu) / (2.0 * sigma * sigma);
        const double logp = -0.5 * std::log(2.0 * M_PI) - z * z / 2.0;
        acc += logq - logp;
    }
    const double mc = acc / samples;
    CHECK(std::fabs(mc - analytic) / analytic < 0.02);
}

TEST_CASE("vae_loss additivity and kl non-negativity") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t b = 1 + rng.bounded(4), d = 1 + rng.bounded(5), k = 1 + rng.bounded(4);
        Matrix x = random_unit_matrix(b, d, rng);
        Matrix xh = random_unit_matrix(b, d, rng);
        Matrix mu(b, k), lv(b, k);
        for (double& v : mu.values())
            v = 4.0 * rng.uniform() - 2.0;
        for (double& v : lv.values())
            v = 4.0 * rng.uniform() - 2.0;
        LossBreakdown loss = vae_loss(x, xh, mu, lv);
        CHECK(loss.kl >= 0.0);
        CHECK(std::fabs(loss.total - (loss.reconstruction + loss.kl)) < 1e-9);
    }
}

TEST_CASE("backward produces finite gradients") {
    VaeModel m = init_vae(7, {5}, 3, 21);
    Rng data_rng(4);
    Matrix x = random_unit_matrix(6, 7, data_rng);
    Rng rng(9);
    VaeGradients grads = backward(m, x, rng);
    for (const auto& layer : grads.layers) {
        CHECK(layer.weights.all_finite());
        for (double b : layer.bias)
            CHECK(std::isfinite(b));
    }
}

TEST_CASE("backward matches central finite differences") {
    VaeModel m = init_vae(6, {5}, 3, 77);
    Rng data_rng(13);
    Matrix x = random_unit_matrix(4, 6, data_rng);
    Matrix eps(4, 3);
    eps.values() = Rng(31).standard_normal(12);
    double err = max_relative_gradient_error(m, x, eps, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("backward hand chain value for zero model on zero batch") {
    VaeModel m = zero_model(3, {}, 2);
    Matrix x(4, 3, 0.0);
    Matrix eps(4, 2, 0.0);
    VaeGradients grads = vae_backward(m, x, eps);
    // x_hat = sigmoid(0) = 0.5, dMSE/da = 2*(0.5-0)*0.25 = 0.25 summed over
    // the batch mean -> exactly 0.25 per output bias.
    const auto& out_bias_grad = grads.layers.back().bias;
    for (double g : out_bias_grad)
        CHECK(std::fabs(g - 0.25) < 1e-12);
}

TEST_CASE("train_vae single batch epoch equals one manual adam step") {
    Dataset ds;
    Rng data_rng(3);
    ds.features = random_unit_matrix(8, 5, data_rng);
    ds.labels.assign(8, 0);
    TrainConfig config{.epochs = 1, .batch_size = 8, .seed = 17};

    VaeModel init = init_vae(5, {4}, 2, 91);
    auto [trained, history] = train_vae(init, ds, config);
    REQUIRE(history.size() == 1);

    // Replay the exact stream: shuffle then one eps draw, one adam step.
    VaeModel manual = init;
    Rng rng(17);
    std::vector<std::size_t> order{0, 1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(order);
    Matrix batch(8, 5);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 5; ++c)
            batch(r, c) = ds.features(order[r], c);
    Matrix eps(8, 2);
    eps.values() = rng.standard_normal(16);
    VaeGradients grads = vae_backward(manual, batch, eps);
    AdamState adam;
    adam_step(manual, grads, adam, config);

    auto lt = layer_sequence(trained), lm = layer_sequence(manual);
    for (std::size_t i = 0; i < lt.size(); ++i) {
        CHECK(lt[i]->weights == lm[i]->weights);
        CHECK(lt[i]->bias == lm[i]->bias);
    }
}

TEST_CASE("train_vae loss drops on synthetic data") {
    Dataset ds = generate_synthetic(
        {.n_samples = 400, .feature_dim = 16, .n_informative = 8, .class_separation = 1.5,
         .label_balance = 0.5},
        19);
    VaeModel model = init_vae(16, {12}, 4, 5);
    auto [trained, history] =
        train_vae(model, ds, {.epochs = 25, .batch_size = 32, .seed = 11});
    REQUIRE(history.size() == 25);
    CHECK(history.back().total < 0.8 * history.front().total);
}

TEST_CASE("train_vae deterministic history") {
    Dataset ds = generate_synthetic(
        {.n_samples = 100, .feature_dim = 8, .n_informative = 4, .class_separation = 1.0,
         .label_balance = 0.5},
        2);
    VaeModel model = init_vae(8, {6}, 3, 7);
    TrainConfig config{.epochs = 4, .batch_size = 16, .seed = 42};
    auto [m1, h1] = train_vae(model, ds, config);
    auto [m2, h2] = train_vae(model, ds, config);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1[i].total == h2[i].total);
        CHECK(h1[i].reconstruction == h2[i].reconstruction);
        CHECK(h1[i].kl == h2[i].kl);
    }
}

TEST_CASE("train_vae rejects unscaled data") {
    Dataset ds;
    ds.features = Matrix::from_rows({{0.5, 3.0}, {0.1, 0.2}});
    ds.labels = {0, 1};
    VaeModel model = init_vae(2, {2}, 1, 1);
    CHECK_THROWS_AS(train_vae(model, ds, {.epochs = 1, .batch_size = 2}), PreconditionError);
}

TEST_CASE("extract_latent copies labels and is deterministic") {
    Dataset ds = generate_synthetic(
        {.n_samples = 40, .feature_dim = 10, .n_informative = 5, .class_separation = 1.0,
         .label_balance = 0.4},
        31);
    VaeModel model = init_vae(10, {6}, 4, 3);
    Dataset a = extract_latent(model, ds);
    Dataset b = extract_latent(model, ds);
    CHECK(a.labels == ds.labels);
    CHECK(a.feature_dim() == 4);
    CHECK(a.size() == ds.size());
    CHECK(a.features == b.features);

    auto mu = encode(model, ds.features).first;
    CHECK(a.features == mu);
}
