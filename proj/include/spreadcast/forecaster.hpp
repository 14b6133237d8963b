// Transformer classifier over day-feature sequences: linear encoder ->
// sinusoidal positional encoding (with dropout) -> stacked self-attention
// encoder layers (post-norm) -> linear decoder from the final position to
// 24x5 class logits for day T+1.
//
// Forward, loss and exact reverse-mode gradients are implemented directly on
// Eigen matrices in double precision; gradient correctness is pinned by a
// finite-difference oracle in the test suite.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spreadcast/errors.hpp"
#include "spreadcast/feature_pipeline.hpp"
#include "spreadcast/rng.hpp"
#include "spreadcast/spread_quantizer.hpp"

namespace spreadcast {

inline constexpr int kOutputWidth = kHoursPerDay * kNumClasses; // 24 x 5 = 120

using LogitMatrix = Eigen::Matrix<double, kHoursPerDay, kNumClasses>;

struct ModelConfig {
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int ff_width = 128;
    double pe_dropout = 0.1; // applied only at the positional-encoding output
    int lagging = 1;         // echo of the pipeline setting; seq_len = lagging + 1
    int input_width = 0;     // D
    uint64_t seed = 0;

    int seq_len() const { return lagging + 1; }

    void validate() const {
        if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
            throw ConfigError("d_model must be positive and divisible by n_heads");
        }
        if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
        if (ff_width < 1) throw ConfigError("ff_width must be >= 1");
        if (!(pe_dropout >= 0.0 && pe_dropout < 1.0)) {
            throw ConfigError("pe_dropout must be in [0, 1)");
        }
        if (lagging < 1 || lagging > 3) throw ConfigError("lagging must be in {1,2,3}");
        if (input_width < 1) throw ConfigError("input_width must be set");
    }
};

// All weights as dynamic matrices; biases and norm parameters are 1 x n.
struct ModelParams {
    ModelConfig config;

    Eigen::MatrixXd w_in, b_in; // D x d, 1 x d

    struct Layer {
        Eigen::MatrixXd wq, bq, wk, bk, wv, bv, wo, bo; // d x d projections
        Eigen::MatrixXd ln1_g, ln1_b;                   // 1 x d
        Eigen::MatrixXd w1, b1;                         // d x ff, 1 x ff
        Eigen::MatrixXd w2, b2;                         // ff x d, 1 x d
        Eigen::MatrixXd ln2_g, ln2_b;                   // 1 x d
    };
    std::vector<Layer> layers;

    Eigen::MatrixXd w_out, b_out; // d x 120, 1 x 120

    // Visits every parameter tensor in a fixed order shared by gradients,
    // optimizer state and serialization.
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("w_in", self.w_in);
        f("b_in", self.b_in);
        for (size_t l = 0; l < self.layers.size(); ++l) {
            auto& L = self.layers[l];
            const std::string p = "layer" + std::to_string(l) + ".";
            f(p + "wq", L.wq); f(p + "bq", L.bq);
            f(p + "wk", L.wk); f(p + "bk", L.bk);
            f(p + "wv", L.wv); f(p + "bv", L.bv);
            f(p + "wo", L.wo); f(p + "bo", L.bo);
            f(p + "ln1_g", L.ln1_g); f(p + "ln1_b", L.ln1_b);
            f(p + "w1", L.w1); f(p + "b1", L.b1);
            f(p + "w2", L.w2); f(p + "b2", L.b2);
            f(p + "ln2_g", L.ln2_g); f(p + "ln2_b", L.ln2_b);
        }
        f("w_out", self.w_out);
        f("b_out", self.b_out);
    }
    template <typename F> void for_each(F&& f) { visit(*this, f); }
    template <typename F> void for_each(F&& f) const { visit(*this, f); }
};

inline std::vector<Eigen::MatrixXd*> tensor_ptrs(ModelParams& p) {
    std::vector<Eigen::MatrixXd*> out;
    p.for_each([&](const std::string&, Eigen::MatrixXd& m) { out.push_back(&m); });
    return out;
}

inline ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    z.for_each([](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
    return z;
}

inline bool params_identical(const ModelParams& a, const ModelParams& b) {
    bool same = a.layers.size() == b.layers.size();
    if (!same) return false;
    std::vector<const Eigen::MatrixXd*> ta, tb;
    a.for_each([&](const std::string&, const Eigen::MatrixXd& m) { ta.push_back(&m); });
    b.for_each([&](const std::string&, const Eigen::MatrixXd& m) { tb.push_back(&m); });
    for (size_t i = 0; i < ta.size(); ++i) {
        if (ta[i]->rows() != tb[i]->rows() || ta[i]->cols() != tb[i]->cols()) return false;
        if (std::memcmp(ta[i]->data(), tb[i]->data(),
                        sizeof(double) * static_cast<size_t>(ta[i]->size())) != 0) {
            return false;
        }
    }
    return true;
}

// 24 rows of class probabilities for day T+1; every row sums to 1.
struct HourlyDistribution {
    LogitMatrix probs;

    // Lowest index wins ties so the argmax is deterministic.
    SpreadClass argmax(int hour) const {
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c) {
            if (probs(hour, c) > probs(hour, best)) best = c;
        }
        return SpreadClass(best);
    }
};

// ---------------------------------------------------------------------------
// Initialization and positional encoding
// ---------------------------------------------------------------------------

namespace detail {

inline void glorot_fill(Eigen::MatrixXd& m, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rng.uniform(-bound, bound);
        }
    }
}

} // namespace detail

// Scaled uniform (Glorot) weights, zero biases, unit norm gains; deterministic
// for a fixed config.seed.
inline ModelParams init_model(const ModelConfig& config) {
    config.validate();
    Rng rng(mix_seed(config.seed, 0x1417ULL));
    const int d = config.d_model;

    ModelParams p;
    p.config = config;
    p.w_in.resize(config.input_width, d);
    detail::glorot_fill(p.w_in, rng);
    p.b_in = Eigen::MatrixXd::Zero(1, d);
    p.layers.resize(static_cast<size_t>(config.n_layers));
    for (auto& L : p.layers) {
        for (Eigen::MatrixXd* w : {&L.wq, &L.wk, &L.wv, &L.wo}) {
            w->resize(d, d);
            detail::glorot_fill(*w, rng);
        }
        L.bq = L.bk = L.bv = L.bo = Eigen::MatrixXd::Zero(1, d);
        L.ln1_g = L.ln2_g = Eigen::MatrixXd::Ones(1, d);
        L.ln1_b = L.ln2_b = Eigen::MatrixXd::Zero(1, d);
        L.w1.resize(d, config.ff_width);
        detail::glorot_fill(L.w1, rng);
        L.b1 = Eigen::MatrixXd::Zero(1, config.ff_width);
        L.w2.resize(config.ff_width, d);
        detail::glorot_fill(L.w2, rng);
        L.b2 = Eigen::MatrixXd::Zero(1, d);
    }
    p.w_out.resize(d, kOutputWidth);
    detail::glorot_fill(p.w_out, rng);
    p.b_out = Eigen::MatrixXd::Zero(1, kOutputWidth);
    return p;
}

// Standard sinusoidal table: PE[p, 2i] = sin(p / 10000^(2i/d)), PE[p, 2i+1] = cos(same).
inline Eigen::MatrixXd positional_encoding(int seq_len, int d_model) {
    if (seq_len < 1 || d_model < 1) {
        throw std::invalid_argument("positional_encoding: dimensions must be >= 1");
    }
    Eigen::MatrixXd pe(seq_len, d_model);
    for (int pos = 0; pos < seq_len; ++pos) {
        for (int j = 0; j < d_model; ++j) {
            const double freq = std::pow(10000.0, -2.0 * (j / 2) / static_cast<double>(d_model));
            const double angle = pos * freq;
            pe(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kLayerNormEps = 1e-5;

inline void add_row_bias(Eigen::MatrixXd& m, const Eigen::MatrixXd& bias) {
    m.rowwise() += bias.row(0);
}

inline void softmax_rows_inplace(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mx = m.row(i).maxCoeff();
        m.row(i) = (m.row(i).array() - mx).exp().matrix();
        m.row(i) /= m.row(i).sum();
    }
}

inline Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gain,
                                  const Eigen::MatrixXd& bias) {
    Eigen::MatrixXd y(x.rows(), x.cols());
    const double n = static_cast<double>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().sum() / n;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        y.row(i) =
            (((x.row(i).array() - mu) * inv) * gain.row(0).array() + bias.row(0).array()).matrix();
    }
    return y;
}

struct AttentionCache {
    Eigen::MatrixXd q, k, v;            // S x d
    std::vector<Eigen::MatrixXd> attn;  // per head, S x S softmax rows
    Eigen::MatrixXd concat;             // S x d
};

struct LayerCache {
    Eigen::MatrixXd input; // S x d
    AttentionCache att;
    Eigen::MatrixXd r1, n1;     // residual sum and its norm
    Eigen::MatrixXd z1, a1;     // FF pre-activation (S x ff) and ReLU output
    Eigen::MatrixXd r2, n2;     // second residual sum and layer output
};

struct ForwardCache {
    Eigen::MatrixXd embedded;     // S x d, input to layer 0 (post PE + dropout)
    Eigen::MatrixXd dropout_mask; // empty when dropout is off
    std::vector<LayerCache> layers;
    Eigen::RowVectorXd final_h;   // representation at the T+1 position
};

inline Eigen::MatrixXd attention_forward(const ModelParams::Layer& L, const Eigen::MatrixXd& h,
                                         int n_heads, AttentionCache& cache) {
    const Eigen::Index d = h.cols();
    const Eigen::Index dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    cache.q = h * L.wq;
    add_row_bias(cache.q, L.bq);
    cache.k = h * L.wk;
    add_row_bias(cache.k, L.bk);
    cache.v = h * L.wv;
    add_row_bias(cache.v, L.bv);

    cache.attn.resize(static_cast<size_t>(n_heads));
    cache.concat.resize(h.rows(), d);
    for (int head = 0; head < n_heads; ++head) {
        const auto qh = cache.q.middleCols(head * dh, dh);
        const auto kh = cache.k.middleCols(head * dh, dh);
        const auto vh = cache.v.middleCols(head * dh, dh);
        Eigen::MatrixXd scores = qh * kh.transpose() * scale;
        softmax_rows_inplace(scores);
        cache.concat.middleCols(head * dh, dh) = scores * vh;
        cache.attn[static_cast<size_t>(head)] = std::move(scores);
    }
    Eigen::MatrixXd out = cache.concat * L.wo;
    add_row_bias(out, L.bo);
    return out;
}

inline Eigen::MatrixXd layer_forward(const ModelParams::Layer& L, const Eigen::MatrixXd& h,
                                     int n_heads, LayerCache& cache) {
    cache.input = h;
    const Eigen::MatrixXd att = attention_forward(L, h, n_heads, cache.att);
    cache.r1 = h + att;
    cache.n1 = layer_norm(cache.r1, L.ln1_g, L.ln1_b);
    cache.z1 = cache.n1 * L.w1;
    add_row_bias(cache.z1, L.b1);
    cache.a1 = cache.z1.cwiseMax(0.0);
    Eigen::MatrixXd f = cache.a1 * L.w2;
    add_row_bias(f, L.b2);
    cache.r2 = cache.n1 + f;
    cache.n2 = layer_norm(cache.r2, L.ln2_g, L.ln2_b);
    return cache.n2;
}

// Full forward pass with every intermediate needed by the backward pass.
// `dropout_rng` must be non-null when training with pe_dropout > 0.
inline LogitMatrix forward_cached(const ModelParams& p, const Eigen::MatrixXd& x, bool training,
                                  Rng* dropout_rng, ForwardCache& cache) {
    const ModelConfig& cfg = p.config;
    if (x.cols() != cfg.input_width) {
        throw ShapeError("sample width " + std::to_string(x.cols()) +
                         " does not match model input width " + std::to_string(cfg.input_width));
    }
    if (x.rows() != cfg.seq_len()) {
        throw ShapeError("sample sequence length " + std::to_string(x.rows()) +
                         " does not match lagging+1 = " + std::to_string(cfg.seq_len()));
    }

    Eigen::MatrixXd h = x * p.w_in;
    add_row_bias(h, p.b_in);
    h += positional_encoding(cfg.seq_len(), cfg.d_model);

    if (training && cfg.pe_dropout > 0.0) {
        if (dropout_rng == nullptr) {
            throw std::invalid_argument("training forward with dropout needs an RNG");
        }
        const double keep_scale = 1.0 / (1.0 - cfg.pe_dropout);
        cache.dropout_mask.resize(h.rows(), h.cols());
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            for (Eigen::Index j = 0; j < h.cols(); ++j) {
                cache.dropout_mask(i, j) = dropout_rng->uniform() >= cfg.pe_dropout ? keep_scale : 0.0;
            }
        }
        h = h.cwiseProduct(cache.dropout_mask);
    } else {
        cache.dropout_mask.resize(0, 0);
    }
    cache.embedded = h;

    cache.layers.resize(p.layers.size());
    for (size_t l = 0; l < p.layers.size(); ++l) {
        h = layer_forward(p.layers[l], h, cfg.n_heads, cache.layers[l]);
    }
    cache.final_h = h.row(h.rows() - 1);

    Eigen::RowVectorXd flat = cache.final_h * p.w_out + p.b_out.row(0);
    LogitMatrix logits;
    for (int hour = 0; hour < kHoursPerDay; ++hour) {
        for (int c = 0; c < kNumClasses; ++c) {
            logits(hour, c) = flat(hour * kNumClasses + c);
        }
    }
    return logits;
}

} // namespace detail

// Logits for day T+1. With the training flag off the result is a pure function
// of (params, sample); with it on, positional-encoding dropout is applied from
// `dropout_rng`.
inline LogitMatrix forward(const ModelParams& params, const ModelSample& sample,
                           bool training = false, Rng* dropout_rng = nullptr) {
    detail::ForwardCache cache;
    return detail::forward_cached(params, sample.features, training, dropout_rng, cache);
}

inline LogitMatrix softmax_rows(const LogitMatrix& logits) {
    LogitMatrix probs;
    for (int h = 0; h < kHoursPerDay; ++h) {
        const double mx = logits.row(h).maxCoeff();
        const Eigen::Matrix<double, 1, kNumClasses> e =
            (logits.row(h).array() - mx).exp().matrix();
        probs.row(h) = e / e.sum();
    }
    return probs;
}

inline HourlyDistribution predict_proba(const ModelParams& params, const ModelSample& sample) {
    return HourlyDistribution{softmax_rows(forward(params, sample))};
}

// Cross-entropy: mean over the 24 hours of -log softmax probability of the
// true class. Uniform logits give ln(5).
inline double loss(const LogitMatrix& logits, const std::array<SpreadClass, kHoursPerDay>& labels) {
    double total = 0.0;
    for (int h = 0; h < kHoursPerDay; ++h) {
        const double mx = logits.row(h).maxCoeff();
        const double lse = mx + std::log((logits.row(h).array() - mx).exp().sum());
        total += lse - logits(h, labels[static_cast<size_t>(h)].index());
    }
    return total / kHoursPerDay;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

namespace detail {

// dX for y = gamma .* (x-mu)/sqrt(var+eps) + beta, accumulating gamma/beta grads.
inline Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x,
                                           const Eigen::MatrixXd& gain, Eigen::MatrixXd& g_gain,
                                           Eigen::MatrixXd& g_bias) {
    Eigen::MatrixXd dx(x.rows(), x.cols());
    const double n = static_cast<double>(x.cols());
    using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().sum() / n;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        const RowArray xhat = (x.row(i).array() - mu) * inv;
        const RowArray dyi = dy.row(i).array();

        g_bias.row(0).array() += dyi;
        g_gain.row(0).array() += dyi * xhat;

        const RowArray dxhat = dyi * gain.row(0).array();
        const double m1 = dxhat.mean();
        const double m2 = (dxhat * xhat).mean();
        dx.row(i) = (inv * (dxhat - m1 - xhat * m2)).matrix();
    }
    return dx;
}

inline Eigen::MatrixXd attention_backward(const ModelParams::Layer& L, const AttentionCache& c,
                                          const Eigen::MatrixXd& input, const Eigen::MatrixXd& d_out,
                                          int n_heads, ModelParams::Layer& g) {
    const Eigen::Index d = input.cols();
    const Eigen::Index dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    g.wo += c.concat.transpose() * d_out;
    g.bo += d_out.colwise().sum();
    const Eigen::MatrixXd d_concat = d_out * L.wo.transpose();

    Eigen::MatrixXd dq(input.rows(), d), dk(input.rows(), d), dv(input.rows(), d);
    for (int head = 0; head < n_heads; ++head) {
        const Eigen::MatrixXd& a = c.attn[static_cast<size_t>(head)]; // S x S
        const auto qh = c.q.middleCols(head * dh, dh);
        const auto kh = c.k.middleCols(head * dh, dh);
        const auto vh = c.v.middleCols(head * dh, dh);
        const auto d_oh = d_concat.middleCols(head * dh, dh);

        const Eigen::MatrixXd da = d_oh * vh.transpose(); // S x S
        dv.middleCols(head * dh, dh) = a.transpose() * d_oh;

        // Softmax backward, row-wise: ds = a .* (da - rowdot(da, a)).
        Eigen::MatrixXd ds(a.rows(), a.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double dot = a.row(i).dot(da.row(i));
            ds.row(i) = (a.row(i).array() * (da.row(i).array() - dot)).matrix();
        }
        dq.middleCols(head * dh, dh) = ds * kh * scale;
        dk.middleCols(head * dh, dh) = ds.transpose() * qh * scale;
    }

    g.wq += input.transpose() * dq;
    g.bq += dq.colwise().sum();
    g.wk += input.transpose() * dk;
    g.bk += dk.colwise().sum();
    g.wv += input.transpose() * dv;
    g.bv += dv.colwise().sum();

    return dq * L.wq.transpose() + dk * L.wk.transpose() + dv * L.wv.transpose();
}

inline Eigen::MatrixXd layer_backward(const ModelParams::Layer& L, const LayerCache& c,
                                      const Eigen::MatrixXd& d_out, int n_heads,
                                      ModelParams::Layer& g) {
    const Eigen::MatrixXd dr2 = layer_norm_backward(d_out, c.r2, L.ln2_g, g.ln2_g, g.ln2_b);

    // r2 = n1 + relu(n1*w1 + b1)*w2 + b2
    g.w2 += c.a1.transpose() * dr2;
    g.b2 += dr2.colwise().sum();
    Eigen::MatrixXd dz1 = dr2 * L.w2.transpose();
    dz1 = dz1.cwiseProduct((c.z1.array() > 0.0).cast<double>().matrix());
    g.w1 += c.n1.transpose() * dz1;
    g.b1 += dz1.colwise().sum();
    const Eigen::MatrixXd dn1 = dr2 + dz1 * L.w1.transpose();

    const Eigen::MatrixXd dr1 = layer_norm_backward(dn1, c.r1, L.ln1_g, g.ln1_g, g.ln1_b);

    // r1 = input + attention(input)
    return dr1 + attention_backward(L, c.att, c.input, dr1, n_heads, g);
}

// Accumulates d(loss)/d(params) for one sample into `g`, given dL/dlogits.
inline void backward(const ModelParams& p, const Eigen::MatrixXd& x, const ForwardCache& cache,
                     const LogitMatrix& d_logits, ModelParams& g) {
    Eigen::RowVectorXd d_flat(kOutputWidth);
    for (int hour = 0; hour < kHoursPerDay; ++hour) {
        for (int c = 0; c < kNumClasses; ++c) {
            d_flat(hour * kNumClasses + c) = d_logits(hour, c);
        }
    }

    g.w_out += cache.final_h.transpose() * d_flat;
    g.b_out += d_flat;

    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(x.rows(), p.config.d_model);
    dh.row(dh.rows() - 1) = d_flat * p.w_out.transpose();

    for (size_t l = p.layers.size(); l-- > 0;) {
        dh = layer_backward(p.layers[l], cache.layers[l], dh, p.config.n_heads, g.layers[l]);
    }

    if (cache.dropout_mask.size() > 0) {
        dh = dh.cwiseProduct(cache.dropout_mask);
    }
    g.w_in += x.transpose() * dh;
    g.b_in += dh.colwise().sum();
}

} // namespace detail

struct GradResult {
    double mean_loss = 0.0;
    ModelParams grads;
};

// Exact gradient of the mean batch loss. When pe_dropout > 0 the dropout masks
// are drawn from `dropout_seed`, and the returned loss uses the same masks, so
// loss and gradient describe the same stochastic function.
inline GradResult grad(const ModelParams& params, std::span<const ModelSample> batch,
                       uint64_t dropout_seed = 0) {
    if (batch.empty()) throw std::invalid_argument("grad: empty batch");
    GradResult result;
    result.grads = zeros_like(params);
    Rng rng(mix_seed(dropout_seed, 0xd209ULL));
    const bool use_dropout = params.config.pe_dropout > 0.0;

    for (const ModelSample& sample : batch) {
        detail::ForwardCache cache;
        const LogitMatrix logits =
            detail::forward_cached(params, sample.features, use_dropout, &rng, cache);
        result.mean_loss += loss(logits, sample.labels);

        LogitMatrix d_logits = softmax_rows(logits);
        for (int h = 0; h < kHoursPerDay; ++h) {
            d_logits(h, sample.labels[static_cast<size_t>(h)].index()) -= 1.0;
        }
        d_logits /= static_cast<double>(kHoursPerDay);
        detail::backward(params, sample.features, cache, d_logits, result.grads);
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    result.mean_loss *= inv_n;
    result.grads.for_each([&](const std::string&, Eigen::MatrixXd& m) { m *= inv_n; });
    return result;
}

// Mean loss over a sample set with dropout off.
inline double eval_loss(const ModelParams& params, std::span<const ModelSample> samples) {
    if (samples.empty()) throw std::invalid_argument("eval_loss: empty sample set");
    double total = 0.0;
    for (const ModelSample& s : samples) {
        total += loss(forward(params, s), s.labels);
    }
    return total / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0; // decoupled
    int max_epochs = 200;
    int patience = 20; // epochs without validation improvement before stopping
    int batch_size = 0; // 0 = auto: full batch up to 512 samples, else 64
    uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
        if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
        if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    }
};

inline constexpr double kMomentum = 0.9;
inline constexpr int kAutoFullBatchLimit = 512;

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    ModelParams params; // snapshot with the lowest validation loss
    std::vector<EpochStats> history;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
};

// Gradient descent with momentum and decoupled weight decay. After each epoch
// the validation loss is evaluated with dropout off; the returned parameters
// are the snapshot with the minimum validation loss. Training stops early
// after `patience` epochs without improvement, or immediately if the loss
// stops being finite.
inline TrainResult train(const ModelParams& init, std::span<const ModelSample> train_set,
                         std::span<const ModelSample> val_set, const TrainConfig& tcfg) {
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    if (val_set.empty()) throw std::invalid_argument("train: empty validation set");
    tcfg.validate();

    Rng rng(mix_seed(tcfg.seed, 0x7124ULL));
    ModelParams params = init;
    ModelParams velocity = zeros_like(init);
    const auto p_ptrs = tensor_ptrs(params);
    const auto v_ptrs = tensor_ptrs(velocity);

    const int n = static_cast<int>(train_set.size());
    const int batch_size = tcfg.batch_size > 0
                               ? std::min(tcfg.batch_size, n)
                               : (n <= kAutoFullBatchLimit ? n : 64);

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.params = params;
    int stale_epochs = 0;

    for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
        if (batch_size < n) rng.shuffle(order);

        double epoch_loss = 0.0;
        int covered = 0;
        std::vector<ModelSample> scratch;
        for (int start = 0; start < n; start += batch_size) {
            const int count = std::min(batch_size, n - start);
            std::span<const ModelSample> batch;
            if (count == n) {
                batch = train_set;
            } else {
                scratch.clear();
                for (int i = 0; i < count; ++i) {
                    scratch.push_back(train_set[order[static_cast<size_t>(start + i)]]);
                }
                batch = scratch;
            }
            GradResult g = grad(params, batch, rng.next_u64());
            epoch_loss += g.mean_loss * count;
            covered += count;

            const auto g_ptrs = tensor_ptrs(g.grads);
            for (size_t t = 0; t < p_ptrs.size(); ++t) {
                *v_ptrs[t] = kMomentum * *v_ptrs[t] + *g_ptrs[t];
                *p_ptrs[t] -= tcfg.learning_rate * *v_ptrs[t];
                if (tcfg.weight_decay > 0.0) {
                    *p_ptrs[t] -= tcfg.learning_rate * tcfg.weight_decay * *p_ptrs[t];
                }
            }
        }
        epoch_loss /= covered;

        const double val_loss = eval_loss(params, val_set);
        result.history.push_back({epoch_loss, val_loss});

        if (std::isfinite(val_loss) && val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            result.params = params;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
        }
        if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss)) break;
        if (stale_epochs >= tcfg.patience) break;
    }
    return result;
}

} // namespace spreadcast
