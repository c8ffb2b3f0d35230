#include "uavad/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "uavad/errors.hpp"

namespace uavad {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void gate_preactivation(const LstmLayerParams& p, std::size_t gate, std::span<const double> x,
                        std::span<const double> h_prev, Vec& out) {
    out = p.b_x[gate];
    axpy(1.0, p.b_h[gate], out);
    matvec_add(p.w_x[gate], x, out);
    matvec_add(p.w_h[gate], h_prev, out);
}

}  // namespace

LstmLayerParams LstmLayerParams::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    LstmLayerParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (std::size_t g = 0; g < 4; ++g) {
        p.w_x[g] = Matrix(hidden_dim, input_dim);
        p.w_h[g] = Matrix(hidden_dim, hidden_dim);
        p.b_x[g].assign(hidden_dim, 0.0);
        p.b_h[g].assign(hidden_dim, 0.0);
        for (double& w : p.w_x[g].flat()) w = rng.uniform(-bound, bound);
        for (double& w : p.w_h[g].flat()) w = rng.uniform(-bound, bound);
        for (double& b : p.b_x[g]) b = rng.uniform(-bound, bound);
        for (double& b : p.b_h[g]) b = rng.uniform(-bound, bound);
    }
    return p;
}

LstmState lstm_step(std::span<const double> x, const LstmState& state, const LstmLayerParams& p,
                    LstmGateRecord* record) {
    if (x.size() != p.input_dim)
        throw DataError("lstm_step input has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(p.input_dim));
    if (state.h.size() != p.hidden_dim || state.c.size() != p.hidden_dim)
        throw DataError("lstm_step state dimension mismatch");
    if (!all_finite(x)) throw NumericError("lstm_step input is not finite");

    const std::size_t h = p.hidden_dim;
    Vec ai(h), af(h), ag(h), ao(h);
    gate_preactivation(p, kGateInput, x, state.h, ai);
    gate_preactivation(p, kGateForget, x, state.h, af);
    gate_preactivation(p, kGateCell, x, state.h, ag);
    gate_preactivation(p, kGateOutput, x, state.h, ao);

    LstmState next;
    next.h.resize(h);
    next.c.resize(h);
    Vec gi(h), gf(h), gg(h), go(h), tanh_c(h);
    for (std::size_t j = 0; j < h; ++j) {
        gi[j] = sigmoid(ai[j]);
        gf[j] = sigmoid(af[j]);
        gg[j] = std::tanh(ag[j]);
        go[j] = sigmoid(ao[j]);
        next.c[j] = gf[j] * state.c[j] + gi[j] * gg[j];
        tanh_c[j] = std::tanh(next.c[j]);
        next.h[j] = go[j] * tanh_c[j];
    }

    if (record) {
        record->x.assign(x.begin(), x.end());
        record->h_prev = state.h;
        record->c_prev = state.c;
        record->i = std::move(gi);
        record->f = std::move(gf);
        record->g = std::move(gg);
        record->o = std::move(go);
        record->c = next.c;
        record->tanh_c = std::move(tanh_c);
    }
    return next;
}

Vec relu(Vec v) {
    for (double& x : v) x = std::max(0.0, x);
    return v;
}

Matrix run_lstm_sequence(const LstmLayerParams& p, const Matrix& inputs, LstmState& state,
                         bool relu_after, LayerCache* cache) {
    if (inputs.cols() != p.input_dim)
        throw DataError("sequence input has dimension " + std::to_string(inputs.cols()) +
                        ", expected " + std::to_string(p.input_dim));
    const std::size_t T = inputs.rows();
    Matrix out(T, p.hidden_dim);
    if (cache) {
        cache->steps.resize(T);
        cache->raw_h = Matrix(T, p.hidden_dim);
        cache->relu_applied = relu_after;
    }
    for (std::size_t t = 0; t < T; ++t) {
        state = lstm_step(inputs.row(t), state, p, cache ? &cache->steps[t] : nullptr);
        auto row = out.row(t);
        for (std::size_t j = 0; j < p.hidden_dim; ++j) {
            const double raw = state.h[j];
            if (cache) cache->raw_h(t, j) = raw;
            row[j] = relu_after ? std::max(0.0, raw) : raw;
        }
    }
    return out;
}

StackedAutoencoder make_stacked(std::span<const std::size_t> dims, std::uint64_t seed) {
    if (dims.size() < 2) throw DataError("stacked autoencoder needs at least 2 dimensions");
    for (std::size_t d : dims)
        if (d == 0) throw DataError("stacked autoencoder dimensions must be positive");

    StackedAutoencoder stack;
    stack.dims.assign(dims.begin(), dims.end());
    stack.init_seed = seed;
    Rng rng(seed);
    for (std::size_t s = 0; s + 1 < dims.size(); ++s) {
        SubAutoencoder sub;
        sub.encoder = LstmLayerParams::init(dims[s], dims[s + 1], rng);
        sub.decoder = LstmLayerParams::init(dims[s + 1], dims[s], rng);
        stack.stages.push_back(std::move(sub));
    }
    return stack;
}

Matrix encode_sequence(const Matrix& frames, const SubAutoencoder& sub) {
    LstmState state = LstmState::zeros(sub.latent_dim());
    return run_lstm_sequence(sub.encoder, frames, state, sub.apply_relu_after_encode);
}

Matrix decode_sequence(const Matrix& latents, const SubAutoencoder& sub) {
    LstmState state = LstmState::zeros(sub.in_dim());
    return run_lstm_sequence(sub.decoder, latents, state, false);
}

void ForwardBounds::fold(const ForwardBounds& o) {
    max_abs_hidden = std::max(max_abs_hidden, o.max_abs_hidden);
    min_encoded = std::min(min_encoded, o.min_encoded);
}

namespace {

void track_hidden(const Matrix& raw, ForwardBounds* bounds) {
    if (!bounds) return;
    for (double v : raw.flat()) bounds->max_abs_hidden = std::max(bounds->max_abs_hidden, std::abs(v));
}

void track_encoded(const Matrix& encoded, ForwardBounds* bounds) {
    if (!bounds) return;
    for (double v : encoded.flat()) bounds->min_encoded = std::min(bounds->min_encoded, v);
}

}  // namespace

StackForward forward_stack(const Matrix& frames, const StackedAutoencoder& stack,
                           ForwardBounds* bounds) {
    if (stack.stages.empty()) throw DataError("stacked autoencoder has no stages");
    if (frames.cols() != stack.stages.front().in_dim())
        throw DataError("stack input has dimension " + std::to_string(frames.cols()) + ", expected " +
                        std::to_string(stack.stages.front().in_dim()));

    StackForward out;
    const Matrix* current = &frames;
    for (const SubAutoencoder& sub : stack.stages) {
        LstmState state = LstmState::zeros(sub.latent_dim());
        LayerCache cache;
        Matrix encoded = run_lstm_sequence(sub.encoder, *current, state,
                                           sub.apply_relu_after_encode, bounds ? &cache : nullptr);
        if (bounds) {
            track_hidden(cache.raw_h, bounds);
            track_encoded(encoded, bounds);
        }
        out.latents.push_back(std::move(encoded));
        current = &out.latents.back();
    }

    Matrix decoded = out.latents.back();
    for (std::size_t s = stack.stages.size(); s-- > 0;) {
        const SubAutoencoder& sub = stack.stages[s];
        LstmState state = LstmState::zeros(sub.in_dim());
        decoded = run_lstm_sequence(sub.decoder, decoded, state, false);
        if (bounds) track_hidden(decoded, bounds);
    }
    out.reconstruction = std::move(decoded);
    return out;
}

}  // namespace uavad
