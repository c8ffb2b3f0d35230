#include "uavad/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uavad/errors.hpp"

namespace uavad {

// ---- losses ---------------------------------------------------------------

double mse(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw DataError("mse requires equal, non-empty vectors (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s / static_cast<double>(x.size());
}

Vec weight_factor(std::span<const double> x_in, std::span<const double> x_rec, double c) {
    if (x_in.size() != x_rec.size()) throw DataError("weight_factor requires equal lengths");
    if (!(c > 0.0)) throw DataError("weight_factor threshold c must be positive");
    Vec w(x_in.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double e = std::abs(x_rec[i] - x_in[i]);
        w[i] = (e <= c) ? e / 2.0 : e;
    }
    return w;
}

double weighted_loss(std::span<const double> x_in, std::span<const double> x_rec,
                     const WeightedLossConfig& cfg, std::size_t stage) {
    if (!cfg.enabled) return mse(x_in, x_rec);
    if (stage >= cfg.c_per_stage.size()) throw DataError("weighted loss stage index out of range");
    const Vec w = weight_factor(x_in, x_rec, cfg.c_per_stage[stage]);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = x_in[i] - x_rec[i];
        s += w[i] * d * d;
    }
    return s / static_cast<double>(x_in.size());
}

namespace {

double frame_loss(std::span<const double> x, std::span<const double> y, bool weighted, double c) {
    if (!weighted) return mse(x, y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = y[i] - x[i];
        const double e = std::abs(d);
        const double w = (e <= c) ? e / 2.0 : e;
        s += w * d * d;
    }
    return s / static_cast<double>(x.size());
}

}  // namespace

double sequence_loss(const Matrix& input, const Matrix& recon, bool weighted, double c) {
    if (!input.same_shape(recon)) throw DataError("sequence_loss shape mismatch");
    if (input.rows() == 0) throw DataError("sequence_loss needs at least one frame");
    double s = 0.0;
    for (std::size_t t = 0; t < input.rows(); ++t)
        s += frame_loss(input.row(t), recon.row(t), weighted, c);
    return s / static_cast<double>(input.rows());
}

double sequence_loss_frozen(const Matrix& input, const Matrix& recon, const Matrix& weights) {
    if (!input.same_shape(recon) || !input.same_shape(weights))
        throw DataError("sequence_loss_frozen shape mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < input.rows(); ++t) {
        double f = 0.0;
        for (std::size_t i = 0; i < input.cols(); ++i) {
            const double d = input(t, i) - recon(t, i);
            f += weights(t, i) * d * d;
        }
        s += f / static_cast<double>(input.cols());
    }
    return s / static_cast<double>(input.rows());
}

// ---- gradients ------------------------------------------------------------

LstmLayerGrads LstmLayerGrads::zeros_like(const LstmLayerParams& p) {
    LstmLayerGrads g;
    for (std::size_t i = 0; i < 4; ++i) {
        g.w_x[i] = Matrix(p.hidden_dim, p.input_dim);
        g.w_h[i] = Matrix(p.hidden_dim, p.hidden_dim);
        g.b_x[i].assign(p.hidden_dim, 0.0);
        g.b_h[i].assign(p.hidden_dim, 0.0);
    }
    return g;
}

void LstmLayerGrads::clear() {
    for (std::size_t i = 0; i < 4; ++i) {
        std::fill(w_x[i].flat().begin(), w_x[i].flat().end(), 0.0);
        std::fill(w_h[i].flat().begin(), w_h[i].flat().end(), 0.0);
        std::fill(b_x[i].begin(), b_x[i].end(), 0.0);
        std::fill(b_h[i].begin(), b_h[i].end(), 0.0);
    }
}

Matrix backprop_lstm_sequence(const LstmLayerParams& p, const LayerCache& cache,
                              const Matrix& d_out, LstmLayerGrads& grads) {
    const std::size_t T = cache.steps.size();
    const std::size_t H = p.hidden_dim;
    if (d_out.rows() != T || d_out.cols() != H) throw DataError("backprop d_out shape mismatch");

    Matrix d_inputs(T, p.input_dim);
    Vec dh_next(H, 0.0), dc_next(H, 0.0);
    Vec dh(H), dc(H);
    std::array<Vec, 4> da;  // pre-activation grads, gate order i,f,g,o
    for (auto& v : da) v.resize(H);

    for (std::size_t t = T; t-- > 0;) {
        const LstmGateRecord& r = cache.steps[t];
        for (std::size_t j = 0; j < H; ++j) {
            double g_out = d_out(t, j);
            if (cache.relu_applied && cache.raw_h(t, j) <= 0.0) g_out = 0.0;
            dh[j] = g_out + dh_next[j];
            const double tc = r.tanh_c[j];
            dc[j] = dh[j] * r.o[j] * (1.0 - tc * tc) + dc_next[j];

            const double d_o = dh[j] * tc;
            const double d_f = dc[j] * r.c_prev[j];
            const double d_i = dc[j] * r.g[j];
            const double d_g = dc[j] * r.i[j];
            da[kGateInput][j] = d_i * r.i[j] * (1.0 - r.i[j]);
            da[kGateForget][j] = d_f * r.f[j] * (1.0 - r.f[j]);
            da[kGateCell][j] = d_g * (1.0 - r.g[j] * r.g[j]);
            da[kGateOutput][j] = d_o * r.o[j] * (1.0 - r.o[j]);

            dc_next[j] = dc[j] * r.f[j];
        }

        auto dx = d_inputs.row(t);
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (std::size_t g = 0; g < 4; ++g) {
            outer_add(grads.w_x[g], da[g], r.x);
            outer_add(grads.w_h[g], da[g], r.h_prev);
            axpy(1.0, da[g], grads.b_x[g]);
            axpy(1.0, da[g], grads.b_h[g]);
            matvec_transpose_add(p.w_x[g], da[g], dx);
            matvec_transpose_add(p.w_h[g], da[g], dh_next);
        }
    }
    return d_inputs;
}

// ---- SGD ------------------------------------------------------------------

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size()) throw DataError("sgd_step size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void sgd_step(LstmLayerParams& p, const LstmLayerGrads& g, double lr) {
    for (std::size_t i = 0; i < 4; ++i) {
        sgd_step(p.w_x[i].flat(), g.w_x[i].flat(), lr);
        sgd_step(p.w_h[i].flat(), g.w_h[i].flat(), lr);
        sgd_step(std::span(p.b_x[i]), std::span(g.b_x[i]), lr);
        sgd_step(std::span(p.b_h[i]), std::span(g.b_h[i]), lr);
    }
}

// ---- forward/backward over a layer chain ----------------------------------

namespace {

// One LSTM layer participating in a training pass, with its carried state.
struct LayerSlot {
    LstmLayerParams* params = nullptr;
    bool relu = false;
    std::string name;
    LstmState state;
    LstmLayerGrads grads;
    LayerCache cache;

    void reset_state() { state = LstmState::zeros(params->hidden_dim); }
};

// Loss gradient w.r.t. the reconstruction; the focusing weight is frozen.
Matrix loss_gradient(const Matrix& input, const Matrix& recon, bool weighted, double c) {
    Matrix d(recon.rows(), recon.cols());
    const double scale = 2.0 / (static_cast<double>(recon.rows()) * static_cast<double>(recon.cols()));
    for (std::size_t t = 0; t < recon.rows(); ++t) {
        for (std::size_t i = 0; i < recon.cols(); ++i) {
            const double diff = recon(t, i) - input(t, i);
            double w = 1.0;
            if (weighted) {
                const double e = std::abs(diff);
                w = (e <= c) ? e / 2.0 : e;
            }
            d(t, i) = scale * w * diff;
        }
    }
    return d;
}

// Forward through the chain (caching), loss against the segment itself,
// then reverse accumulation into each slot's grads.
double forward_backward_segment(std::vector<LayerSlot>& layers, const Matrix& segment,
                                bool weighted, double c) {
    std::vector<Matrix> outputs;
    outputs.reserve(layers.size());
    const Matrix* cur = &segment;
    for (LayerSlot& slot : layers) {
        outputs.push_back(
            run_lstm_sequence(*slot.params, *cur, slot.state, slot.relu, &slot.cache));
        cur = &outputs.back();
    }

    const Matrix& recon = outputs.back();
    const double loss = sequence_loss(segment, recon, weighted, c);
    Matrix d = loss_gradient(segment, recon, weighted, c);
    for (std::size_t l = layers.size(); l-- > 0;)
        d = backprop_lstm_sequence(*layers[l].params, layers[l].cache, d, layers[l].grads);
    return loss;
}

void check_grads_finite(const std::vector<LayerSlot>& layers, int phase, int epoch) {
    for (const LayerSlot& slot : layers) {
        walk_layer_tensors(slot.grads, slot.name, [&](const std::string& name,
                                                      std::span<const double> data) {
            if (!all_finite(data))
                throw NumericError("phase " + std::to_string(phase) + " epoch " +
                                   std::to_string(epoch) + ": non-finite gradient in " + name);
        });
    }
}

Matrix copy_rows(const Matrix& m, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols());
    for (std::size_t r = begin; r < end; ++r)
        std::copy(m.row(r).begin(), m.row(r).end(), out.row(r - begin).begin());
    return out;
}

// One training phase over its input sequences. Updates apply after every
// segment; states persist across a flight's segments and reset per flight.
void train_phase(std::vector<LayerSlot>& layers, std::span<const Matrix* const> sequences,
                 int phase, int epochs, double lr, bool weighted, double c, int bptt_window,
                 std::vector<LossHistoryRow>& history) {
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t frames = 0;
        for (const Matrix* seq : sequences) {
            for (LayerSlot& slot : layers) slot.reset_state();
            const std::size_t T = seq->rows();
            for (std::size_t begin = 0; begin < T; begin += static_cast<std::size_t>(bptt_window)) {
                const std::size_t end = std::min(T, begin + static_cast<std::size_t>(bptt_window));
                const Matrix segment = copy_rows(*seq, begin, end);
                for (LayerSlot& slot : layers) slot.grads.clear();
                const double seg_loss = forward_backward_segment(layers, segment, weighted, c);
                if (!std::isfinite(seg_loss))
                    throw NumericError("phase " + std::to_string(phase) + " epoch " +
                                       std::to_string(epoch) + ": loss is not finite");
                check_grads_finite(layers, phase, epoch);
                for (LayerSlot& slot : layers) sgd_step(*slot.params, slot.grads, lr);
                loss_sum += seg_loss * static_cast<double>(end - begin);
                frames += end - begin;
            }
        }
        history.push_back({phase, epoch, loss_sum / static_cast<double>(frames)});
    }
}

}  // namespace

SubAeGrads bptt_subautoencoder(const SubAutoencoder& sub, const Matrix& seq, bool weighted,
                               double c, double* loss_out) {
    // The pass never mutates params; the slots just need non-const handles.
    auto& mutable_sub = const_cast<SubAutoencoder&>(sub);
    std::vector<LayerSlot> layers(2);
    layers[0] = {&mutable_sub.encoder, sub.apply_relu_after_encode, "enc", {}, LstmLayerGrads::zeros_like(sub.encoder), {}};
    layers[1] = {&mutable_sub.decoder, false, "dec", {}, LstmLayerGrads::zeros_like(sub.decoder), {}};
    for (auto& slot : layers) slot.reset_state();
    const double loss = forward_backward_segment(layers, seq, weighted, c);
    if (loss_out) *loss_out = loss;
    return {std::move(layers[0].grads), std::move(layers[1].grads)};
}

std::vector<SubAeGrads> bptt_stack(const StackedAutoencoder& stack, const Matrix& seq,
                                   bool weighted, double c, double* loss_out) {
    auto& mutable_stack = const_cast<StackedAutoencoder&>(stack);
    std::vector<LayerSlot> layers;
    for (std::size_t s = 0; s < stack.stages.size(); ++s) {
        SubAutoencoder& sub = mutable_stack.stages[s];
        layers.push_back({&sub.encoder, sub.apply_relu_after_encode, "stage" + std::to_string(s) + ".enc",
                          {}, LstmLayerGrads::zeros_like(sub.encoder), {}});
    }
    for (std::size_t s = stack.stages.size(); s-- > 0;) {
        SubAutoencoder& sub = mutable_stack.stages[s];
        layers.push_back({&sub.decoder, false, "stage" + std::to_string(s) + ".dec", {},
                          LstmLayerGrads::zeros_like(sub.decoder), {}});
    }
    for (auto& slot : layers) slot.reset_state();
    const double loss = forward_backward_segment(layers, seq, weighted, c);
    if (loss_out) *loss_out = loss;

    std::vector<SubAeGrads> out(stack.stages.size());
    const std::size_t n = stack.stages.size();
    for (std::size_t s = 0; s < n; ++s) {
        out[s].encoder = std::move(layers[s].grads);
        out[s].decoder = std::move(layers[2 * n - 1 - s].grads);
    }
    return out;
}

// ---- greedy schedule --------------------------------------------------------

Vec reconstruction_losses(const StackedAutoencoder& stack, const Matrix& frames,
                          ForwardBounds* bounds) {
    const StackForward fwd = forward_stack(frames, stack, bounds);
    Vec losses(frames.rows());
    for (std::size_t t = 0; t < frames.rows(); ++t)
        losses[t] = mse(frames.row(t), fwd.reconstruction.row(t));
    return losses;
}

TrainResult train_greedy(StackedAutoencoder& stack, const std::vector<FrameSeries>& train_flights,
                         const TrainingSchedule& schedule, const WeightedLossConfig& loss_cfg) {
    if (train_flights.empty()) throw DataError("training needs at least one flight");
    if (stack.stages.empty()) throw DataError("stacked autoencoder has no stages");
    for (const FrameSeries& f : train_flights) {
        if (f.feature_count() != stack.dims.front())
            throw DataError("flight " + f.flight_id + " has " + std::to_string(f.feature_count()) +
                            " features, model expects " + std::to_string(stack.dims.front()));
        if (f.frame_count() == 0) throw DataError("flight " + f.flight_id + " has no frames");
    }
    for (int e : schedule.stage_epochs)
        if (e <= 0) throw DataError("stage epochs must be positive");
    if (schedule.bptt_window <= 0) throw DataError("bptt window must be positive");
    const double greedy_min = std::min({schedule.stage_learning_rates[0],
                                        schedule.stage_learning_rates[1],
                                        schedule.stage_learning_rates[2]});
    if (!(schedule.stage_learning_rates[3] < greedy_min))
        throw DataError("fine-tune learning rate must be below the greedy learning rates");

    TrainResult result;

    // Greedy phases: stage s trains on the previous stages' encoded output.
    std::vector<Matrix> stage_inputs;
    stage_inputs.reserve(train_flights.size());
    for (const FrameSeries& f : train_flights) stage_inputs.push_back(f.frames);

    const std::size_t n_greedy = stack.stages.size();
    for (std::size_t s = 0; s < n_greedy; ++s) {
        const int phase = static_cast<int>(s) + 1;
        SubAutoencoder& sub = stack.stages[s];
        std::vector<LayerSlot> layers(2);
        layers[0] = {&sub.encoder, sub.apply_relu_after_encode, "stage" + std::to_string(s) + ".enc",
                     {}, LstmLayerGrads::zeros_like(sub.encoder), {}};
        layers[1] = {&sub.decoder, false, "stage" + std::to_string(s) + ".dec", {},
                     LstmLayerGrads::zeros_like(sub.decoder), {}};

        std::vector<const Matrix*> seq_ptrs;
        seq_ptrs.reserve(stage_inputs.size());
        for (const Matrix& m : stage_inputs) seq_ptrs.push_back(&m);

        const std::size_t c_index = std::min<std::size_t>(s, loss_cfg.c_per_stage.size() - 1);
        train_phase(layers, seq_ptrs, phase, schedule.stage_epochs[std::min<std::size_t>(s, 3)],
                    schedule.stage_learning_rates[std::min<std::size_t>(s, 3)], loss_cfg.enabled,
                    loss_cfg.c_per_stage[c_index], schedule.bptt_window, result.history);

        if (s + 1 < n_greedy) {
            for (Matrix& m : stage_inputs) m = encode_sequence(m, sub);
        }
    }

    // Fine-tune the whole stack end to end at the lower rate.
    {
        std::vector<LayerSlot> layers;
        for (std::size_t s = 0; s < stack.stages.size(); ++s) {
            SubAutoencoder& sub = stack.stages[s];
            layers.push_back({&sub.encoder, sub.apply_relu_after_encode,
                              "stage" + std::to_string(s) + ".enc", {},
                              LstmLayerGrads::zeros_like(sub.encoder), {}});
        }
        for (std::size_t s = stack.stages.size(); s-- > 0;) {
            SubAutoencoder& sub = stack.stages[s];
            layers.push_back({&sub.decoder, false, "stage" + std::to_string(s) + ".dec", {},
                              LstmLayerGrads::zeros_like(sub.decoder), {}});
        }
        std::vector<const Matrix*> seq_ptrs;
        seq_ptrs.reserve(train_flights.size());
        for (const FrameSeries& f : train_flights) seq_ptrs.push_back(&f.frames);
        train_phase(layers, seq_ptrs, 4, schedule.stage_epochs[3], schedule.stage_learning_rates[3],
                    loss_cfg.enabled, loss_cfg.c_per_stage[3], schedule.bptt_window, result.history);
    }

    // Threshold statistics: per-frame plain-MSE losses of the final model
    // over the full training corpus.
    double sum = 0.0;
    std::size_t count = 0;
    for (const FrameSeries& f : train_flights) {
        Vec losses = reconstruction_losses(stack, f.frames);
        for (double l : losses) sum += l;
        count += losses.size();
        result.stats.flight_ids.push_back(f.flight_id);
        result.stats.per_frame_losses.push_back(std::move(losses));
    }
    result.stats.mean = sum / static_cast<double>(count);
    double var = 0.0;
    for (const Vec& trace : result.stats.per_frame_losses)
        for (double l : trace) var += (l - result.stats.mean) * (l - result.stats.mean);
    result.stats.stddev = std::sqrt(var / static_cast<double>(count));
    return result;
}

}  // namespace uavad
