#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavad/autoencoder.hpp"
#include "uavad/ingest.hpp"
#include "uavad/linalg.hpp"

namespace uavad {

// ---- losses ---------------------------------------------------------------

double mse(std::span<const double> x, std::span<const double> y);

// Piecewise focusing weight per element e = |x_r - x_i|:
// e/2 when e <= c (well-learned instance), e otherwise.
Vec weight_factor(std::span<const double> x_in, std::span<const double> x_rec, double c);

struct WeightedLossConfig {
    bool enabled = false;
    std::array<double, 4> c_per_stage = {0.5, 0.12, 0.02, 0.8};
};

// Per-element squared errors scaled by the focusing weight, then averaged.
// Falls back to plain MSE when the config is disabled.
double weighted_loss(std::span<const double> x_in, std::span<const double> x_rec,
                     const WeightedLossConfig& cfg, std::size_t stage);

// Mean over frames of the per-frame loss. The weight factor, when active,
// is treated as a constant during differentiation (it focuses learning,
// it is not a target), so gradients below differentiate exactly this with
// the weights frozen at their forward values.
double sequence_loss(const Matrix& input, const Matrix& recon, bool weighted, double c);
// Same loss with explicitly pinned per-element weights; this is what
// finite-difference checks perturb around.
double sequence_loss_frozen(const Matrix& input, const Matrix& recon, const Matrix& weights);

// ---- gradients ------------------------------------------------------------

struct LstmLayerGrads {
    std::array<Matrix, 4> w_x;
    std::array<Matrix, 4> w_h;
    std::array<Vec, 4> b_x;
    std::array<Vec, 4> b_h;

    static LstmLayerGrads zeros_like(const LstmLayerParams& p);
    void clear();
};

// Reverse pass over one cached segment. d_out is the loss gradient w.r.t.
// the layer's (post-ReLU when applicable) outputs; returns the gradient
// w.r.t. the layer's inputs and accumulates parameter gradients.
Matrix backprop_lstm_sequence(const LstmLayerParams& p, const LayerCache& cache,
                              const Matrix& d_out, LstmLayerGrads& grads);

struct SubAeGrads {
    LstmLayerGrads encoder;
    LstmLayerGrads decoder;
};

// Single-segment BPTT from zero initial state: forward, loss, exact
// reverse-mode gradients for every weight and bias.
SubAeGrads bptt_subautoencoder(const SubAutoencoder& sub, const Matrix& seq, bool weighted,
                               double c, double* loss_out = nullptr);
std::vector<SubAeGrads> bptt_stack(const StackedAutoencoder& stack, const Matrix& seq,
                                   bool weighted, double c, double* loss_out = nullptr);

// ---- parameter walking ----------------------------------------------------

// Fixed tensor order shared by SGD, serialization and the gradient checks:
// per gate i,f,g,o first all w_x, then w_h, then b_x, then b_h.
template <class LayerLike, class Fn>
void walk_layer_tensors(LayerLike& layer, const std::string& prefix, Fn&& fn) {
    for (std::size_t g = 0; g < 4; ++g) fn(prefix + ".w_x." + kGateNames[g], layer.w_x[g].flat());
    for (std::size_t g = 0; g < 4; ++g) fn(prefix + ".w_h." + kGateNames[g], layer.w_h[g].flat());
    for (std::size_t g = 0; g < 4; ++g)
        fn(prefix + ".b_x." + kGateNames[g], std::span(layer.b_x[g]));
    for (std::size_t g = 0; g < 4; ++g)
        fn(prefix + ".b_h." + kGateNames[g], std::span(layer.b_h[g]));
}

template <class SubLike, class Fn>
void walk_subae_tensors(SubLike& sub, const std::string& prefix, Fn&& fn) {
    walk_layer_tensors(sub.encoder, prefix + ".enc", fn);
    walk_layer_tensors(sub.decoder, prefix + ".dec", fn);
}

// ---- SGD ------------------------------------------------------------------

void sgd_step(std::span<double> params, std::span<const double> grads, double lr);
void sgd_step(LstmLayerParams& p, const LstmLayerGrads& g, double lr);

// ---- greedy layer-wise training --------------------------------------------

struct TrainingSchedule {
    std::array<int, 4> stage_epochs = {5000, 5000, 5000, 2000};
    // Greedy phases, then a lower fine-tuning rate.
    std::array<double, 4> stage_learning_rates = {1e-3, 1e-3, 1e-3, 1e-4};
    std::uint64_t seed = 0;
    int bptt_window = 50;
};

// Mean/std (denominator n) of per-frame full-stack plain-MSE losses over
// the whole training corpus, recomputed on the final model. These feed the
// detection thresholds, so they use plain MSE regardless of how training
// was weighted.
struct TrainLossStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<std::string> flight_ids;
    std::vector<Vec> per_frame_losses;  // aligned with flight_ids
};

struct LossHistoryRow {
    int phase = 0;  // 1..4
    int epoch = 0;  // 1-based within phase
    double mean_loss = 0.0;
};

struct TrainResult {
    TrainLossStats stats;
    std::vector<LossHistoryRow> history;
};

// Phases 1-3 train each sub-autoencoder greedily on the (frozen) encoded
// output of the previous stages; phase 4 fine-tunes the whole stack.
// Updates apply per truncated-BPTT segment; layer states carry across
// segments within a flight and reset between flights.
TrainResult train_greedy(StackedAutoencoder& stack, const std::vector<FrameSeries>& train_flights,
                         const TrainingSchedule& schedule, const WeightedLossConfig& loss_cfg);

// Per-frame plain-MSE reconstruction losses of one flight under the
// current model (continuous forward pass, zero initial state).
Vec reconstruction_losses(const StackedAutoencoder& stack, const Matrix& frames,
                          ForwardBounds* bounds = nullptr);

}  // namespace uavad
