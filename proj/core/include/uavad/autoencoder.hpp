#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "uavad/linalg.hpp"
#include "uavad/rng.hpp"

namespace uavad {

// Gate order used for every per-gate array, parameter walk and model file.
inline constexpr std::size_t kGateInput = 0;
inline constexpr std::size_t kGateForget = 1;
inline constexpr std::size_t kGateCell = 2;  // candidate (tanh) gate
inline constexpr std::size_t kGateOutput = 3;
inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "g", "o"};

// One LSTM layer: per gate an input weight [hidden x input], a recurrent
// weight [hidden x hidden] and the two bias vectors.
struct LstmLayerParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::array<Matrix, 4> w_x;
    std::array<Matrix, 4> w_h;
    std::array<Vec, 4> b_x;
    std::array<Vec, 4> b_h;

    // All entries uniform in [-1/sqrt(hidden), +1/sqrt(hidden)].
    static LstmLayerParams init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
};

struct LstmState {
    Vec h;
    Vec c;

    static LstmState zeros(std::size_t hidden_dim) { return {Vec(hidden_dim, 0.0), Vec(hidden_dim, 0.0)}; }
};

// Everything the backward pass needs about one step.
struct LstmGateRecord {
    Vec x, h_prev, c_prev;
    Vec i, f, g, o;
    Vec c, tanh_c;
};

// Single cell update: sigmoid input/forget/output gates, tanh candidate,
// c_t = f*c_{t-1} + i*g, h_t = o*tanh(c_t). Non-finite input is rejected.
LstmState lstm_step(std::span<const double> x, const LstmState& state,
                    const LstmLayerParams& p, LstmGateRecord* record = nullptr);

Vec relu(Vec v);

// Forward cache for one layer over one segment (training only).
struct LayerCache {
    std::vector<LstmGateRecord> steps;
    Matrix raw_h;  // pre-ReLU hidden outputs, used for the backward mask
    bool relu_applied = false;
};

// Runs the layer across a [T x input_dim] sequence. `state` carries in and
// out, which is how segments of one flight stay stitched together.
Matrix run_lstm_sequence(const LstmLayerParams& p, const Matrix& inputs, LstmState& state,
                         bool relu_after, LayerCache* cache = nullptr);

struct SubAutoencoder {
    LstmLayerParams encoder;  // in_dim -> latent_dim
    LstmLayerParams decoder;  // latent_dim -> in_dim
    bool apply_relu_after_encode = true;  // decoder output stays raw

    std::size_t in_dim() const { return encoder.input_dim; }
    std::size_t latent_dim() const { return encoder.hidden_dim; }
};

struct StackedAutoencoder {
    std::vector<std::size_t> dims;  // e.g. {50, 30, 15, 10}
    std::uint64_t init_seed = 0;
    std::vector<SubAutoencoder> stages;  // dims.size() - 1 entries
};

StackedAutoencoder make_stacked(std::span<const std::size_t> dims, std::uint64_t seed);

// Encoder pass over a whole sequence from zero state, ReLU on top.
Matrix encode_sequence(const Matrix& frames, const SubAutoencoder& sub);
// Decoder pass from zero state; output is raw (reconstructions may be
// negative after normalisation).
Matrix decode_sequence(const Matrix& latents, const SubAutoencoder& sub);

// Structural bounds observed during a forward pass: |h| stays below 1 by
// construction and encoder outputs are non-negative. Collected so full
// runs can assert them cheaply.
struct ForwardBounds {
    double max_abs_hidden = 0.0;
    double min_encoded = 0.0;
    void fold(const ForwardBounds& o);
};

struct StackForward {
    Matrix reconstruction;        // [T x dims[0]]
    std::vector<Matrix> latents;  // encoded output per stage: [T x dims[s+1]]
};

// Full pass: encode through every stage, then decode back in reverse.
StackForward forward_stack(const Matrix& frames, const StackedAutoencoder& stack,
                           ForwardBounds* bounds = nullptr);

}  // namespace uavad
