// Hand-rolled tiny networks in double precision: a 31-10-10-1 MLP and a
// Conv1D(9,k3)/MaxPool2/Dropout(0.2)/Dense(6)/Dense(1) CNN, both with a
// sigmoid output trained on clamped binary cross-entropy via Adam. Also the
// standard scaler and the pairwise-distance few-shot head.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fanet/features.hpp"
#include "fanet/rng.hpp"

namespace fanet {

using FeatureRow = std::array<double, kFeatureCount>;
using Matrix = std::vector<FeatureRow>;

inline constexpr double kBceEpsilon = 1e-7;
inline constexpr double kDropoutRate = 0.2;

enum class ArchKind { Mlp, Cnn };

const char* to_string(ArchKind k);
ArchKind arch_kind_from_string(const std::string& s);

// Parameter tensors in a fixed order per architecture:
//   Mlp: W1 10x31, b1 10, W2 10x10, b2 10, W3 1x10, b3 1   (441)
//   Cnn: Wc 9x3, bc 9, Wd 6x126, bd 6, Wo 1x6, bo 1        (805)
struct WeightSet {
    std::vector<std::vector<double>> tensors;

    long param_count() const;
    bool same_shape(const WeightSet& other) const;
    bool all_finite() const;
};

struct Model {
    ArchKind kind = ArchKind::Mlp;
    WeightSet w;
};

// tensor shapes for one architecture, in storage order
std::vector<std::vector<int>> arch_shapes(ArchKind kind);
long arch_param_count(ArchKind kind);

// He-style uniform fan-in init for weights, zero biases; draw order is the
// tensor order, row-major
Model init_model(ArchKind kind, Rng& rng);
WeightSet zeros_like(const WeightSet& w);

// Per-feature standardization fit on training rows only.
struct Scaler {
    FeatureRow mean{};
    FeatureRow std{};
};

Scaler fit_scaler(const Matrix& x);          // population std; constant column -> 1
Matrix transform(const Scaler& s, const Matrix& x);

double sigmoid(double z);

// probabilities in (0,1); rng consumed only when dropout applies (CNN with
// dropout_enabled), one mask per row in row order
std::vector<double> forward(const Model& m, const Matrix& x, bool dropout_enabled,
                            Rng* rng);

// mean clamped-BCE loss over the batch; grads receives the exact analytic
// gradient (same mask policy as forward)
double grad_batch(const Model& m, const Matrix& x, const std::vector<int>& y,
                  WeightSet& grads, bool dropout_enabled, Rng* rng);

// mean clamped-BCE loss without touching gradients or dropout
double eval_loss(const Model& m, const Matrix& x, const std::vector<int>& y);

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long t = 0;
};

AdamState make_adam_state(const WeightSet& w);
// standard Adam, beta1 .9 beta2 .999 eps 1e-8, bias-corrected
void adam_step(WeightSet& w, const WeightSet& grads, AdamState& state, double lr);

struct TrainConfig {
    double learning_rate = 0.003;
    int batch_size = 5;
    int epochs = 1;
    bool dropout_enabled = true;
    std::uint64_t seed = 0;
    // shuffle/dropout streams are keyed by seed and this plus the epoch
    // index, so federated rounds continue one global epoch sequence
    long first_epoch_index = 0;
};

// seeded shuffle, batches of batch_size (last ragged), one adam step per
// batch; returns mean per-sample loss per epoch
std::vector<double> train_epochs(Model& m, AdamState& state, const Matrix& x,
                                 const std::vector<int>& y, const TrainConfig& cfg);

// activations of the last hidden layer, dropout off (Mlp: 10, Cnn: 6)
std::vector<double> embed(const Model& m, const FeatureRow& x);

// squared Euclidean distance between embeddings
double pairwise_distance(const std::vector<double>& a, const std::vector<double>& b);

// scalar head mapping a distance to a same-class probability
struct FcHead {
    double w = 0.0;
    double b = 0.0;
};

double pair_probability(const FcHead& head, double distance);
double pair_probability(const Model& body, const FcHead& head, const FeatureRow& xi,
                        const FeatureRow& xj);

// text checkpoint: header line "<arch> <param count>", then one line per
// tensor with its values; round-trips exactly
void save_weights(const Model& m, const std::string& path);
Model load_weights(const std::string& path);

}  // namespace fanet
