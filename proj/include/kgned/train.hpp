#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kgned/model.hpp"

namespace kgned {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 16;
    std::size_t epochs = 10;
    std::uint64_t seed = 13;
    double clip_norm = 1.0;  ///< global gradient norm cap; <= 0 disables clipping
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct LabeledInput {
    AssembledInput input;
    int label = 0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;        ///< mean loss over the training data, dropout off, after the epoch
    double accuracy = 0.0;    ///< threshold 0.5, same pass
    double train_loss = 0.0;  ///< mean minibatch loss seen while training (dropout on)
};

/// Adam with bias correction over a flat parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n_params, const TrainConfig& cfg);
    void step(std::span<double> params, std::span<const double> grad);
    std::size_t steps() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

/// Scales `grad` so its L2 norm is at most `max_norm`. Returns the norm before clipping.
double clip_gradient(std::span<double> grad, double max_norm);

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch training with BCE loss. Shuffling and dropout draw from
/// generators seeded by `cfg.seed`, so equal inputs give bitwise-equal runs.
/// Throws TrainingAborted naming the epoch and batch if the loss turns non-finite.
std::vector<EpochStats> train(Classifier& model, std::span<const LabeledInput> data,
                              const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Mean loss and accuracy of `model` over `data` in eval mode.
EpochStats evaluate(const Classifier& model, std::span<const LabeledInput> data);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t probes = 0;
    std::string worst_param;
};

struct GradCheckOptions {
    std::size_t n_probes = 100;
    std::size_t n_inputs = 2;
    std::size_t seq_len = 8;
    double step = 1e-4;
    std::uint64_t seed = 7;
    /// Restrict probes to parameters whose name starts with this prefix.
    std::string only_prefix;
};

/// Compares the analytic gradient of the summed BCE loss over a few random
/// inputs against central finite differences at randomly chosen parameters.
/// Dropout is disabled. Relative error is |a - n| / max(|a|, |n|), or the
/// absolute difference when both are below 1e-8.
GradCheckReport grad_check(Classifier& model, const GradCheckOptions& options);

/// Builds a freshly initialized model from `config` and checks it.
GradCheckReport grad_check(const ModelConfig& config, const GradCheckOptions& options);

}  // namespace kgned
