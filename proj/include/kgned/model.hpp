#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgned/candidates.hpp"
#include "kgned/tokenize.hpp"

namespace kgned {

struct ModelConfig {
    std::size_t vocab_size = kReservedCount;
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t ffn_dim = 128;
    std::size_t n_segments = 17;  ///< 2 + max_triples
    std::size_t max_seq_len = 512;
    double dropout = 0.1;

    /// Throws InputError on zero dimensions, d_model % n_heads != 0 or a
    /// dropout rate outside [0, 1).
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named view into the flat parameter vector.
struct ParamSlot {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const noexcept { return rows * cols; }
};

/// Pre-norm transformer encoder with a sigmoid head on the [CLS] position.
///
/// Input embedding is token + position + segment. Each layer applies
/// x += attn(LN(x)); x += ffn(LN(x)) with a GELU feed-forward block; a final
/// layer norm precedes the linear head. Masked positions are dropped before
/// the encoder runs, so they cannot influence the output.
///
/// All parameters live in one contiguous vector of doubles.
class Classifier {
public:
    explicit Classifier(ModelConfig config);

    /// Seeded initialization: Xavier-normal matrices, N(0, 0.02) embeddings,
    /// unit layer-norm gains, zero biases.
    void init(std::uint64_t seed);

    const ModelConfig& config() const noexcept { return config_; }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    const std::vector<ParamSlot>& slots() const noexcept { return slots_; }
    const ParamSlot& slot(const std::string& name) const;

    /// Pre-sigmoid score. Throws InputError for ids outside the vocab or
    /// segment table, mismatched array sizes, or a masked [CLS] position.
    double logit(const AssembledInput& input) const;

    /// h(X) = P(Y = 1 | X), strictly inside (0, 1) for finite logits.
    double forward(const AssembledInput& input) const;

    /// Runs forward and backward for one labeled input and adds
    /// `weight * dLoss/dParams` into `grad`. Dropout is applied when
    /// `dropout_rng` is non-null. Returns the unweighted loss.
    double accumulate_gradient(const AssembledInput& input, int label, double weight,
                               std::span<double> grad, std::mt19937_64* dropout_rng) const;

    bool all_finite() const;

private:
    struct LayerSlots {
        std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
        std::size_t ln2_g, ln2_b, w1, b1, w2, b2;
    };

    std::size_t add_slot(std::string name, std::size_t rows, std::size_t cols);
    double run(const AssembledInput& input, int label, double weight, std::span<double>* grad,
               std::mt19937_64* dropout_rng) const;

    ModelConfig config_;
    std::vector<ParamSlot> slots_;
    std::vector<LayerSlots> layers_;
    std::size_t tok_emb_ = 0, pos_emb_ = 0, seg_emb_ = 0;
    std::size_t lnf_g_ = 0, lnf_b_ = 0, head_w_ = 0, head_b_ = 0;
    std::vector<double> params_;
};

double sigmoid(double x);

/// -[y log p + (1 - y) log(1 - p)] with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double probability, int label);

/// The same loss evaluated stably from the pre-sigmoid score.
double bce_loss_from_logit(double logit, int label);

/// Mean of per-example losses.
double mean_bce_loss(std::span<const double> probabilities, std::span<const int> labels);

struct Prediction {
    std::optional<EntityId> chosen;  ///< empty when there were no candidates
    /// Candidates ranked by descending probability, ties by ascending id.
    std::vector<std::pair<EntityId, double>> ranked;
};

/// Scores each candidate and picks the argmax; ties go to the smaller id.
Prediction predict(const std::vector<EntityId>& candidates,
                   const std::function<double(const EntityId&)>& score);

/// Builds the classifier input for one (mention, candidate) pair.
using InputBuilder = std::function<AssembledInput(const Mention&, const EntityId&)>;

Prediction predict(const Classifier& model, const Mention& mention, const CandidateSet& candidates,
                   const InputBuilder& build_input);

}  // namespace kgned
