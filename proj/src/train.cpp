#include "kgned/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgned/errors.hpp"

namespace kgned {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw InputError("learning rate must be finite and >= 0");
    if (batch_size == 0) throw InputError("batch size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw InputError("Adam betas must be in [0, 1)");
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.epsilon),
      m_(n_params, 0.0), v_(n_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
}

double clip_gradient(std::span<double> grad, double max_norm) {
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (double& g : grad) g *= scale;
    }
    return norm;
}

EpochStats evaluate(const Classifier& model, std::span<const LabeledInput> data) {
    EpochStats stats;
    if (data.empty()) return stats;
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& ex : data) {
        const double z = model.logit(ex.input);
        loss += bce_loss_from_logit(z, ex.label);
        if ((sigmoid(z) >= 0.5 ? 1 : 0) == ex.label) ++correct;
    }
    stats.loss = loss / static_cast<double>(data.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return stats;
}

std::vector<EpochStats> train(Classifier& model, std::span<const LabeledInput> data,
                              const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (data.empty()) throw InputError("training data is empty");
    for (const auto& ex : data)
        if (ex.label != 0 && ex.label != 1) throw InputError("labels must be 0 or 1");

    std::mt19937_64 shuffle_rng(cfg.seed);
    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    AdamOptimizer optimizer(model.params().size(), cfg);
    std::vector<double> grad(model.params().size());
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<EpochStats> history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double running = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double weight = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = data[order[i]];
                batch_loss += model.accumulate_gradient(ex.input, ex.label, weight, grad, &dropout_rng);
            }
            if (!std::isfinite(batch_loss))
                throw TrainingAborted("non-finite loss in epoch " + std::to_string(epoch + 1) +
                                      ", batch " + std::to_string(batch_index + 1));
            running += batch_loss;
            clip_gradient(grad, cfg.clip_norm);
            optimizer.step(model.params(), grad);
            if (!model.all_finite())
                throw TrainingAborted("non-finite parameters after epoch " + std::to_string(epoch + 1) +
                                      ", batch " + std::to_string(batch_index + 1));
        }
        EpochStats stats = evaluate(model, data);
        stats.epoch = epoch + 1;
        stats.train_loss = running / static_cast<double>(data.size());
        history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return history;
}

namespace {

double summed_loss(const Classifier& model, const std::vector<LabeledInput>& inputs) {
    double loss = 0.0;
    for (const auto& ex : inputs) loss += bce_loss_from_logit(model.logit(ex.input), ex.label);
    return loss;
}

}  // namespace

GradCheckReport grad_check(Classifier& model, const GradCheckOptions& options) {
    const auto& cfg = model.config();
    if (cfg.dropout != 0.0) throw InputError("grad_check needs a model with dropout 0");
    const std::size_t seq = std::min(options.seq_len, cfg.max_seq_len);
    if (seq < 1) throw InputError("grad_check needs seq_len >= 1");
    std::mt19937_64 rng(options.seed);

    std::vector<LabeledInput> inputs(options.n_inputs);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto& in = inputs[k].input;
        std::uniform_int_distribution<std::size_t> len_dist(std::min<std::size_t>(2, seq), seq);
        const std::size_t length = len_dist(rng);
        std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(cfg.vocab_size - 1));
        std::uniform_int_distribution<std::int32_t> segd(0, static_cast<std::int32_t>(cfg.n_segments - 1));
        for (std::size_t i = 0; i < seq; ++i) {
            const bool real = i < length;
            in.token_ids.push_back(i == 0 ? kClsId : tok(rng));
            in.segment_ids.push_back(real ? segd(rng) : 0);
            in.mask.push_back(real ? 1 : 0);
        }
        in.length = length;
        inputs[k].label = static_cast<int>(k % 2);
    }

    std::vector<double> analytic(model.params().size(), 0.0);
    for (const auto& ex : inputs) model.accumulate_gradient(ex.input, ex.label, 1.0, analytic, nullptr);

    std::vector<std::size_t> eligible;
    for (std::size_t s = 0; s < model.slots().size(); ++s)
        if (model.slots()[s].name.starts_with(options.only_prefix)) eligible.push_back(s);
    if (eligible.empty()) throw InputError("no parameters match '" + options.only_prefix + "'");

    GradCheckReport report;
    std::uniform_int_distribution<std::size_t> pick_slot(0, eligible.size() - 1);
    auto params = model.params();
    for (std::size_t probe = 0; probe < options.n_probes; ++probe) {
        const auto& slot = model.slots()[eligible[pick_slot(rng)]];
        std::uniform_int_distribution<std::size_t> pick(0, slot.size() - 1);
        const std::size_t index = slot.offset + pick(rng);

        const double saved = params[index];
        params[index] = saved + options.step;
        const double up = summed_loss(model, inputs);
        params[index] = saved - options.step;
        const double down = summed_loss(model, inputs);
        params[index] = saved;

        const double numeric = (up - down) / (2.0 * options.step);
        const double a = analytic[index];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double err = scale < 1e-8 ? std::abs(a - numeric) : std::abs(a - numeric) / scale;
        if (err > report.max_relative_error || report.probes == 0) {
            report.max_relative_error = std::max(report.max_relative_error, err);
            if (err >= report.max_relative_error) report.worst_param = slot.name;
        }
        ++report.probes;
    }
    return report;
}

GradCheckReport grad_check(const ModelConfig& config, const GradCheckOptions& options) {
    ModelConfig cfg = config;
    cfg.dropout = 0.0;
    Classifier model(cfg);
    model.init(options.seed);
    return grad_check(model, options);
}

}  // namespace kgned
