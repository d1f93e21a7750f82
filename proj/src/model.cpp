#include "kgned/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using ConstMatMap = Eigen::Map<const Matrix>;
using MatMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const RowVector>;
using VecMap = Eigen::Map<RowVector>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

struct LayerNormCache {
    Matrix xhat;
    Eigen::VectorXd rstd;
};

Matrix layer_norm(const Matrix& x, const ConstVecMap& gain, const ConstVecMap& bias,
                  LayerNormCache& cache) {
    const auto d = static_cast<double>(x.cols());
    const Eigen::VectorXd mean = x.rowwise().sum() / d;
    Matrix centered = x.colwise() - mean;
    const Eigen::VectorXd var = centered.array().square().rowwise().sum() / d;
    cache.rstd = (var.array() + kLayerNormEps).rsqrt();
    cache.xhat = centered.array().colwise() * cache.rstd.array();
    Matrix y = cache.xhat.array().rowwise() * gain.array();
    y.rowwise() += bias;
    return y;
}

// Returns dL/dx and accumulates dL/dgain, dL/dbias.
Matrix layer_norm_backward(const Matrix& dy, const ConstVecMap& gain, const LayerNormCache& cache,
                           VecMap* dgain, VecMap* dbias) {
    if (dgain) *dgain += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    if (dbias) *dbias += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * gain.array();
    const auto d = static_cast<double>(dy.cols());
    const Eigen::VectorXd mean_dxhat = dxhat.rowwise().sum() / d;
    const Eigen::VectorXd mean_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum() / d;
    Matrix dx = dxhat.colwise() - mean_dxhat;
    dx -= (cache.xhat.array().colwise() * mean_dxhat_xhat.array()).matrix();
    return dx.array().colwise() * cache.rstd.array();
}

double gelu(double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x)));
}

double gelu_grad(double x) {
    const double t = std::tanh(kGeluScale * (x + kGeluCubic * x * x * x));
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
}

// Inverted dropout mask: 0 or 1/(1-p). Empty when dropout is off.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64* rng) {
    if (!rng || rate <= 0.0) return {};
    std::bernoulli_distribution keep(1.0 - rate);
    Matrix m(rows, cols);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(*rng) ? scale : 0.0;
    return m;
}

void apply_mask(Matrix& x, const Matrix& mask) {
    if (mask.size() != 0) x.array() *= mask.array();
}

struct LayerCache {
    Matrix x_in;
    LayerNormCache ln1;
    Matrix a, q, k, v;
    std::vector<Matrix> probs;  // per head
    Matrix o;
    Matrix drop_attn;
    Matrix x_mid;
    LayerNormCache ln2;
    Matrix b, h, g;
    Matrix drop_ffn;
};

}  // namespace

void ModelConfig::validate() const {
    if (vocab_size < static_cast<std::size_t>(kReservedCount))
        throw InputError("vocab_size must cover the reserved tokens");
    if (d_model == 0 || n_heads == 0 || ffn_dim == 0 || n_segments == 0 || max_seq_len == 0)
        throw InputError("model dimensions must be >= 1");
    if (d_model % n_heads != 0)
        throw InputError("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
                         std::to_string(n_heads) + ")");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout must be in [0, 1)");
}

Classifier::Classifier(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto d = config_.d_model;
    tok_emb_ = add_slot("embed.token", config_.vocab_size, d);
    pos_emb_ = add_slot("embed.position", config_.max_seq_len, d);
    seg_emb_ = add_slot("embed.segment", config_.n_segments, d);
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        LayerSlots s{};
        s.ln1_g = add_slot(p + "ln1.gain", 1, d);
        s.ln1_b = add_slot(p + "ln1.bias", 1, d);
        s.wq = add_slot(p + "attn.wq", d, d);
        s.bq = add_slot(p + "attn.bq", 1, d);
        s.wk = add_slot(p + "attn.wk", d, d);
        s.bk = add_slot(p + "attn.bk", 1, d);
        s.wv = add_slot(p + "attn.wv", d, d);
        s.bv = add_slot(p + "attn.bv", 1, d);
        s.wo = add_slot(p + "attn.wo", d, d);
        s.bo = add_slot(p + "attn.bo", 1, d);
        s.ln2_g = add_slot(p + "ln2.gain", 1, d);
        s.ln2_b = add_slot(p + "ln2.bias", 1, d);
        s.w1 = add_slot(p + "ffn.w1", d, config_.ffn_dim);
        s.b1 = add_slot(p + "ffn.b1", 1, config_.ffn_dim);
        s.w2 = add_slot(p + "ffn.w2", config_.ffn_dim, d);
        s.b2 = add_slot(p + "ffn.b2", 1, d);
        layers_.push_back(s);
    }
    lnf_g_ = add_slot("final_ln.gain", 1, d);
    lnf_b_ = add_slot("final_ln.bias", 1, d);
    head_w_ = add_slot("head.weight", 1, d);
    head_b_ = add_slot("head.bias", 1, 1);
    params_.assign(slots_.back().offset + slots_.back().size(), 0.0);
}

std::size_t Classifier::add_slot(std::string name, std::size_t rows, std::size_t cols) {
    const std::size_t offset = slots_.empty() ? 0 : slots_.back().offset + slots_.back().size();
    slots_.push_back(ParamSlot{std::move(name), offset, rows, cols});
    return slots_.size() - 1;
}

const ParamSlot& Classifier::slot(const std::string& name) const {
    for (const auto& s : slots_)
        if (s.name == name) return s;
    throw InputError("no parameter named '" + name + "'");
}

void Classifier::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill_normal = [&](std::size_t index, double stddev) {
        const auto& s = slots_[index];
        std::normal_distribution<double> dist(0.0, stddev);
        for (std::size_t i = 0; i < s.size(); ++i) params_[s.offset + i] = dist(rng);
    };
    auto fill_xavier = [&](std::size_t index) {
        const auto& s = slots_[index];
        fill_normal(index, std::sqrt(2.0 / static_cast<double>(s.rows + s.cols)));
    };
    auto fill_ones = [&](std::size_t index) {
        const auto& s = slots_[index];
        std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(s.offset), s.size(), 1.0);
    };

    fill_normal(tok_emb_, 0.02);
    fill_normal(pos_emb_, 0.02);
    fill_normal(seg_emb_, 0.02);
    for (const auto& l : layers_) {
        fill_ones(l.ln1_g);
        fill_ones(l.ln2_g);
        for (auto w : {l.wq, l.wk, l.wv, l.wo, l.w1, l.w2}) fill_xavier(w);
    }
    fill_ones(lnf_g_);
    fill_xavier(head_w_);
}

bool Classifier::all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

double Classifier::logit(const AssembledInput& input) const {
    return run(input, 0, 0.0, nullptr, nullptr);
}

double Classifier::forward(const AssembledInput& input) const {
    return sigmoid(logit(input));
}

double Classifier::accumulate_gradient(const AssembledInput& input, int label, double weight,
                                       std::span<double> grad,
                                       std::mt19937_64* dropout_rng) const {
    if (grad.size() != params_.size()) throw InputError("gradient buffer has the wrong size");
    if (label != 0 && label != 1) throw InputError("label must be 0 or 1");
    const double z = run(input, label, weight, &grad, dropout_rng);
    return bce_loss_from_logit(z, label);
}

double Classifier::run(const AssembledInput& input, int label, double weight,
                       std::span<double>* grad, std::mt19937_64* dropout_rng) const {
    const auto n_total = input.token_ids.size();
    if (input.segment_ids.size() != n_total || input.mask.size() != n_total)
        throw InputError("token, segment and mask arrays differ in length");
    if (n_total == 0 || n_total > config_.max_seq_len)
        throw InputError("input length " + std::to_string(n_total) + " outside [1, max_seq_len]");
    if (input.mask[0] == 0) throw InputError("the [CLS] position must not be masked");

    std::vector<std::size_t> positions;
    positions.reserve(n_total);
    for (std::size_t i = 0; i < n_total; ++i) {
        if (input.segment_ids[i] < 0 || static_cast<std::size_t>(input.segment_ids[i]) >= config_.n_segments)
            throw InputError("segment id " + std::to_string(input.segment_ids[i]) + " at position " +
                             std::to_string(i) + " exceeds the segment table (" +
                             std::to_string(config_.n_segments) + ")");
        if (!input.mask[i]) continue;
        if (input.token_ids[i] < 0 || static_cast<std::size_t>(input.token_ids[i]) >= config_.vocab_size)
            throw InputError("token id " + std::to_string(input.token_ids[i]) + " outside the vocabulary");
        positions.push_back(i);
    }

    const auto n = static_cast<Eigen::Index>(positions.size());
    const auto d = static_cast<Eigen::Index>(config_.d_model);
    const auto n_heads = static_cast<Eigen::Index>(config_.n_heads);
    const Eigen::Index dh = d / n_heads;
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const double rate = config_.dropout;
    const bool training = dropout_rng != nullptr && rate > 0.0;
    std::mt19937_64* rng = training ? dropout_rng : nullptr;

    const double* base = params_.data();
    auto mat = [&](std::size_t index) {
        const auto& s = slots_[index];
        return ConstMatMap(base + s.offset, static_cast<Eigen::Index>(s.rows),
                           static_cast<Eigen::Index>(s.cols));
    };
    auto vec = [&](std::size_t index) {
        const auto& s = slots_[index];
        return ConstVecMap(base + s.offset, static_cast<Eigen::Index>(s.size()));
    };

    // Embeddings.
    const auto tok = mat(tok_emb_);
    const auto pos = mat(pos_emb_);
    const auto seg = mat(seg_emb_);
    Matrix x(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto p = positions[static_cast<std::size_t>(r)];
        x.row(r) = tok.row(input.token_ids[p]) + pos.row(static_cast<Eigen::Index>(p)) +
                   seg.row(input.segment_ids[p]);
    }
    const Matrix drop_embed = dropout_mask(n, d, rate, rng);
    apply_mask(x, drop_embed);

    std::vector<LayerCache> caches(grad ? layers_.size() : 0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& s = layers_[l];
        LayerCache local;
        LayerCache& c = grad ? caches[l] : local;

        c.x_in = x;
        c.a = layer_norm(x, vec(s.ln1_g), vec(s.ln1_b), c.ln1);
        c.q = (c.a * mat(s.wq)).rowwise() + vec(s.bq);
        c.k = (c.a * mat(s.wk)).rowwise() + vec(s.bk);
        c.v = (c.a * mat(s.wv)).rowwise() + vec(s.bv);
        c.o.resize(n, d);
        c.probs.resize(static_cast<std::size_t>(n_heads));
        for (Eigen::Index h = 0; h < n_heads; ++h) {
            Matrix scores = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * attn_scale;
            const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
            scores = (scores.colwise() - row_max).array().exp();
            const Eigen::VectorXd row_sum = scores.rowwise().sum();
            scores = scores.array().colwise() / row_sum.array();
            c.o.middleCols(h * dh, dh) = scores * c.v.middleCols(h * dh, dh);
            c.probs[static_cast<std::size_t>(h)] = std::move(scores);
        }
        Matrix attn_out = (c.o * mat(s.wo)).rowwise() + vec(s.bo);
        c.drop_attn = dropout_mask(n, d, rate, rng);
        apply_mask(attn_out, c.drop_attn);
        c.x_mid = x + attn_out;

        c.b = layer_norm(c.x_mid, vec(s.ln2_g), vec(s.ln2_b), c.ln2);
        c.h = (c.b * mat(s.w1)).rowwise() + vec(s.b1);
        c.g = c.h.unaryExpr([](double v) { return gelu(v); });
        Matrix ffn_out = (c.g * mat(s.w2)).rowwise() + vec(s.b2);
        c.drop_ffn = dropout_mask(n, d, rate, rng);
        apply_mask(ffn_out, c.drop_ffn);
        x = c.x_mid + ffn_out;
    }

    LayerNormCache final_ln;
    const Matrix y = layer_norm(x, vec(lnf_g_), vec(lnf_b_), final_ln);
    const auto head_w = vec(head_w_);
    const double z = y.row(0).dot(head_w) + base[slots_[head_b_].offset];
    if (!grad) return z;

    // Backward.
    double* gbase = grad->data();
    auto gmat = [&](std::size_t index) {
        const auto& s = slots_[index];
        return MatMap(gbase + s.offset, static_cast<Eigen::Index>(s.rows),
                      static_cast<Eigen::Index>(s.cols));
    };
    auto gvec = [&](std::size_t index) {
        const auto& s = slots_[index];
        return VecMap(gbase + s.offset, static_cast<Eigen::Index>(s.size()));
    };

    const double dz = weight * (sigmoid(z) - static_cast<double>(label));
    gvec(head_w_) += dz * y.row(0);
    gbase[slots_[head_b_].offset] += dz;

    Matrix dy = Matrix::Zero(n, d);
    dy.row(0) = dz * head_w;
    {
        VecMap dg = gvec(lnf_g_), db = gvec(lnf_b_);
        x = layer_norm_backward(dy, vec(lnf_g_), final_ln, &dg, &db);
    }
    Matrix& dx = x;  // running gradient w.r.t. the residual stream

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& s = layers_[li];
        const LayerCache& c = caches[li];

        // Feed-forward block.
        Matrix dffn = dx;
        apply_mask(dffn, c.drop_ffn);
        gmat(s.w2).noalias() += c.g.transpose() * dffn;
        gvec(s.b2) += dffn.colwise().sum();
        Matrix dh_pre = (dffn * mat(s.w2).transpose()).array() *
                        c.h.unaryExpr([](double v) { return gelu_grad(v); }).array();
        gmat(s.w1).noalias() += c.b.transpose() * dh_pre;
        gvec(s.b1) += dh_pre.colwise().sum();
        const Matrix db_in = dh_pre * mat(s.w1).transpose();
        {
            VecMap dg = gvec(s.ln2_g), dbias = gvec(s.ln2_b);
            dx += layer_norm_backward(db_in, vec(s.ln2_g), c.ln2, &dg, &dbias);
        }

        // Attention block.
        Matrix dattn = dx;
        apply_mask(dattn, c.drop_attn);
        gmat(s.wo).noalias() += c.o.transpose() * dattn;
        gvec(s.bo) += dattn.colwise().sum();
        const Matrix d_o = dattn * mat(s.wo).transpose();
        Matrix dq(n, d), dk(n, d), dv(n, d);
        for (Eigen::Index h = 0; h < n_heads; ++h) {
            const Matrix& p = c.probs[static_cast<std::size_t>(h)];
            const auto d_oh = d_o.middleCols(h * dh, dh);
            const Matrix dp = d_oh * c.v.middleCols(h * dh, dh).transpose();
            dv.middleCols(h * dh, dh) = p.transpose() * d_oh;
            const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
            const Matrix ds = (p.array() * (dp.colwise() - row_dot).array()) * attn_scale;
            dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
            dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
        }
        gmat(s.wq).noalias() += c.a.transpose() * dq;
        gmat(s.wk).noalias() += c.a.transpose() * dk;
        gmat(s.wv).noalias() += c.a.transpose() * dv;
        gvec(s.bq) += dq.colwise().sum();
        gvec(s.bk) += dk.colwise().sum();
        gvec(s.bv) += dv.colwise().sum();
        const Matrix da = dq * mat(s.wq).transpose() + dk * mat(s.wk).transpose() +
                          dv * mat(s.wv).transpose();
        {
            VecMap dg = gvec(s.ln1_g), dbias = gvec(s.ln1_b);
            dx += layer_norm_backward(da, vec(s.ln1_g), c.ln1, &dg, &dbias);
        }
    }

    apply_mask(dx, drop_embed);
    auto gtok = gmat(tok_emb_);
    auto gpos = gmat(pos_emb_);
    auto gseg = gmat(seg_emb_);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto p = positions[static_cast<std::size_t>(r)];
        gtok.row(input.token_ids[p]) += dx.row(r);
        gpos.row(static_cast<Eigen::Index>(p)) += dx.row(r);
        gseg.row(input.segment_ids[p]) += dx.row(r);
    }
    return z;
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bce_loss(double probability, int label) {
    constexpr double kEps = 1e-12;
    const double p = std::clamp(probability, kEps, 1.0 - kEps);
    return label == 1 ? -std::log(p) : -std::log1p(-p);
}

double bce_loss_from_logit(double logit, int label) {
    // log(1 + e^z) - y z, arranged to avoid overflow
    return std::max(logit, 0.0) - logit * static_cast<double>(label) + std::log1p(std::exp(-std::abs(logit)));
}

double mean_bce_loss(std::span<const double> probabilities, std::span<const int> labels) {
    if (probabilities.size() != labels.size()) throw InputError("probabilities and labels differ in size");
    if (probabilities.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) sum += bce_loss(probabilities[i], labels[i]);
    return sum / static_cast<double>(labels.size());
}

Prediction predict(const std::vector<EntityId>& candidates,
                   const std::function<double(const EntityId&)>& score) {
    Prediction out;
    out.ranked.reserve(candidates.size());
    for (const auto& c : candidates) out.ranked.emplace_back(c, score(c));
    std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (!out.ranked.empty()) out.chosen = out.ranked.front().first;
    return out;
}

Prediction predict(const Classifier& model, const Mention& mention, const CandidateSet& candidates,
                   const InputBuilder& build_input) {
    return predict(candidates.entities, [&](const EntityId& candidate) {
        return model.forward(build_input(mention, candidate));
    });
}

}  // namespace kgned
