#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kgned/errors.hpp"
#include "kgned/train.hpp"

using namespace kgned;

namespace {

ModelConfig toy_config() {
    ModelConfig c;
    c.vocab_size = 12;
    c.d_model = 8;
    c.n_layers = 1;
    c.n_heads = 2;
    c.ffn_dim = 16;
    c.n_segments = 3;
    c.max_seq_len = 8;
    c.dropout = 0.1;
    return c;
}

/// Label 1 iff token 5 appears; the rest of the sequence is noise.
std::vector<LabeledInput> separable_set(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<LabeledInput> out;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledInput ex;
        ex.label = static_cast<int>(i % 2);
        auto& in = ex.input;
        in.token_ids = {kClsId, static_cast<TokenId>(ex.label ? 5 : 6)};
        in.segment_ids = {0, 1};
        const std::size_t extra = rng() % 4;
        for (std::size_t k = 0; k < extra; ++k) {
            in.token_ids.push_back(static_cast<TokenId>(7 + rng() % 5));
            in.segment_ids.push_back(2);
        }
        in.length = in.token_ids.size();
        in.mask.assign(in.length, 1);
        in.token_ids.resize(8, kPadId);
        in.segment_ids.resize(8, 0);
        in.mask.resize(8, 0);
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace

TEST_CASE("train config validation") {
    TrainConfig t;
    CHECK_NOTHROW(t.validate());
    t.batch_size = 0;
    CHECK_THROWS_AS(t.validate(), InputError);
    t = TrainConfig{};
    t.learning_rate = -1.0;
    CHECK_THROWS_AS(t.validate(), InputError);
    t.learning_rate = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(t.validate(), InputError);
}

TEST_CASE("gradient clipping") {
    std::vector<double> g{3.0, 4.0};
    CHECK(clip_gradient(g, 1.0) == doctest::Approx(5.0));
    CHECK(g[0] == doctest::Approx(0.6));
    CHECK(g[1] == doctest::Approx(0.8));
    std::vector<double> small{0.1, 0.0};
    clip_gradient(small, 1.0);
    CHECK(small[0] == 0.1);
    std::vector<double> off{30.0};
    clip_gradient(off, 0.0);
    CHECK(off[0] == 30.0);
}

TEST_CASE("first Adam step moves each parameter by about the learning rate") {
    TrainConfig t;
    t.learning_rate = 0.01;
    AdamOptimizer opt(3, t);
    std::vector<double> p{1.0, 1.0, 1.0};
    const std::vector<double> g{0.5, -2.0, 0.0};
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1.0 + 0.01).epsilon(1e-6));
    CHECK(p[2] == 1.0);
    CHECK(opt.steps() == 1);
}

TEST_CASE("separable toy set reaches accuracy 1 within 50 epochs") {
    const auto data = separable_set(32, 3);
    Classifier m(toy_config());
    m.init(1);
    TrainConfig t;
    t.learning_rate = 1e-2;
    t.batch_size = 8;
    t.epochs = 50;
    const auto history = train(m, data, t);
    REQUIRE(history.size() == 50);
    CHECK(history.back().accuracy == 1.0);
    CHECK(history.back().loss < history.front().loss);
    CHECK(m.all_finite());
}

TEST_CASE("same seed gives bitwise-identical histories and parameters") {
    const auto data = separable_set(24, 8);
    TrainConfig t;
    t.epochs = 5;
    t.batch_size = 5;
    auto run = [&] {
        Classifier m(toy_config());
        m.init(t.seed);
        auto h = train(m, data, t);
        return std::make_pair(h, std::vector<double>(m.params().begin(), m.params().end()));
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.first.size() == b.first.size());
    for (std::size_t i = 0; i < a.first.size(); ++i) {
        CHECK(a.first[i].loss == b.first[i].loss);
        CHECK(a.first[i].train_loss == b.first[i].train_loss);
    }
    CHECK(a.second == b.second);

    t.seed = 14;
    const auto c = run();
    CHECK(c.second != a.second);
}

TEST_CASE("learning rate 0 keeps the history constant") {
    const auto data = separable_set(16, 2);
    Classifier m(toy_config());
    m.init(4);
    const std::vector<double> before(m.params().begin(), m.params().end());
    TrainConfig t;
    t.learning_rate = 0.0;
    t.epochs = 4;
    const auto h = train(m, data, t);
    for (const auto& s : h) CHECK(s.loss == h.front().loss);
    CHECK(std::vector<double>(m.params().begin(), m.params().end()) == before);
}

TEST_CASE("frozen zero head scores ln 2 on random labels") {
    auto data = separable_set(40, 6);
    std::mt19937_64 rng(1);
    for (auto& ex : data) ex.label = static_cast<int>(rng() % 2);
    Classifier m(toy_config());
    m.init(2);
    const auto& w = m.slot("head.weight");
    for (std::size_t i = 0; i < w.size(); ++i) m.params()[w.offset + i] = 0.0;
    CHECK(evaluate(m, data).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("non-finite loss aborts naming epoch and batch") {
    const auto data = separable_set(8, 1);
    Classifier m(toy_config());
    m.init(1);
    const auto& head = m.slot("head.bias");
    m.params()[head.offset] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig t;
    t.epochs = 1;
    try {
        train(m, data, t);
        FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
        const std::string what = e.what();
        CHECK(what.find("epoch 1") != std::string::npos);
        CHECK(what.find("batch 1") != std::string::npos);
    }
}

TEST_CASE("training input validation") {
    Classifier m(toy_config());
    m.init(1);
    CHECK_THROWS_AS(train(m, std::vector<LabeledInput>{}, TrainConfig{}), InputError);
    auto data = separable_set(2, 1);
    data[0].label = 2;
    CHECK_THROWS_AS(train(m, data, TrainConfig{}), InputError);
}
