#include <doctest.h>

#include <fstream>
#include <random>

#include "helpers.hpp"
#include "kgned/checkpoint.hpp"
#include "kgned/errors.hpp"

using namespace kgned;

namespace {

struct Fixture {
    Vocab vocab = build_vocab(std::vector<std::string>{"national highway system in australia india"}, 1);
    ContextConfig ctx;
    ModelConfig cfg;

    Fixture() {
        ctx.hops = Hops::OneAndTwo;
        ctx.max_triples = 3;
        ctx.max_seq_len = 16;
        ctx.include_sentence = false;
        cfg.vocab_size = vocab.size();
        cfg.d_model = 8;
        cfg.n_layers = 2;
        cfg.n_heads = 2;
        cfg.ffn_dim = 16;
        cfg.n_segments = ctx.segment_count();
        cfg.max_seq_len = ctx.max_seq_len;
        cfg.dropout = 0.25;
    }
};

std::vector<AssembledInput> probes(const ModelConfig& cfg, std::size_t n) {
    std::mt19937_64 rng(8);
    std::vector<AssembledInput> out;
    for (std::size_t k = 0; k < n; ++k) {
        AssembledInput in;
        in.length = 2 + rng() % (cfg.max_seq_len - 2);
        for (std::size_t i = 0; i < cfg.max_seq_len; ++i) {
            const bool real = i < in.length;
            in.token_ids.push_back(i == 0 ? kClsId : real ? static_cast<TokenId>(rng() % cfg.vocab_size) : kPadId);
            in.segment_ids.push_back(real ? static_cast<std::int32_t>(rng() % cfg.n_segments) : 0);
            in.mask.push_back(real ? 1 : 0);
        }
        in.segment_ids[0] = 0;
        out.push_back(std::move(in));
    }
    return out;
}

}  // namespace

TEST_CASE("checkpoint round-trip is bitwise on probes") {
    Fixture f;
    testing::TempDir dir;
    Classifier m(f.cfg);
    m.init(77);
    save_checkpoint(dir / "m.ckpt", m, f.vocab, f.ctx);
    const auto ck = load_checkpoint(dir / "m.ckpt", &f.vocab);
    CHECK(ck.model.config() == f.cfg);
    CHECK(ck.vocab == f.vocab);
    CHECK(ck.context == f.ctx);
    for (const auto& in : probes(f.cfg, 8)) CHECK(ck.model.logit(in) == m.logit(in));
    CHECK(std::equal(ck.model.params().begin(), ck.model.params().end(), m.params().begin()));
}

TEST_CASE("truncated checkpoints are refused") {
    Fixture f;
    testing::TempDir dir;
    Classifier m(f.cfg);
    m.init(1);
    save_checkpoint(dir / "m.ckpt", m, f.vocab, f.ctx);
    const auto bytes = testing::read_file(dir / "m.ckpt");
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        testing::write_file(dir / "cut.ckpt", bytes.substr(0, cut));
        CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), CheckpointError);
    }
    testing::write_file(dir / "long.ckpt", bytes + "x");
    CHECK_THROWS_AS(load_checkpoint(dir / "long.ckpt"), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST_CASE("version and vocab mismatches are refused") {
    Fixture f;
    testing::TempDir dir;
    Classifier m(f.cfg);
    m.init(1);
    save_checkpoint(dir / "m.ckpt", m, f.vocab, f.ctx);
    auto bytes = testing::read_file(dir / "m.ckpt");

    auto bumped = bytes;
    bumped[8] = static_cast<char>(kCheckpointVersion + 1);
    testing::write_file(dir / "v.ckpt", bumped);
    try {
        load_checkpoint(dir / "v.ckpt");
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }

    const auto other = build_vocab(std::vector<std::string>{"a b c"}, 1);
    CHECK_THROWS_AS(load_checkpoint(dir / "m.ckpt", &other), CheckpointError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    testing::write_file(dir / "magic.ckpt", bad_magic);
    CHECK_THROWS_AS(load_checkpoint(dir / "magic.ckpt"), CheckpointError);
}

TEST_CASE("saving replaces the file atomically") {
    Fixture f;
    testing::TempDir dir;
    Classifier a(f.cfg), b(f.cfg);
    a.init(1);
    b.init(2);
    save_checkpoint(dir / "m.ckpt", a, f.vocab, f.ctx);
    save_checkpoint(dir / "m.ckpt", b, f.vocab, f.ctx);
    const auto ck = load_checkpoint(dir / "m.ckpt");
    CHECK(std::equal(ck.model.params().begin(), ck.model.params().end(), b.params().begin()));
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    CHECK(files == 1);
}
