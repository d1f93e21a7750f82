#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "kgned/assemble.hpp"
#include "kgned/context.hpp"
#include "kgned/errors.hpp"
#include "kgned/synthetic.hpp"
#include "properties.hpp"

using namespace kgned;

namespace {

VerbalizedTriple fake_triple(std::size_t tokens, int i) {
    std::string text;
    for (std::size_t t = 0; t < tokens; ++t) text += (t ? " w" : "w") + std::to_string(i);
    return {text, Triple{}, tokens};
}

const char* kHighwayWords = "the national highway description system in australia india label date modified 31 may 2019 runs through road";

Vocab highway_vocab() {
    return build_vocab(std::vector<std::string>{kHighwayWords}, 1);
}

}  // namespace

TEST_CASE("verbalize uses primary labels and raw literals") {
    const auto store = highway_fixture();
    const auto n = store.neighbors(EntityId{"Q1967298"}, Hops::One);
    CHECK(verbalize(store, n[0]).text == "National Highway description highway system in Australia");
    CHECK(verbalize(store, n[1]).text == "National Highway label National Highway");
    CHECK(verbalize(store, n[2]).text == "National Highway date modified 31 May 2019");

    TripleStore s;
    s.add_label("A", LabelKind::Label, "A");
    s.add_label("b", LabelKind::Label, "b");
    s.add_label("C", LabelKind::Label, "C");
    s.add_triple(EntityId{"A"}, RelationId{"b"}, "C", false, 1);
    CHECK(verbalize(s, s.neighbors(EntityId{"A"}, Hops::One)[0]).text == "A b C");
}

TEST_CASE("verbalize keeps internal spaces and joins with one space") {
    TripleStore s;
    const std::string head = "New South Wales", rel = "located in", tail = "Commonwealth of Australia";
    s.add_label("Q1", LabelKind::Label, head);
    s.add_label("P131", LabelKind::Label, rel);
    s.add_label("Q2", LabelKind::Label, tail);
    s.add_triple(EntityId{"Q1"}, RelationId{"P131"}, "Q2", false, 1);
    const auto v = verbalize(s, s.neighbors(EntityId{"Q1"}, Hops::One)[0]);
    CHECK(v.text == head + " " + rel + " " + tail);
    CHECK(v.token_count == count_tokens(v.text));

    s.add_triple(EntityId{"Q1"}, RelationId{"P9"}, "Q404", false, 1);
    CHECK(verbalize(s, s.neighbors(EntityId{"Q1"}, Hops::One)[1]).text == head + " P9 Q404");
}

TEST_CASE("build_context budgets") {
    const auto store = highway_fixture();
    ContextConfig cfg;
    const auto none = build_context(store, EntityId{"Q1967298"}, cfg, 0);
    CHECK(none.kept.empty());
    CHECK(none.dropped_count == 3);

    const auto all = build_context(store, EntityId{"Q1967298"}, cfg, 500);
    REQUIRE(all.kept.size() == 3);
    CHECK(all.kept[0].text == "National Highway description highway system in Australia");
    CHECK(all.kept[1].text == "National Highway label National Highway");
    CHECK(all.kept[2].text == "National Highway date modified 31 May 2019");
    CHECK(all.dropped_count == 0);

    cfg.max_triples = 2;
    const auto capped = build_context(store, EntityId{"Q1967298"}, cfg, 500);
    CHECK(capped.full.size() == 2);
    CHECK(capped.kept.size() == 2);

    cfg.max_triples = 0;
    CHECK(build_context(store, EntityId{"Q1967298"}, cfg, 500).full.empty());
}

TEST_CASE("whole triples only: 5 x (10 + 1) tokens in a budget of 33") {
    std::vector<VerbalizedTriple> full;
    for (int i = 0; i < 5; ++i) full.push_back(fake_triple(10, i));
    const auto b = fit_context(full, 33);
    CHECK(b.kept.size() == 33 / 11);
    CHECK(b.dropped_count == 2);
    CHECK(fit_context(full, 32).kept.size() == 2);
    CHECK(fit_context(full, 55).kept.size() == 5);
}

TEST_CASE("duplicate verbalizations are both kept") {
    std::vector<VerbalizedTriple> full{fake_triple(2, 1), fake_triple(2, 1)};
    CHECK(fit_context(full, 100).kept.size() == 2);
}

TEST_CASE("larger budgets never keep fewer triples") {
    std::mt19937_64 rng(11);
    for (int c = 0; c < 200; ++c) {
        const auto w = testing::random_world(rng);
        const auto cfg = testing::random_config(rng);
        std::size_t last = 0;
        for (std::size_t budget = 0; budget < 120; budget += 7) {
            const auto k = build_context(w.store, w.entities[0], cfg, budget).kept.size();
            CHECK(k >= last);
            last = k;
        }
    }
}

TEST_CASE("context dump lists kept then dropped triples") {
    std::vector<VerbalizedTriple> full{fake_triple(1, 1), fake_triple(1, 2), fake_triple(1, 3)};
    std::ostringstream out;
    dump_context(out, fit_context(full, 4));
    CHECK(out.str() == "w1\nw2\n# w3\n");
}

TEST_CASE("assemble without context") {
    const auto vocab = highway_vocab();
    ContextConfig cfg;
    cfg.max_seq_len = 32;
    const auto m = Mention::from_surface("The National Highway runs through Australia", "National Highway");
    const auto in = assemble(vocab, m, ContextBundle{}, cfg);
    CHECK(std::count(in.token_ids.begin(), in.token_ids.end(), kSepId) == 2);
    CHECK(*std::max_element(in.segment_ids.begin(), in.segment_ids.end()) == 1);
    CHECK(in.token_ids[0] == kClsId);
    CHECK(in.length == 1 + 6 + 1 + 2 + 1);
    CHECK(in.token_ids.size() == 32);
}

TEST_CASE("assemble with the highway triples") {
    const auto store = highway_fixture();
    const auto vocab = highway_vocab();
    ContextConfig cfg;
    cfg.max_seq_len = 64;
    const auto m = Mention::from_surface("The National Highway runs through Australia", "National Highway");
    const auto bundle = build_context(store, EntityId{"Q1967298"}, cfg, context_budget(vocab, m, cfg));
    REQUIRE(bundle.kept.size() == 3);
    const auto in = assemble(vocab, m, bundle, cfg);
    CHECK(std::count(in.token_ids.begin(), in.token_ids.end(), kSepId) == 5);
    std::set<std::int32_t> segs(in.segment_ids.begin(), in.segment_ids.begin() + in.length);
    CHECK(segs == std::set<std::int32_t>{0, 1, 2, 3, 4});

    const TokenId national = vocab.id("national"), highway = vocab.id("highway");
    std::size_t surface_hits = 0, triple_hits = 0;
    for (std::size_t i = 0; i + 1 < in.length; ++i) {
        if (in.token_ids[i] != national || in.token_ids[i + 1] != highway) continue;
        if (in.segment_ids[i] == 1) ++surface_hits;
        if (in.segment_ids[i] >= 2) ++triple_hits;
    }
    CHECK(surface_hits == 1);
    CHECK(triple_hits >= 3);
}

TEST_CASE("oversized sentence is tail-truncated and leaves no context budget") {
    const auto vocab = highway_vocab();
    ContextConfig cfg;
    cfg.max_seq_len = 16;
    std::string sentence = "National Highway";
    for (int i = 0; i < 40; ++i) sentence += " road";
    const auto m = Mention::from_surface(sentence, "National Highway");
    CHECK(context_budget(vocab, m, cfg) == 0);
    const auto in = assemble(vocab, m, ContextBundle{}, cfg);
    CHECK(in.length == 16);
    CHECK(in.token_ids[1] == vocab.id("national"));
    CHECK(std::count(in.token_ids.begin(), in.token_ids.end(), kSepId) == 2);

    const auto store = highway_fixture();
    CHECK(build_context(store, EntityId{"Q1967298"}, cfg, context_budget(vocab, m, cfg)).kept.empty());
}

TEST_CASE("assemble rejects context that does not fit") {
    const auto vocab = highway_vocab();
    ContextConfig cfg;
    cfg.max_seq_len = 16;
    const auto m = Mention::from_surface("National Highway", "National Highway");
    ContextBundle big;
    big.kept = {fake_triple(12, 1)};
    CHECK_THROWS_AS(assemble(vocab, m, big, cfg), InputError);
    cfg.max_triples = 0;
    big.kept = {fake_triple(1, 1)};
    CHECK_THROWS_AS(assemble(vocab, m, big, cfg), InputError);
    cfg.max_seq_len = 15;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("assemble is deterministic") {
    std::mt19937_64 a(9), b(9);
    for (int i = 0; i < 100; ++i) {
        const auto wa = testing::random_world(a);
        const auto wb = testing::random_world(b);
        CHECK(testing::random_assembled(a, wa).input == testing::random_assembled(b, wb).input);
    }
}

TEST_CASE("structural properties on random inputs") {
    CHECK(testing::check_prefix_property(101, 300).ok());
    CHECK(testing::check_length_property(102, 300).ok());
    CHECK(testing::check_separator_property(103, 300).ok());
    const auto seg = testing::check_segment_property(104, 300);
    INFO(seg.first_failure);
    CHECK(seg.ok());
}
