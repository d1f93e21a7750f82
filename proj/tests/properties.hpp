#pragma once

// Randomized structural checks over context selection, input assembly and
// the classifier's masking. Each check returns how many of its cases failed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kgned/assemble.hpp"
#include "kgned/context.hpp"
#include "kgned/kg_store.hpp"
#include "kgned/model.hpp"
#include "kgned/tokenize.hpp"

namespace kgned::testing {

struct PropertyResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    bool ok() const { return failures == 0 && cases > 0; }
    void fail(const std::string& why) {
        if (failures++ == 0) first_failure = why;
    }
};

inline const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> words = {
        "national", "highway", "system", "in", "australia", "india", "the", "of", "road", "bank",
        "river", "city", "new", "south", "wales", "2019", "may", "31", "label", "description",
        "date", "modified", "-", ",", "(", ")", "x", "y", "z", "q"};
    return words;
}

struct RandomWorld {
    TripleStore store;
    Vocab vocab;
    std::vector<EntityId> entities;
};

inline std::string random_phrase(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    const auto& pool = word_pool();
    std::uniform_int_distribution<std::size_t> len(min_words, max_words);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += pool[rng() % pool.size()];
    }
    return out;
}

inline RandomWorld random_world(std::mt19937_64& rng) {
    RandomWorld w;
    const std::size_t n_entities = 1 + rng() % 5;
    for (std::size_t e = 0; e < n_entities; ++e) {
        EntityId id{"Q" + std::to_string(e + 1)};
        w.store.add_label(id.str(), LabelKind::Label, random_phrase(rng, 1, 3));
        const std::size_t n_triples = rng() % 25;
        for (std::size_t t = 0; t < n_triples; ++t) {
            const bool literal = rng() % 2 == 0;
            const std::string rel = "P" + std::to_string(rng() % 6);
            if (!w.store.has_primary_label(rel)) w.store.add_label(rel, LabelKind::Label, random_phrase(rng, 1, 2));
            w.store.add_triple(id, RelationId{rel}, literal ? random_phrase(rng, 1, 8) : "Q" + std::to_string(1 + rng() % 9),
                               literal, 1 + static_cast<int>(rng() % 2));
        }
        w.entities.push_back(std::move(id));
    }
    // A vocab over part of the pool so some tokens map to UNK.
    std::vector<std::string> tokens;
    for (const auto& word : word_pool())
        if (rng() % 3 != 0) tokens.push_back(word);
    w.vocab = Vocab::from_tokens(tokens);
    return w;
}

inline Mention random_mention(std::mt19937_64& rng) {
    const std::string sentence = random_phrase(rng, 1, 40);
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < sentence.size(); ++i)
        if (sentence[i] == ' ') starts.push_back(i + 1);
    const std::size_t b = starts[rng() % starts.size()];
    std::size_t e = sentence.find(' ', b);
    if (e == std::string::npos) e = sentence.size();
    return Mention::from_span(sentence, b, e);
}

inline ContextConfig random_config(std::mt19937_64& rng) {
    ContextConfig cfg;
    cfg.hops = rng() % 2 ? Hops::One : Hops::OneAndTwo;
    cfg.max_triples = rng() % 18;
    cfg.max_seq_len = 16 + rng() % 120;
    cfg.include_sentence = rng() % 5 != 0;
    return cfg;
}

/// Kept triples are a prefix of the full list, fit the budget, and the next
/// triple (if any) would not.
inline PropertyResult check_prefix_property(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const auto w = random_world(rng);
        const auto cfg = random_config(rng);
        const auto& entity = w.entities[rng() % w.entities.size()];
        const std::size_t budget = rng() % 200;
        const auto b = build_context(w.store, entity, cfg, budget);
        std::ostringstream why;
        why << "case " << c << ": ";
        if (b.kept.size() > b.full.size() || b.dropped_count != b.full.size() - b.kept.size()) {
            r.fail(why.str() + "size bookkeeping");
            continue;
        }
        bool prefix = true;
        for (std::size_t i = 0; i < b.kept.size(); ++i) prefix &= b.kept[i].text == b.full[i].text;
        if (!prefix) {
            r.fail(why.str() + "kept is not a prefix");
            continue;
        }
        std::size_t cost = 0;
        for (const auto& t : b.kept) cost += count_tokens(t.text) + 1;
        if (cost > budget) {
            r.fail(why.str() + "kept exceeds budget");
            continue;
        }
        if (b.kept.size() < b.full.size() && cost + count_tokens(b.full[b.kept.size()].text) + 1 <= budget) {
            r.fail(why.str() + "next triple would have fit");
            continue;
        }
        if (b.full.size() > cfg.max_triples) r.fail(why.str() + "more than max_triples verbalized");
    }
    return r;
}

struct AssembledCase {
    AssembledInput input;
    ContextBundle bundle;
    ContextConfig cfg;
};

inline AssembledCase random_assembled(std::mt19937_64& rng, const RandomWorld& w) {
    AssembledCase c;
    c.cfg = random_config(rng);
    const Mention m = random_mention(rng);
    const auto& entity = w.entities[rng() % w.entities.size()];
    c.bundle = build_context(w.store, entity, c.cfg, context_budget(w.vocab, m, c.cfg));
    c.input = assemble(w.vocab, m, c.bundle, c.cfg);
    return c;
}

inline PropertyResult check_length_property(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const auto w = random_world(rng);
        const auto a = random_assembled(rng, w);
        const auto& in = a.input;
        const std::size_t n = a.cfg.max_seq_len;
        if (in.length > n || in.token_ids.size() != n || in.segment_ids.size() != n || in.mask.size() != n)
            r.fail("case " + std::to_string(c) + ": length " + std::to_string(in.length) + " for max " +
                   std::to_string(n));
        else if (std::count(in.mask.begin(), in.mask.end(), 1) != static_cast<std::ptrdiff_t>(in.length))
            r.fail("case " + std::to_string(c) + ": mask does not cover the unpadded prefix");
    }
    return r;
}

inline PropertyResult check_separator_property(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const auto w = random_world(rng);
        const auto a = random_assembled(rng, w);
        const auto seps = std::count(a.input.token_ids.begin(), a.input.token_ids.begin() + a.input.length, kSepId);
        if (static_cast<std::size_t>(seps) != 2 + a.bundle.kept.size())
            r.fail("case " + std::to_string(c) + ": " + std::to_string(seps) + " separators for " +
                   std::to_string(a.bundle.kept.size()) + " triples");
    }
    return r;
}

/// Segment ids over real tokens are exactly {0, ..., 1 + |kept|}, non-decreasing,
/// starting at 0, with every triple segment ending in a separator.
inline PropertyResult check_segment_property(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const auto w = random_world(rng);
        const auto a = random_assembled(rng, w);
        const auto& in = a.input;
        const std::int32_t top = 1 + static_cast<std::int32_t>(a.bundle.kept.size());
        bool ok = in.segment_ids[0] == 0;
        std::vector<bool> seen(static_cast<std::size_t>(top) + 1, false);
        for (std::size_t i = 0; i < in.length && ok; ++i) {
            const auto s = in.segment_ids[i];
            ok &= s >= 0 && s <= top;
            if (!ok) break;
            seen[static_cast<std::size_t>(s)] = true;
            if (i > 0) ok &= s >= in.segment_ids[i - 1];
            if (i + 1 < in.length && in.segment_ids[i + 1] != s) ok &= in.token_ids[i] == kSepId;
        }
        ok = ok && std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
        for (std::size_t i = in.length; i < in.segment_ids.size() && ok; ++i) ok &= in.segment_ids[i] == 0;
        if (!ok) r.fail("case " + std::to_string(c) + ": segment ids malformed");
    }
    return r;
}

/// Changing token ids and segment ids at masked positions, or appending extra
/// masked content, leaves the classifier output bitwise unchanged.
inline PropertyResult check_padding_invariance(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c, ++r.cases) {
        const auto w = random_world(rng);
        auto a = random_assembled(rng, w);
        ModelConfig mc;
        mc.vocab_size = w.vocab.size();
        mc.d_model = 8;
        mc.n_heads = 2;
        mc.n_layers = 1 + rng() % 2;
        mc.ffn_dim = 12;
        mc.n_segments = a.cfg.segment_count();
        mc.max_seq_len = a.cfg.max_seq_len;
        Classifier model(mc);
        model.init(rng());
        const double base = model.logit(a.input);

        AssembledInput noisy = a.input;
        for (std::size_t i = noisy.length; i < noisy.token_ids.size(); ++i) {
            noisy.token_ids[i] = static_cast<TokenId>(rng() % mc.vocab_size);
            noisy.segment_ids[i] = static_cast<std::int32_t>(rng() % mc.n_segments);
        }
        if (noisy.token_ids.size() - noisy.length >= 2) {
            const std::size_t i = noisy.length + rng() % (noisy.token_ids.size() - noisy.length);
            const std::size_t j = noisy.length + rng() % (noisy.token_ids.size() - noisy.length);
            std::swap(noisy.token_ids[i], noisy.token_ids[j]);
            std::swap(noisy.segment_ids[i], noisy.segment_ids[j]);
        }
        const double perturbed = model.logit(noisy);
        if (perturbed != base) r.fail("case " + std::to_string(c) + ": masked positions changed the output");
    }
    return r;
}

}  // namespace kgned::testing
