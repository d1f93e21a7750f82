#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgned/kg_store.hpp"

namespace kgned {

/// Knobs controlling how much KG context reaches the classifier.
struct ContextConfig {
    Hops hops = Hops::One;
    std::size_t max_triples = 15;
    std::size_t max_seq_len = 512;
    bool include_sentence = true;

    /// Number of distinct segment ids an input can carry: sentence, surface,
    /// and one per triple.
    std::size_t segment_count() const noexcept { return 2 + max_triples; }

    /// Throws InputError when max_seq_len < 16.
    void validate() const;

    friend bool operator==(const ContextConfig&, const ContextConfig&) = default;
};

struct VerbalizedTriple {
    std::string text;  ///< "<head label> <relation label> <tail label or literal>"
    Triple source;
    std::size_t token_count = 0;
};

/// `kept` is always a prefix of `full`.
struct ContextBundle {
    std::vector<VerbalizedTriple> full;
    std::vector<VerbalizedTriple> kept;
    std::size_t dropped_count = 0;
};

VerbalizedTriple verbalize(const TripleStore& store, const Triple& triple);

/// Verbalizes the first `cfg.max_triples` neighbors of `entity` and keeps the
/// longest prefix whose tokens, plus one separator per triple, fit `budget`.
ContextBundle build_context(const TripleStore& store, const EntityId& entity,
                            const ContextConfig& cfg, std::size_t budget);

/// Budget-limited prefix selection over already verbalized triples.
ContextBundle fit_context(std::vector<VerbalizedTriple> full, std::size_t budget);

/// One verbalized triple per line; kept triples first, dropped ones prefixed with "# ".
void dump_context(std::ostream& out, const ContextBundle& bundle);

}  // namespace kgned
