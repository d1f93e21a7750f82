#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kgned/datasets.hpp"
#include "kgned/kg_store.hpp"

namespace kgned {

/// Generator for a toy disambiguation corpus in which several entities share
/// one label and differ only in their description triple ("<noun> system in
/// <region>"). Each sentence names the region of its gold entity, so only a
/// model that sees the KG context can tell the candidates apart.
struct SyntheticOptions {
    std::size_t n_labels = 60;        ///< ambiguous labels (entity groups)
    std::size_t min_group = 2;        ///< entities per label, inclusive range
    std::size_t max_group = 4;
    std::size_t train_mentions = 300;
    std::size_t test_mentions = 200;
    /// Hop-2 triples per entity pointing at randomly chosen regions.
    std::size_t hop2_distractors = 0;
    /// Adds the two "National Highway" entities (Australia / India) as one group.
    bool include_highway_pair = true;
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    TripleStore store;
    std::vector<MentionExample> train;
    std::vector<MentionExample> test;
    std::size_t group_count = 0;
    std::size_t entity_count = 0;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options);

/// Hop-1 triples for wikidata:Q1967298 and wikidata:Q1967342 in the order
/// description, label, date modified, with matching labels.
TripleStore highway_fixture();

/// Every sentence, surface form and verbalized context of `examples` (for vocab building).
std::vector<std::string> corpus_text(const std::vector<MentionExample>& examples, const TripleStore& store,
                                     Hops hops);

}  // namespace kgned
