#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgned/assemble.hpp"
#include "kgned/kg_store.hpp"
#include "kgned/train.hpp"

namespace kgned {

/// One line of the canonical dataset JSONL.
struct MentionExample {
    std::string id;
    Mention mention;
    std::optional<EntityId> gold;  ///< empty: out-of-KB mention
    std::vector<EntityId> candidates;
    std::vector<EntityId> negatives;

    /// Gold is set, candidates exist, and gold is not among them.
    bool gold_missing() const;

    friend bool operator==(const MentionExample& a, const MentionExample& b) {
        return a.id == b.id && a.mention.sentence == b.mention.sentence &&
               a.mention.begin == b.mention.begin && a.mention.end == b.mention.end &&
               a.mention.surface == b.mention.surface && a.gold == b.gold &&
               a.candidates == b.candidates && a.negatives == b.negatives;
    }
};

/// Fields: sentence, surface, span [start, end) in UTF-8 bytes, gold (string
/// or null), candidates, optional negatives, optional id (defaults to the
/// 0-based index among non-blank lines). Throws ParseError with the line number.
std::vector<MentionExample> load_jsonl(const std::filesystem::path& file);
std::vector<MentionExample> read_jsonl(std::istream& in, const std::string& source_name);
void write_jsonl(std::ostream& out, const std::vector<MentionExample>& examples);
void save_jsonl(const std::filesystem::path& file, const std::vector<MentionExample>& examples);

struct PairExample {
    std::size_t example = 0;  ///< index into the example list
    EntityId candidate;
    int label = 0;  ///< 1 iff candidate is the gold entity
};

/// One positive pair per example with a gold entity, then one negative pair
/// per explicit negative. With `candidates_as_negatives`, non-gold candidates
/// not already listed as negatives also become negative pairs.
std::vector<PairExample> to_pairs(const std::vector<MentionExample>& examples,
                                  bool candidates_as_negatives = false);

/// Turns (mention, candidate) pairs into classifier inputs: reserves the
/// sentence and surface tokens, spends the remaining budget on KG context.
///
/// A null store, a null candidate or max_triples == 0 all give the
/// no-context encoding without touching the store.
class ContextPipeline {
public:
    ContextPipeline(const TripleStore* store, const Vocab& vocab, ContextConfig cfg);

    AssembledInput build(const Mention& mention, const std::optional<EntityId>& candidate) const;
    ContextBundle context_for(const Mention& mention, const std::optional<EntityId>& candidate) const;
    InputBuilder builder() const;

    const ContextConfig& config() const noexcept { return cfg_; }
    const Vocab& vocab() const noexcept { return *vocab_; }

private:
    const TripleStore* store_;
    const Vocab* vocab_;
    ContextConfig cfg_;
};

LabeledInput prepare(const PairExample& pair, const std::vector<MentionExample>& examples,
                     const ContextPipeline& pipeline);

std::vector<LabeledInput> prepare_all(const std::vector<PairExample>& pairs,
                                      const std::vector<MentionExample>& examples,
                                      const ContextPipeline& pipeline);

/// Wikipedia title -> entity id. Titles listed without an id are kept as
/// unresolved so their mentions get zero context.
class WikidataAlignment {
public:
    std::optional<EntityId> lookup(const std::string& title) const;
    bool knows(const std::string& title) const { return map_.contains(title); }
    std::size_t resolvable_count() const;
    std::vector<std::string> unresolved_titles() const;
    std::size_t size() const noexcept { return map_.size(); }

    void add(const std::string& title, std::optional<EntityId> entity);

private:
    std::map<std::string, std::optional<EntityId>> map_;
};

/// Reads `title<TAB>entity_id` rows; an empty entity_id marks a title with
/// no KG counterpart. Conflicting ids for one title are a ParseError.
WikidataAlignment wikidata_alignment(const std::filesystem::path& map_file);

/// Field mapping used to convert a third-party JSONL dataset into the
/// canonical format. Each entry names the source field for a canonical one.
struct AdapterConfig {
    std::string sentence = "sentence";
    std::string surface = "surface";
    std::string span = "span";  ///< empty: locate the surface in the sentence
    std::string gold = "gold";
    std::string candidates = "candidates";
    std::string negatives = "negatives";
    std::string id = "id";
    /// Gold/candidate values are Wikipedia titles resolved through an alignment.
    bool values_are_titles = false;

    static AdapterConfig load(const std::filesystem::path& file);
};

/// Converts a JSONL stream with `config`'s field names into MentionExamples.
/// Unresolvable titles become a null gold (and are dropped from candidate lists).
std::vector<MentionExample> adapt_jsonl(std::istream& in, const std::string& source_name,
                                        const AdapterConfig& config,
                                        const WikidataAlignment* alignment = nullptr);

}  // namespace kgned
