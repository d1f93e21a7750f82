#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgned/kg_store.hpp"

namespace kgned {

/// Lowercases ASCII, collapses whitespace runs to one space and trims.
std::string normalize_label(std::string_view text);

enum class MatchMode { Exact, Contains };
enum class CandidateSource { Index, Precomputed };

struct CandidateSet {
    std::string mention_id;
    std::vector<EntityId> entities;  ///< no duplicates
    CandidateSource source = CandidateSource::Index;
};

/// Normalized label/alias -> entities carrying it.
class LabelIndex {
public:
    void add(std::string_view label, const EntityId& entity);

    /// Exact: entities whose normalized key equals the normalized surface.
    /// Contains: entities with any key containing it. Ascending id order.
    CandidateSet lookup(std::string_view surface, MatchMode mode) const;

    std::size_t key_count() const noexcept { return keys_.size(); }
    const std::map<std::string, std::set<EntityId>>& entries() const noexcept { return keys_; }

    /// Text format with a versioned header; output is byte-identical for equal indices.
    void save(std::ostream& out) const;
    static LabelIndex load(std::istream& in, const std::string& source_name = "<index>");

    friend bool operator==(const LabelIndex&, const LabelIndex&) = default;

private:
    std::map<std::string, std::set<EntityId>> keys_;
};

/// Indexes every primary label and alias in the store.
LabelIndex build_index(const TripleStore& store);

/// Reads the `candidates` list of every line of a dataset JSONL file, keyed by
/// mention id. File order is kept and repeated ids dropped.
std::map<std::string, CandidateSet> load_candidates(const std::filesystem::path& file);

}  // namespace kgned
