#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgned/ids.hpp"

namespace kgned {

/// Which hop levels feed the context: hop-1 only, or hop-1 followed by hop-2.
enum class Hops { One, OneAndTwo };

std::string_view to_string(Hops hops);
/// Accepts "1", "12", "1&2".
Hops parse_hops(std::string_view text);

/// A KG edge anchored at a candidate entity. For hop 2 the intermediate entity
/// is not kept: the triple is (candidate, hop-2 relation, hop-2 tail).
struct Triple {
    EntityId head;
    RelationId relation;
    std::string tail;  ///< entity id, or the literal value when tail_is_literal
    bool tail_is_literal = false;
    int hop = 1;
    std::size_t rank = 0;  ///< position within the (head, hop) group

    friend bool operator==(const Triple&, const Triple&) = default;
};

enum class LabelKind { Label, Alias, Description };

std::string_view to_string(LabelKind kind);
std::optional<LabelKind> parse_label_kind(std::string_view text);

struct LabelRecord {
    std::string subject;
    LabelKind kind = LabelKind::Label;
    std::string text;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// In-memory KG: triples grouped by (head, hop) in rank order, plus one
/// language worth of labels, aliases and descriptions.
///
/// Mutated only while loading or merging fetched data; afterwards treat it as
/// immutable and share it freely between readers.
class TripleStore {
public:
    /// Appends a triple to its (head, hop) group with the next rank. Returns
    /// false when an identical (head, relation, tail, literal, hop) row exists.
    bool add_triple(const EntityId& head, const RelationId& relation, std::string tail,
                    bool tail_is_literal, int hop);

    /// Adds a label record. Exact duplicates are ignored. A second, different
    /// primary label for the same subject throws InputError.
    void add_label(const std::string& subject, LabelKind kind, std::string text);

    bool has_primary_label(std::string_view subject) const;

    /// Drops every triple headed by `head` (labels are kept).
    void remove_head(const EntityId& head);

    /// Primary label first, then aliases, then descriptions. Never empty: an
    /// unknown subject yields a synthetic primary label equal to its id.
    std::vector<LabelRecord> labels(std::string_view subject) const;

    /// Primary label, falling back to the raw id.
    std::string primary_label(std::string_view subject) const;

    /// Hop-1 triples, or hop-1 followed by hop-2 triples, each in rank order.
    std::vector<Triple> neighbors(const EntityId& head, Hops hops) const;

    bool contains_head(const EntityId& head) const;
    /// Heads in first-insertion order.
    const std::vector<EntityId>& heads() const noexcept { return head_order_; }
    /// Label subjects in first-insertion order.
    const std::vector<std::string>& subjects() const noexcept { return subject_order_; }

    std::size_t triple_count() const noexcept { return triple_count_; }
    std::size_t label_count() const noexcept { return label_count_; }
    bool empty() const noexcept { return triple_count_ == 0 && label_count_ == 0; }

    /// Same triples (with ranks) and same label records per subject; insertion
    /// order of heads and subjects is not compared.
    friend bool operator==(const TripleStore& a, const TripleStore& b);

private:
    struct HeadGroups {
        std::vector<Triple> hop1;
        std::vector<Triple> hop2;
        std::unordered_set<std::string> seen;
    };
    struct SubjectLabels {
        std::optional<std::string> label;
        std::vector<std::string> aliases;
        std::vector<std::string> descriptions;
    };

    std::vector<EntityId> head_order_;
    std::unordered_map<EntityId, HeadGroups> groups_;
    std::vector<std::string> subject_order_;
    std::unordered_map<std::string, SubjectLabels> labels_;
    std::size_t triple_count_ = 0;
    std::size_t label_count_ = 0;
};

/// Reads the triples and labels TSV files (see docs/formats.md).
TripleStore load_store(const std::filesystem::path& triples_file,
                       const std::filesystem::path& labels_file);

/// Loads `<dir>/triples.tsv` and `<dir>/labels.tsv`; a missing file counts as empty.
TripleStore load_store_dir(const std::filesystem::path& dir);

void read_triples(std::istream& in, TripleStore& store, const std::string& source_name);
void read_labels(std::istream& in, TripleStore& store, const std::string& source_name);

void write_triples(std::ostream& out, const TripleStore& store);
void write_labels(std::ostream& out, const TripleStore& store);
void write_store(const TripleStore& store, const std::filesystem::path& triples_file,
                 const std::filesystem::path& labels_file);

/// TSV field escaping: backslash, tab, LF and CR become \\ \t \n \r.
std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped);

inline constexpr const char* kTriplesFileName = "triples.tsv";
inline constexpr const char* kLabelsFileName = "labels.tsv";

}  // namespace kgned
