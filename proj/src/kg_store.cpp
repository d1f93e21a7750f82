#include "kgned/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace kgned {

std::string_view to_string(Hops hops) {
    return hops == Hops::One ? "1" : "12";
}

Hops parse_hops(std::string_view text) {
    if (text == "1") return Hops::One;
    if (text == "12" || text == "1&2" || text == "1+2") return Hops::OneAndTwo;
    throw InputError("hops must be 1 or 12, got '" + std::string(text) + "'");
}

std::string_view to_string(LabelKind kind) {
    switch (kind) {
        case LabelKind::Label: return "label";
        case LabelKind::Alias: return "alias";
        case LabelKind::Description: return "description";
    }
    return "label";
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
    if (text == "label") return LabelKind::Label;
    if (text == "alias") return LabelKind::Alias;
    if (text == "description") return LabelKind::Description;
    return std::nullopt;
}

namespace {

std::string dedup_key(const RelationId& relation, const std::string& tail, bool literal, int hop) {
    std::string key = relation.str();
    key += '\x1f';
    key += tail;
    key += '\x1f';
    key += literal ? '1' : '0';
    key += static_cast<char>('0' + hop);
    return key;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(number, std::string_view(line));
    }
}

}  // namespace

bool TripleStore::add_triple(const EntityId& head, const RelationId& relation, std::string tail,
                             bool tail_is_literal, int hop) {
    if (hop != 1 && hop != 2) throw InputError("hop must be 1 or 2, got " + std::to_string(hop));
    if (tail.empty()) throw InputError("triple tail must not be empty");
    if (!tail_is_literal) EntityId{tail};  // validates

    auto [it, inserted] = groups_.try_emplace(head);
    if (inserted) head_order_.push_back(head);
    HeadGroups& g = it->second;
    if (!g.seen.insert(dedup_key(relation, tail, tail_is_literal, hop)).second) return false;

    auto& group = hop == 1 ? g.hop1 : g.hop2;
    group.push_back(Triple{head, relation, std::move(tail), tail_is_literal, hop, group.size()});
    ++triple_count_;
    return true;
}

void TripleStore::add_label(const std::string& subject, LabelKind kind, std::string text) {
    if (subject.empty()) throw InputError("label subject must not be empty");
    if (detail::has_whitespace(subject)) throw InputError("label subject contains whitespace: '" + subject + "'");
    if (text.empty()) throw InputError("empty label text for " + subject);
    auto [it, inserted] = labels_.try_emplace(subject);
    if (inserted) subject_order_.push_back(subject);
    SubjectLabels& s = it->second;
    switch (kind) {
        case LabelKind::Label:
            if (s.label) {
                if (*s.label == text) return;
                throw InputError("conflicting primary labels for " + subject + ": '" + *s.label +
                                 "' vs '" + text + "'");
            }
            s.label = std::move(text);
            break;
        case LabelKind::Alias:
            if (std::find(s.aliases.begin(), s.aliases.end(), text) != s.aliases.end()) return;
            s.aliases.push_back(std::move(text));
            break;
        case LabelKind::Description:
            if (std::find(s.descriptions.begin(), s.descriptions.end(), text) != s.descriptions.end())
                return;
            s.descriptions.push_back(std::move(text));
            break;
    }
    ++label_count_;
}

bool TripleStore::has_primary_label(std::string_view subject) const {
    auto it = labels_.find(std::string(subject));
    return it != labels_.end() && it->second.label.has_value();
}

void TripleStore::remove_head(const EntityId& head) {
    auto it = groups_.find(head);
    if (it == groups_.end()) return;
    triple_count_ -= it->second.hop1.size() + it->second.hop2.size();
    groups_.erase(it);
    head_order_.erase(std::remove(head_order_.begin(), head_order_.end(), head), head_order_.end());
}

std::vector<LabelRecord> TripleStore::labels(std::string_view subject) const {
    std::vector<LabelRecord> out;
    std::string key(subject);
    auto it = labels_.find(key);
    if (it == labels_.end() || !it->second.label) {
        out.push_back({key, LabelKind::Label, key});
    } else {
        out.push_back({key, LabelKind::Label, *it->second.label});
    }
    if (it != labels_.end()) {
        for (const auto& a : it->second.aliases) out.push_back({key, LabelKind::Alias, a});
        for (const auto& d : it->second.descriptions) out.push_back({key, LabelKind::Description, d});
    }
    return out;
}

std::string TripleStore::primary_label(std::string_view subject) const {
    auto it = labels_.find(std::string(subject));
    if (it == labels_.end() || !it->second.label) return std::string(subject);
    return *it->second.label;
}

std::vector<Triple> TripleStore::neighbors(const EntityId& head, Hops hops) const {
    auto it = groups_.find(head);
    if (it == groups_.end()) return {};
    std::vector<Triple> out = it->second.hop1;
    if (hops == Hops::OneAndTwo)
        out.insert(out.end(), it->second.hop2.begin(), it->second.hop2.end());
    return out;
}

bool TripleStore::contains_head(const EntityId& head) const {
    return groups_.contains(head);
}

bool operator==(const TripleStore& a, const TripleStore& b) {
    if (a.triple_count_ != b.triple_count_ || a.label_count_ != b.label_count_) return false;
    if (a.groups_.size() != b.groups_.size() || a.labels_.size() != b.labels_.size()) return false;
    for (const auto& [head, g] : a.groups_) {
        auto it = b.groups_.find(head);
        if (it == b.groups_.end() || g.hop1 != it->second.hop1 || g.hop2 != it->second.hop2)
            return false;
    }
    for (const auto& [subject, l] : a.labels_) {
        auto it = b.labels_.find(subject);
        if (it == b.labels_.end()) return false;
        const auto& r = it->second;
        if (l.label != r.label || l.aliases != r.aliases || l.descriptions != r.descriptions)
            return false;
    }
    return true;
}

std::string escape_field(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_field(std::string_view escaped) {
    std::string out;
    out.reserve(escaped.size());
    for (std::size_t i = 0; i < escaped.size(); ++i) {
        char c = escaped[i];
        if (c != '\\' || i + 1 == escaped.size()) {
            out += c;
            continue;
        }
        char n = escaped[++i];
        switch (n) {
            case '\\': out += '\\'; break;
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default:
                out += '\\';
                out += n;
        }
    }
    return out;
}

void read_triples(std::istream& in, TripleStore& store, const std::string& source_name) {
    for_each_line(in, [&](std::size_t line, std::string_view text) {
        auto cols = split_tabs(text);
        if (cols.size() != 5)
            throw ParseError(source_name, line,
                             "expected 5 tab-separated columns, got " + std::to_string(cols.size()));
        int hop = 0;
        if (cols[3] == "1") hop = 1;
        else if (cols[3] == "2") hop = 2;
        else throw ParseError(source_name, line, "unknown hop value '" + std::string(cols[3]) + "'");
        bool literal = false;
        if (cols[4] == "1") literal = true;
        else if (cols[4] != "0")
            throw ParseError(source_name, line, "is_literal must be 0 or 1");
        try {
            store.add_triple(EntityId{unescape_field(cols[0])}, RelationId{unescape_field(cols[1])},
                             unescape_field(cols[2]), literal, hop);
        } catch (const InputError& e) {
            throw ParseError(source_name, line, e.what());
        }
    });
}

void read_labels(std::istream& in, TripleStore& store, const std::string& source_name) {
    for_each_line(in, [&](std::size_t line, std::string_view text) {
        auto cols = split_tabs(text);
        if (cols.size() != 3)
            throw ParseError(source_name, line,
                             "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
        auto kind = parse_label_kind(cols[1]);
        if (!kind) throw ParseError(source_name, line, "unknown label kind '" + std::string(cols[1]) + "'");
        try {
            store.add_label(unescape_field(cols[0]), *kind, unescape_field(cols[2]));
        } catch (const InputError& e) {
            throw ParseError(source_name, line, e.what());
        }
    });
}

TripleStore load_store(const std::filesystem::path& triples_file,
                       const std::filesystem::path& labels_file) {
    TripleStore store;
    std::ifstream triples(triples_file);
    if (!triples) throw ParseError(triples_file.string(), 0, "cannot open");
    read_triples(triples, store, triples_file.string());
    std::ifstream labels(labels_file);
    if (!labels) throw ParseError(labels_file.string(), 0, "cannot open");
    read_labels(labels, store, labels_file.string());
    return store;
}

TripleStore load_store_dir(const std::filesystem::path& dir) {
    TripleStore store;
    const auto triples_path = dir / kTriplesFileName;
    const auto labels_path = dir / kLabelsFileName;
    if (std::ifstream in{triples_path}) read_triples(in, store, triples_path.string());
    if (std::ifstream in{labels_path}) read_labels(in, store, labels_path.string());
    return store;
}

void write_triples(std::ostream& out, const TripleStore& store) {
    for (const auto& head : store.heads()) {
        for (const auto& t : store.neighbors(head, Hops::OneAndTwo)) {
            out << escape_field(t.head.str()) << '\t' << escape_field(t.relation.str()) << '\t'
                << escape_field(t.tail) << '\t' << t.hop << '\t' << (t.tail_is_literal ? 1 : 0)
                << '\n';
        }
    }
}

void write_labels(std::ostream& out, const TripleStore& store) {
    for (const auto& subject : store.subjects()) {
        for (const auto& rec : store.labels(subject)) {
            // skip the synthetic fallback for subjects that only carry aliases/descriptions
            if (rec.kind == LabelKind::Label && !store.has_primary_label(subject)) continue;
            out << escape_field(rec.subject) << '\t' << to_string(rec.kind) << '\t'
                << escape_field(rec.text) << '\n';
        }
    }
}

void write_store(const TripleStore& store, const std::filesystem::path& triples_file,
                 const std::filesystem::path& labels_file) {
    std::ofstream triples(triples_file, std::ios::binary | std::ios::trunc);
    if (!triples) throw Error("cannot write " + triples_file.string());
    write_triples(triples, store);
    std::ofstream labels(labels_file, std::ios::binary | std::ios::trunc);
    if (!labels) throw Error("cannot write " + labels_file.string());
    write_labels(labels, store);
}

}  // namespace kgned
