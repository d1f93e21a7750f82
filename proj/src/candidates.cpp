#include "kgned/candidates.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

constexpr std::string_view kIndexHeader = "kgned-label-index\t1";

}  // namespace

std::string normalize_label(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    }
    return out;
}

void LabelIndex::add(std::string_view label, const EntityId& entity) {
    auto key = normalize_label(label);
    if (key.empty()) return;
    keys_[std::move(key)].insert(entity);
}

CandidateSet LabelIndex::lookup(std::string_view surface, MatchMode mode) const {
    CandidateSet out;
    out.source = CandidateSource::Index;
    const auto needle = normalize_label(surface);
    if (needle.empty()) return out;

    if (mode == MatchMode::Exact) {
        if (auto it = keys_.find(needle); it != keys_.end())
            out.entities.assign(it->second.begin(), it->second.end());
        return out;
    }
    std::set<EntityId> hits;
    for (const auto& [key, entities] : keys_)
        if (key.find(needle) != std::string::npos) hits.insert(entities.begin(), entities.end());
    out.entities.assign(hits.begin(), hits.end());
    return out;
}

void LabelIndex::save(std::ostream& out) const {
    out << kIndexHeader << '\n';
    for (const auto& [key, entities] : keys_) {
        out << key;
        for (const auto& e : entities) out << '\t' << e.str();
        out << '\n';
    }
}

LabelIndex LabelIndex::load(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line) || line != kIndexHeader)
        throw ParseError(source_name, 1, "missing or unsupported index header");
    LabelIndex index;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw ParseError(source_name, number, "expected key followed by entity ids");
        auto& entities = index.keys_[line.substr(0, tab)];
        std::size_t start = tab + 1;
        while (start <= line.size()) {
            auto end = line.find('\t', start);
            if (end == std::string::npos) end = line.size();
            try {
                entities.insert(EntityId{line.substr(start, end - start)});
            } catch (const InputError& e) {
                throw ParseError(source_name, number, e.what());
            }
            start = end + 1;
        }
    }
    return index;
}

LabelIndex build_index(const TripleStore& store) {
    LabelIndex index;
    for (const auto& subject : store.subjects()) {
        EntityId entity{subject};
        for (const auto& rec : store.labels(subject)) {
            if (rec.kind == LabelKind::Description) continue;
            if (rec.kind == LabelKind::Label && !store.has_primary_label(subject)) continue;
            index.add(rec.text, entity);
        }
    }
    return index;
}

std::map<std::string, CandidateSet> load_candidates(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string(), 0, "cannot open");
    std::map<std::string, CandidateSet> out;
    std::string line;
    std::size_t number = 0;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(file.string(), number, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(file.string(), number, "expected a JSON object");
        if (!obj.contains("candidates") || !obj["candidates"].is_array())
            throw ParseError(file.string(), number, "missing field 'candidates'");

        CandidateSet set;
        set.source = CandidateSource::Precomputed;
        set.mention_id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>()
                                                                     : std::to_string(index);
        std::set<std::string> seen;
        for (const auto& c : obj["candidates"]) {
            if (!c.is_string()) throw ParseError(file.string(), number, "candidate ids must be strings");
            auto id = c.get<std::string>();
            if (!seen.insert(id).second) continue;
            try {
                set.entities.emplace_back(id);
            } catch (const InputError& e) {
                throw ParseError(file.string(), number, e.what());
            }
        }
        if (out.contains(set.mention_id))
            throw ParseError(file.string(), number, "duplicate mention id '" + set.mention_id + "'");
        out.emplace(set.mention_id, std::move(set));
        ++index;
    }
    return out;
}

}  // namespace kgned
