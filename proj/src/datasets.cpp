#include "kgned/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <class Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t number = 0;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, number, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(source, number, "expected a JSON object");
        fn(number, index++, obj);
    }
}

const json& require(const json& obj, const std::string& field, const std::string& source,
                    std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(source, line, "missing field '" + field + "'");
    return *it;
}

std::vector<EntityId> id_list(const json& value, const std::string& field, const std::string& source,
                              std::size_t line) {
    if (!value.is_array()) throw ParseError(source, line, "field '" + field + "' must be an array");
    std::vector<EntityId> out;
    std::set<std::string> seen;
    for (const auto& v : value) {
        if (!v.is_string()) throw ParseError(source, line, "field '" + field + "' must hold strings");
        auto s = v.get<std::string>();
        if (!seen.insert(s).second) continue;
        try {
            out.emplace_back(std::move(s));
        } catch (const InputError& e) {
            throw ParseError(source, line, e.what());
        }
    }
    return out;
}

}  // namespace

bool MentionExample::gold_missing() const {
    return gold && !candidates.empty() &&
           std::find(candidates.begin(), candidates.end(), *gold) == candidates.end();
}

std::vector<MentionExample> read_jsonl(std::istream& in, const std::string& source) {
    std::vector<MentionExample> out;
    std::set<std::string> ids;
    for_each_json_line(in, source, [&](std::size_t line, std::size_t index, const json& obj) {
        MentionExample ex;
        const auto& sentence = require(obj, "sentence", source, line);
        const auto& surface = require(obj, "surface", source, line);
        const auto& span = require(obj, "span", source, line);
        const auto& gold = require(obj, "gold", source, line);
        const auto& candidates = require(obj, "candidates", source, line);
        if (!sentence.is_string() || !surface.is_string())
            throw ParseError(source, line, "sentence and surface must be strings");
        if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() ||
            !span[1].is_number_unsigned())
            throw ParseError(source, line, "span must be [start, end] with non-negative integers");

        ex.mention.sentence = sentence.get<std::string>();
        ex.mention.surface = surface.get<std::string>();
        ex.mention.begin = span[0].get<std::size_t>();
        ex.mention.end = span[1].get<std::size_t>();
        try {
            ex.mention.validate();
        } catch (const InputError& e) {
            throw ParseError(source, line, std::string("bad span: ") + e.what());
        }

        if (!gold.is_null()) {
            if (!gold.is_string()) throw ParseError(source, line, "gold must be a string or null");
            try {
                ex.gold = EntityId{gold.get<std::string>()};
            } catch (const InputError& e) {
                throw ParseError(source, line, e.what());
            }
        }
        ex.candidates = id_list(candidates, "candidates", source, line);
        if (auto it = obj.find("negatives"); it != obj.end() && !it->is_null())
            ex.negatives = id_list(*it, "negatives", source, line);
        if (ex.gold && std::find(ex.negatives.begin(), ex.negatives.end(), *ex.gold) != ex.negatives.end())
            throw ParseError(source, line, "negatives contain the gold entity");

        if (auto it = obj.find("id"); it != obj.end()) {
            if (!it->is_string()) throw ParseError(source, line, "id must be a string");
            ex.id = it->get<std::string>();
        } else {
            ex.id = std::to_string(index);
        }
        if (!ids.insert(ex.id).second) throw ParseError(source, line, "duplicate id '" + ex.id + "'");
        out.push_back(std::move(ex));
    });
    return out;
}

std::vector<MentionExample> load_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string(), 0, "cannot open");
    return read_jsonl(in, file.string());
}

void write_jsonl(std::ostream& out, const std::vector<MentionExample>& examples) {
    for (const auto& ex : examples) {
        ordered_json obj;
        obj["id"] = ex.id;
        obj["sentence"] = ex.mention.sentence;
        obj["surface"] = ex.mention.surface;
        obj["span"] = {ex.mention.begin, ex.mention.end};
        obj["gold"] = ex.gold ? ordered_json(ex.gold->str()) : ordered_json(nullptr);
        obj["candidates"] = ordered_json::array();
        for (const auto& c : ex.candidates) obj["candidates"].push_back(c.str());
        obj["negatives"] = ordered_json::array();
        for (const auto& n : ex.negatives) obj["negatives"].push_back(n.str());
        out << obj.dump() << '\n';
    }
}

void save_jsonl(const std::filesystem::path& file, const std::vector<MentionExample>& examples) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    write_jsonl(out, examples);
}

std::vector<PairExample> to_pairs(const std::vector<MentionExample>& examples,
                                  bool candidates_as_negatives) {
    std::vector<PairExample> pairs;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        if (ex.gold) pairs.push_back({i, *ex.gold, 1});
        for (const auto& n : ex.negatives) pairs.push_back({i, n, 0});
        if (!candidates_as_negatives) continue;
        for (const auto& c : ex.candidates) {
            if (ex.gold && c == *ex.gold) continue;
            if (std::find(ex.negatives.begin(), ex.negatives.end(), c) != ex.negatives.end()) continue;
            pairs.push_back({i, c, 0});
        }
    }
    return pairs;
}

ContextPipeline::ContextPipeline(const TripleStore* store, const Vocab& vocab, ContextConfig cfg)
    : store_(store), vocab_(&vocab), cfg_(cfg) {
    cfg_.validate();
}

ContextBundle ContextPipeline::context_for(const Mention& mention,
                                           const std::optional<EntityId>& candidate) const {
    if (!store_ || !candidate || cfg_.max_triples == 0) return {};
    return build_context(*store_, *candidate, cfg_, context_budget(*vocab_, mention, cfg_));
}

AssembledInput ContextPipeline::build(const Mention& mention,
                                      const std::optional<EntityId>& candidate) const {
    return assemble(*vocab_, mention, context_for(mention, candidate), cfg_);
}

InputBuilder ContextPipeline::builder() const {
    return [this](const Mention& mention, const EntityId& candidate) { return build(mention, candidate); };
}

LabeledInput prepare(const PairExample& pair, const std::vector<MentionExample>& examples,
                     const ContextPipeline& pipeline) {
    if (pair.example >= examples.size()) throw InputError("pair refers to a missing example");
    return LabeledInput{pipeline.build(examples[pair.example].mention, pair.candidate), pair.label};
}

std::vector<LabeledInput> prepare_all(const std::vector<PairExample>& pairs,
                                      const std::vector<MentionExample>& examples,
                                      const ContextPipeline& pipeline) {
    std::vector<LabeledInput> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(prepare(p, examples, pipeline));
    return out;
}

std::optional<EntityId> WikidataAlignment::lookup(const std::string& title) const {
    auto it = map_.find(title);
    return it == map_.end() ? std::nullopt : it->second;
}

std::size_t WikidataAlignment::resolvable_count() const {
    return static_cast<std::size_t>(
        std::count_if(map_.begin(), map_.end(), [](const auto& kv) { return kv.second.has_value(); }));
}

std::vector<std::string> WikidataAlignment::unresolved_titles() const {
    std::vector<std::string> out;
    for (const auto& [title, id] : map_)
        if (!id) out.push_back(title);
    return out;
}

void WikidataAlignment::add(const std::string& title, std::optional<EntityId> entity) {
    auto [it, inserted] = map_.try_emplace(title, entity);
    if (!inserted && it->second != entity)
        throw InputError("title '" + title + "' is aligned to conflicting ids");
}

WikidataAlignment wikidata_alignment(const std::filesystem::path& map_file) {
    std::ifstream in(map_file);
    if (!in) throw ParseError(map_file.string(), 0, "cannot open");
    WikidataAlignment alignment;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw ParseError(map_file.string(), number, "expected title<TAB>entity_id");
        const auto title = line.substr(0, tab);
        const auto id = line.substr(tab + 1);
        try {
            alignment.add(title, id.empty() ? std::nullopt : std::optional<EntityId>(EntityId{id}));
        } catch (const InputError& e) {
            throw ParseError(map_file.string(), number, e.what());
        }
    }
    return alignment;
}

AdapterConfig AdapterConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string(), 0, "cannot open");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(file.string(), 0, std::string("invalid JSON: ") + e.what());
    }
    AdapterConfig out;
    const json fields = cfg.value("fields", json::object());
    auto pick = [&](const char* key, std::string& target) {
        if (auto it = fields.find(key); it != fields.end()) {
            if (!it->is_string()) throw ParseError(file.string(), 0, std::string("fields.") + key + " must be a string");
            target = it->get<std::string>();
        }
    };
    pick("sentence", out.sentence);
    pick("surface", out.surface);
    pick("span", out.span);
    pick("gold", out.gold);
    pick("candidates", out.candidates);
    pick("negatives", out.negatives);
    pick("id", out.id);
    out.values_are_titles = cfg.value("values_are_titles", false);
    return out;
}

std::vector<MentionExample> adapt_jsonl(std::istream& in, const std::string& source,
                                        const AdapterConfig& config,
                                        const WikidataAlignment* alignment) {
    if (config.values_are_titles && !alignment)
        throw InputError("adapter maps titles but no alignment was supplied");

    auto resolve = [&](const std::string& value) -> std::optional<EntityId> {
        if (!config.values_are_titles) return EntityId{value};
        return alignment->lookup(value);
    };
    auto resolve_list = [&](const json& list, const std::string& field, std::size_t line) {
        if (!list.is_array()) throw ParseError(source, line, "field '" + field + "' must be an array");
        std::vector<EntityId> out;
        for (const auto& v : list) {
            if (!v.is_string()) throw ParseError(source, line, "field '" + field + "' must hold strings");
            if (auto id = resolve(v.get<std::string>());
                id && std::find(out.begin(), out.end(), *id) == out.end())
                out.push_back(*id);
        }
        return out;
    };

    std::vector<MentionExample> out;
    for_each_json_line(in, source, [&](std::size_t line, std::size_t index, const json& obj) {
        MentionExample ex;
        const auto& sentence = require(obj, config.sentence, source, line);
        const auto& surface = require(obj, config.surface, source, line);
        if (!sentence.is_string() || !surface.is_string())
            throw ParseError(source, line, "sentence and surface must be strings");
        try {
            if (config.span.empty()) {
                ex.mention = Mention::from_surface(sentence.get<std::string>(), surface.get<std::string>());
            } else {
                const auto& span = require(obj, config.span, source, line);
                if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() ||
                    !span[1].is_number_unsigned())
                    throw ParseError(source, line, "span must be [start, end]");
                ex.mention.sentence = sentence.get<std::string>();
                ex.mention.surface = surface.get<std::string>();
                ex.mention.begin = span[0].get<std::size_t>();
                ex.mention.end = span[1].get<std::size_t>();
                ex.mention.validate();
            }
            if (auto it = obj.find(config.gold); it != obj.end() && it->is_string())
                ex.gold = resolve(it->get<std::string>());
        } catch (const InputError& e) {
            throw ParseError(source, line, e.what());
        }
        ex.candidates = resolve_list(require(obj, config.candidates, source, line), config.candidates, line);
        if (auto it = obj.find(config.negatives); it != obj.end() && !it->is_null())
            ex.negatives = resolve_list(*it, config.negatives, line);
        if (ex.gold) std::erase(ex.negatives, *ex.gold);
        if (auto it = obj.find(config.id); it != obj.end() && it->is_string())
            ex.id = it->get<std::string>();
        else if (it != obj.end() && it->is_number_integer())
            ex.id = std::to_string(it->get<long long>());
        else
            ex.id = std::to_string(index);
        out.push_back(std::move(ex));
    });
    return out;
}

}  // namespace kgned
