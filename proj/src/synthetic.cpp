#include "kgned/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "kgned/context.hpp"
#include "kgned/errors.hpp"

namespace kgned {

namespace {

const std::vector<std::string> kAdjectives = {
    "national", "royal", "central", "grand", "northern", "southern", "united", "federal",
    "coastal", "metropolitan", "imperial", "western"};

const std::vector<std::string> kNouns = {
    "highway", "bank", "museum", "library", "railway", "university", "theatre", "airport",
    "stadium", "orchestra", "gallery", "hospital"};

const std::vector<std::string> kRegions = {
    "australia", "india", "canada", "brazil", "kenya", "norway", "japan", "chile",
    "egypt", "spain", "peru", "nepal", "ghana", "fiji", "cuba", "mali",
    "oman", "laos", "poland", "ireland"};

const std::vector<std::string> kMonths = {"January", "March", "May", "July", "September", "November"};

// {label} is the surface form, {noun} its head noun, {region} the cue.
const std::vector<std::string> kTemplates = {
    "the short {noun} in {region} is part of the {label} link",
    "officials in {region} said the {label} will expand next year",
    "travellers across {region} rely on the {label} every day",
    "the {label} opened a new branch near the capital of {region}",
    "reports from {region} describe the {label} as the largest {noun} there",
    "after the storm in {region} the {label} closed for a week",
    "the {label} in {region} celebrated its anniversary",
    "a study of {region} ranked the {label} first among local institutions",
};

std::string title_case(const std::string& words) {
    std::string out = words;
    bool start = true;
    for (char& c : out) {
        if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        start = c == ' ';
    }
    return out;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

void add_common_relation_labels(TripleStore& store) {
    store.add_label("schema:description", LabelKind::Label, "description");
    store.add_label("rdfs:label", LabelKind::Label, "label");
    store.add_label("schema:dateModified", LabelKind::Label, "date modified");
}

void add_entity(TripleStore& store, const EntityId& id, const std::string& label,
                const std::string& description, const std::string& date) {
    store.add_triple(id, RelationId{"schema:description"}, description, true, 1);
    store.add_triple(id, RelationId{"rdfs:label"}, label, true, 1);
    store.add_triple(id, RelationId{"schema:dateModified"}, date, true, 1);
    store.add_label(id.str(), LabelKind::Label, label);
    store.add_label(id.str(), LabelKind::Description, description);
}

struct Group {
    std::string label;   // title case
    std::string noun;
    std::vector<EntityId> entities;
    std::vector<std::string> regions;  // parallel to entities
};

}  // namespace

TripleStore highway_fixture() {
    TripleStore store;
    add_common_relation_labels(store);
    add_entity(store, EntityId{"Q1967298"}, "National Highway", "highway system in Australia", "31 May 2019");
    add_entity(store, EntityId{"Q1967342"}, "National Highway", "highway system in India", "31 May 2019");
    return store;
}

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options) {
    if (options.min_group < 2 || options.max_group < options.min_group)
        throw InputError("group sizes must satisfy 2 <= min_group <= max_group");
    if (options.max_group > kRegions.size()) throw InputError("max_group exceeds the region pool");
    if (options.n_labels > kAdjectives.size() * kNouns.size())
        throw InputError("at most " + std::to_string(kAdjectives.size() * kNouns.size()) + " labels");

    std::mt19937_64 rng(options.seed);
    SyntheticCorpus corpus;
    TripleStore& store = corpus.store;
    add_common_relation_labels(store);

    std::vector<std::pair<std::size_t, std::size_t>> label_pool;
    for (std::size_t a = 0; a < kAdjectives.size(); ++a)
        for (std::size_t n = 0; n < kNouns.size(); ++n) label_pool.emplace_back(a, n);
    std::shuffle(label_pool.begin(), label_pool.end(), rng);

    std::vector<Group> groups;
    std::size_t next_id = 1000;
    auto fresh_id = [&] { return EntityId{"Q" + std::to_string(next_id++)}; };

    if (options.include_highway_pair) {
        Group g;
        g.label = "National Highway";
        g.noun = "highway";
        g.entities = {EntityId{"Q1967298"}, EntityId{"Q1967342"}};
        g.regions = {"australia", "india"};
        add_entity(store, g.entities[0], g.label, "highway system in Australia", "31 May 2019");
        add_entity(store, g.entities[1], g.label, "highway system in India", "31 May 2019");
        groups.push_back(std::move(g));
        // the fixture pair occupies "national highway"
        std::erase(label_pool, std::pair<std::size_t, std::size_t>{0, 0});
    }

    std::uniform_int_distribution<std::size_t> group_size(options.min_group, options.max_group);
    std::uniform_int_distribution<int> day(1, 28);
    std::uniform_int_distribution<std::size_t> month(0, kMonths.size() - 1);
    std::uniform_int_distribution<int> year(2015, 2020);
    while (groups.size() < options.n_labels) {
        const auto [a, n] = label_pool[groups.size()];
        Group g;
        g.noun = kNouns[n];
        g.label = title_case(kAdjectives[a] + " " + kNouns[n]);
        std::vector<std::string> regions = kRegions;
        std::shuffle(regions.begin(), regions.end(), rng);
        const std::size_t k = group_size(rng);
        const std::string date =
            std::to_string(day(rng)) + " " + kMonths[month(rng)] + " " + std::to_string(year(rng));
        for (std::size_t i = 0; i < k; ++i) {
            EntityId id = fresh_id();
            add_entity(store, id, g.label, g.noun + " system in " + capitalize(regions[i]), date);
            g.entities.push_back(std::move(id));
            g.regions.push_back(regions[i]);
        }
        groups.push_back(std::move(g));
    }

    if (options.hop2_distractors > 0) {
        store.add_label("P361", LabelKind::Label, "part of");
        std::map<std::string, EntityId> region_entities;
        for (const auto& r : kRegions) {
            EntityId id = fresh_id();
            store.add_label(id.str(), LabelKind::Label, "network of " + capitalize(r));
            region_entities.emplace(r, std::move(id));
        }
        std::uniform_int_distribution<std::size_t> pick_region(0, kRegions.size() - 1);
        for (const auto& g : groups) {
            for (const auto& e : g.entities) {
                for (std::size_t i = 0; i < options.hop2_distractors; ++i) {
                    const auto& target = region_entities.at(kRegions[pick_region(rng)]);
                    store.add_triple(e, RelationId{"P361"}, target.str(), false, 2);
                }
            }
        }
    }

    corpus.group_count = groups.size();
    for (const auto& g : groups) corpus.entity_count += g.entities.size();

    std::uniform_int_distribution<std::size_t> pick_group(0, groups.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_template(0, kTemplates.size() - 1);
    auto make_examples = [&](std::size_t count, const std::string& prefix) {
        std::vector<MentionExample> out;
        for (std::size_t i = 0; i < count; ++i) {
            const Group& g = groups[pick_group(rng)];
            std::uniform_int_distribution<std::size_t> pick_gold(0, g.entities.size() - 1);
            const std::size_t gold = pick_gold(rng);
            std::string sentence = kTemplates[pick_template(rng)];
            sentence = replace_all(sentence, "{noun}", g.noun);
            sentence = replace_all(sentence, "{region}", capitalize(g.regions[gold]));
            sentence = replace_all(sentence, "{label}", g.label);
            sentence = capitalize(sentence);

            MentionExample ex;
            char id[32];
            std::snprintf(id, sizeof id, "%s-%04zu", prefix.c_str(), i);
            ex.id = id;
            ex.mention = Mention::from_surface(std::move(sentence), g.label);
            ex.gold = g.entities[gold];
            ex.candidates = g.entities;
            for (std::size_t j = 0; j < g.entities.size(); ++j)
                if (j != gold) ex.negatives.push_back(g.entities[j]);
            out.push_back(std::move(ex));
        }
        return out;
    };
    corpus.train = make_examples(options.train_mentions, "train");
    corpus.test = make_examples(options.test_mentions, "test");
    return corpus;
}

std::vector<std::string> corpus_text(const std::vector<MentionExample>& examples, const TripleStore& store,
                                     Hops hops) {
    std::vector<std::string> out;
    std::set<EntityId> entities;
    for (const auto& ex : examples) {
        out.push_back(ex.mention.sentence);
        out.push_back(ex.mention.surface);
        if (ex.gold) entities.insert(*ex.gold);
        entities.insert(ex.candidates.begin(), ex.candidates.end());
        entities.insert(ex.negatives.begin(), ex.negatives.end());
    }
    for (const auto& e : entities)
        for (const auto& t : store.neighbors(e, hops)) out.push_back(verbalize(store, t).text);
    return out;
}

}  // namespace kgned
