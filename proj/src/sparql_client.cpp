#include "kgned/sparql_client.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace kgned {

namespace {

using nlohmann::json;

constexpr const char* kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";
constexpr const char* kSkosAltLabel = "http://www.w3.org/2004/02/skos/core#altLabel";
constexpr const char* kSchemaDescription = "http://schema.org/description";
constexpr const char* kDirectClaim = "http://wikiba.se/ontology#directClaim";
constexpr const char* kFetchedFileName = "fetched.txt";

struct Prefix {
    std::string_view iri;
    std::string_view shortname;  // empty: drop the prefix entirely
};

constexpr Prefix kPrefixes[] = {
    {"http://www.wikidata.org/entity/", ""},
    {"http://www.wikidata.org/prop/direct/", ""},
    {"http://www.w3.org/2000/01/rdf-schema#", "rdfs:"},
    {"http://www.w3.org/1999/02/22-rdf-syntax-ns#", "rdf:"},
    {"http://www.w3.org/2004/02/skos/core#", "skos:"},
    {"http://schema.org/", "schema:"},
    {"http://wikiba.se/ontology#", "wikibase:"},
    {"http://www.w3.org/2002/07/owl#", "owl:"},
};

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InputError("endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string lang_filter(const std::string& var, const std::string& language) {
    return "FILTER(langMatches(lang(" + var + "), \"" + language + "\"))";
}

std::string triple_query(const SparqlEndpoint& ep, const std::string& pattern, std::size_t cap) {
    const std::string& l = ep.language;
    return "SELECT ?p ?o ?pLabel ?oLabel WHERE {\n"
           "  " + pattern + "\n"
           "  FILTER(!isBlank(?o))\n"
           "  FILTER(!isLiteral(?o) || lang(?o) = \"\" || langMatches(lang(?o), \"" + l + "\"))\n"
           "  OPTIONAL { ?prop <" + kDirectClaim + "> ?p . ?prop <" + kRdfsLabel + "> ?pLabel . " +
           lang_filter("?pLabel", l) + " }\n"
           "  OPTIONAL { ?o <" + kRdfsLabel + "> ?oLabel . " + lang_filter("?oLabel", l) + " }\n"
           "}\nLIMIT " + std::to_string(cap) + "\n";
}

std::string entity_iri(const SparqlEndpoint& ep, const EntityId& entity) {
    return "<" + ep.entity_iri_base + entity.str() + ">";
}

void collect_rows(const std::vector<SparqlRow>& rows, const EntityId& entity, int hop,
                  std::size_t cap, FetchResult& out, std::set<std::string>& seen_labels) {
    auto add_label = [&](const std::string& subject, LabelKind kind, const std::string& text) {
        if (text.empty()) return;
        std::string key = subject + '\x1f' + std::string(to_string(kind)) + '\x1f' + text;
        if (kind == LabelKind::Label) key = subject + '\x1f' + "label";
        if (seen_labels.insert(key).second) out.labels.push_back({subject, kind, text});
    };

    std::set<std::string> seen_rows;
    std::size_t kept = 0;
    for (const auto& row : rows) {
        if (kept >= cap) break;
        auto p = row.find("p");
        auto o = row.find("o");
        if (p == row.end() || o == row.end())
            throw ProtocolError("result row lacks ?p or ?o binding");
        if (p->second.kind != RdfTerm::Kind::Iri || o->second.kind == RdfTerm::Kind::BlankNode)
            continue;
        if (o->second.kind == RdfTerm::Kind::Literal && o->second.value.empty()) continue;

        const std::string relation = compact_iri(p->second.value);
        const bool literal = o->second.kind == RdfTerm::Kind::Literal;
        const std::string tail = literal ? o->second.value : compact_iri(o->second.value);
        if (!literal && detail::has_whitespace(tail)) continue;

        std::string key = relation + '\x1f' + tail + (literal ? "\x1f" "1" : "\x1f" "0");
        if (!seen_rows.insert(key).second) continue;

        out.triples.push_back(Triple{entity, RelationId{relation}, tail, literal, hop, kept});
        ++kept;

        if (auto pl = row.find("pLabel"); pl != row.end())
            add_label(relation, LabelKind::Label, pl->second.value);
        else
            add_label(relation, LabelKind::Label, relation_fallback_label(relation));
        if (!literal) {
            if (auto ol = row.find("oLabel"); ol != row.end())
                add_label(tail, LabelKind::Label, ol->second.value);
        }
    }
}

}  // namespace

std::vector<SparqlRow> parse_sparql_results(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object() ||
        !doc["results"].contains("bindings") || !doc["results"]["bindings"].is_array())
        throw ProtocolError("response lacks results.bindings");

    std::vector<SparqlRow> rows;
    for (const auto& binding : doc["results"]["bindings"]) {
        if (!binding.is_object()) throw ProtocolError("binding is not an object");
        SparqlRow row;
        for (const auto& [var, term] : binding.items()) {
            if (!term.is_object() || !term.contains("type") || !term.contains("value") ||
                !term["type"].is_string() || !term["value"].is_string())
                throw ProtocolError("malformed RDF term for ?" + var);
            RdfTerm t;
            const auto type = term["type"].get<std::string>();
            if (type == "uri") t.kind = RdfTerm::Kind::Iri;
            else if (type == "bnode") t.kind = RdfTerm::Kind::BlankNode;
            else if (type == "literal" || type == "typed-literal") t.kind = RdfTerm::Kind::Literal;
            else throw ProtocolError("unknown RDF term type '" + type + "'");
            t.value = term["value"].get<std::string>();
            if (auto it = term.find("xml:lang"); it != term.end() && it->is_string())
                t.lang = it->get<std::string>();
            if (auto it = term.find("datatype"); it != term.end() && it->is_string())
                t.datatype = it->get<std::string>();
            row.emplace(var, std::move(t));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SparqlRow> run_select(const SparqlEndpoint& endpoint, const std::string& query) {
    const auto url = split_url(endpoint.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_follow_location(true);

    httplib::Headers headers{{"Accept", "application/sparql-results+json"},
                             {"User-Agent", endpoint.user_agent}};
    httplib::Params params{{"query", query}, {"format", "json"}};

    auto result = endpoint.use_post ? client.Post(url.path, headers, params)
                                    : client.Get(url.path, params, headers);
    if (!result)
        throw FetchError("request to " + endpoint.url + " failed: " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw EndpointError(result->status, endpoint.url + " rejected the query");
    return parse_sparql_results(result->body);
}

std::string one_hop_query(const SparqlEndpoint& endpoint, const EntityId& entity, std::size_t cap) {
    return triple_query(endpoint, entity_iri(endpoint, entity) + " ?p ?o .", cap);
}

std::string two_hop_query(const SparqlEndpoint& endpoint, const EntityId& entity, std::size_t cap) {
    return triple_query(endpoint,
                        entity_iri(endpoint, entity) + " ?p1 ?mid . FILTER(isIRI(?mid))\n  ?mid ?p ?o .",
                        cap);
}

std::string entity_labels_query(const SparqlEndpoint& endpoint, const EntityId& entity) {
    const auto e = entity_iri(endpoint, entity);
    return "SELECT ?kind ?text WHERE {\n"
           "  { " + e + " <" + kRdfsLabel + "> ?text . BIND(\"label\" AS ?kind) }\n"
           "  UNION { " + e + " <" + kSkosAltLabel + "> ?text . BIND(\"alias\" AS ?kind) }\n"
           "  UNION { " + e + " <" + kSchemaDescription + "> ?text . BIND(\"description\" AS ?kind) }\n"
           "  " + lang_filter("?text", endpoint.language) + "\n"
           "}\n";
}

std::string compact_iri(std::string_view iri) {
    for (const auto& prefix : kPrefixes) {
        if (iri.size() > prefix.iri.size() && iri.substr(0, prefix.iri.size()) == prefix.iri)
            return std::string(prefix.shortname) + std::string(iri.substr(prefix.iri.size()));
    }
    return std::string(iri);
}

std::string relation_fallback_label(std::string_view relation_id) {
    std::string_view local = relation_id;
    if (auto pos = local.find_last_of(":/#"); pos != std::string_view::npos)
        local = local.substr(pos + 1);
    if (local.empty()) return std::string(relation_id);
    std::string out;
    for (std::size_t i = 0; i < local.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(local[i]);
        if (c == '_' || c == '-') {
            out += ' ';
        } else if (std::isupper(c) && i > 0 && std::islower(static_cast<unsigned char>(local[i - 1]))) {
            out += ' ';
            out += static_cast<char>(std::tolower(c));
        } else {
            out += static_cast<char>(i == 0 ? std::tolower(c) : c);
        }
    }
    return out;
}

FetchResult fetch_remote(const SparqlEndpoint& endpoint, const EntityId& entity, Hops hops,
                         std::size_t cap) {
    if (cap < 1) throw InputError("fetch cap must be >= 1");
    FetchResult out;
    std::set<std::string> seen_labels;

    for (const auto& row : run_select(endpoint, entity_labels_query(endpoint, entity))) {
        auto kind = row.find("kind");
        auto text = row.find("text");
        if (kind == row.end() || text == row.end())
            throw ProtocolError("label row lacks ?kind or ?text binding");
        auto parsed = parse_label_kind(kind->second.value);
        if (!parsed || text->second.value.empty()) continue;
        std::string key = entity.str() + '\x1f' + kind->second.value;
        if (*parsed != LabelKind::Label) key += '\x1f' + text->second.value;
        if (seen_labels.insert(key).second)
            out.labels.push_back({entity.str(), *parsed, text->second.value});
    }

    collect_rows(run_select(endpoint, one_hop_query(endpoint, entity, cap)), entity, 1, cap, out,
                 seen_labels);
    if (hops == Hops::OneAndTwo)
        collect_rows(run_select(endpoint, two_hop_query(endpoint, entity, cap)), entity, 2, cap, out,
                     seen_labels);
    return out;
}

TripleCache::TripleCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

bool TripleCache::is_cached(const EntityId& entity) const {
    std::lock_guard lock(mutex_);
    std::ifstream in(dir_ / kFetchedFileName);
    std::string line;
    while (std::getline(in, line)) {
        if (line == entity.str()) return true;
    }
    return false;
}

void TripleCache::put(const EntityId& entity, const FetchResult& result) {
    std::lock_guard lock(mutex_);
    TripleStore store = load_store_dir(dir_);
    store.remove_head(entity);
    for (const auto& t : result.triples)
        store.add_triple(t.head, t.relation, t.tail, t.tail_is_literal, t.hop);
    for (const auto& l : result.labels) {
        if (l.kind == LabelKind::Label && store.has_primary_label(l.subject)) continue;
        store.add_label(l.subject, l.kind, l.text);
    }
    write_store(store, dir_ / kTriplesFileName, dir_ / kLabelsFileName);

    std::set<std::string> fetched;
    std::vector<std::string> order;
    {
        std::ifstream in(dir_ / kFetchedFileName);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && fetched.insert(line).second) order.push_back(line);
        }
    }
    if (fetched.insert(entity.str()).second) order.push_back(entity.str());
    std::ofstream out(dir_ / kFetchedFileName, std::ios::trunc);
    for (const auto& id : order) out << id << '\n';
}

FetchResult fetch_remote(const SparqlEndpoint& endpoint, const EntityId& entity, Hops hops,
                         std::size_t cap, TripleCache& cache) {
    FetchResult result = fetch_remote(endpoint, entity, hops, cap);
    cache.put(entity, result);
    return result;
}

std::vector<FetchOutcome> fetch_many(const SparqlEndpoint& endpoint,
                                     const std::vector<EntityId>& entities, TripleCache& cache,
                                     const FetchManyOptions& options) {
    std::vector<FetchOutcome> outcomes(entities.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < entities.size(); i = next++) {
            FetchOutcome& outcome = outcomes[i];
            outcome.entity = entities[i];
            if (options.skip_cached && cache.is_cached(entities[i])) {
                outcome.skipped = true;
                continue;
            }
            for (std::size_t attempt = 0;; ++attempt) {
                try {
                    auto result = fetch_remote(endpoint, entities[i], options.hops, options.cap, cache);
                    outcome.triple_count = result.triples.size();
                    outcome.error.reset();
                    break;
                } catch (const FetchError& e) {
                    outcome.error = e.what();
                    if (attempt >= options.retries) break;
                    std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
                } catch (const Error& e) {
                    outcome.error = e.what();
                    break;
                }
            }
        }
    };

    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min(options.parallelism, entities.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    return outcomes;
}

}  // namespace kgned
