#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgned/kg_store.hpp"

namespace kgned {

/// One RDF term from a SPARQL JSON results binding.
struct RdfTerm {
    enum class Kind { Iri, Literal, BlankNode };
    Kind kind = Kind::Literal;
    std::string value;
    std::string lang;
    std::string datatype;
};

using SparqlRow = std::map<std::string, RdfTerm>;

/// Parses the standard SPARQL 1.1 JSON results document. Throws ProtocolError.
std::vector<SparqlRow> parse_sparql_results(std::string_view body);

struct SparqlEndpoint {
    std::string url;  ///< e.g. https://query.wikidata.org/sparql
    bool use_post = false;
    std::chrono::seconds timeout{30};
    std::string user_agent = "kgned/0.1";
    /// Base IRI of entities; ids are appended to it to form the subject IRI.
    std::string entity_iri_base = "http://www.wikidata.org/entity/";
    std::string language = "en";
};

/// Runs one SELECT query and returns its rows.
///
/// Throws FetchError on transport failure, EndpointError on a non-2xx status
/// and ProtocolError when the body is not SPARQL JSON results.
std::vector<SparqlRow> run_select(const SparqlEndpoint& endpoint, const std::string& query);

std::string one_hop_query(const SparqlEndpoint& endpoint, const EntityId& entity, std::size_t cap);
std::string two_hop_query(const SparqlEndpoint& endpoint, const EntityId& entity, std::size_t cap);
std::string entity_labels_query(const SparqlEndpoint& endpoint, const EntityId& entity);

/// Maps well-known IRIs to short ids (wd:Q42 -> "Q42", wdt:P31 -> "P31",
/// schema:description -> "schema:description"). Unknown IRIs are returned whole.
std::string compact_iri(std::string_view iri);

/// Readable fallback for a relation without a fetched label:
/// "schema:dateModified" -> "date modified".
std::string relation_fallback_label(std::string_view relation_id);

struct FetchResult {
    std::vector<Triple> triples;
    std::vector<LabelRecord> labels;
};

/// Fetches up to `cap` triples per hop level for `entity`, in endpoint order,
/// plus labels for the entity, the relations and the entity tails.
FetchResult fetch_remote(const SparqlEndpoint& endpoint, const EntityId& entity, Hops hops,
                         std::size_t cap);

/// On-disk cache of fetched triples: `triples.tsv`, `labels.tsv` and
/// `fetched.txt` (one fetched entity id per line) under one directory.
/// Writes are serialized; the files always hold a loadable store.
class TripleCache {
public:
    explicit TripleCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    bool is_cached(const EntityId& entity) const;

    /// Replaces every cached triple of `entity` with `result` and merges its
    /// labels. Existing primary labels win over fetched ones.
    void put(const EntityId& entity, const FetchResult& result);

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

/// fetch_remote followed by TripleCache::put.
FetchResult fetch_remote(const SparqlEndpoint& endpoint, const EntityId& entity, Hops hops,
                         std::size_t cap, TripleCache& cache);

struct FetchOutcome {
    EntityId entity;
    bool skipped = false;   ///< already cached
    std::optional<std::string> error;
    std::size_t triple_count = 0;
};

struct FetchManyOptions {
    Hops hops = Hops::One;
    std::size_t cap = 15;
    std::size_t parallelism = 4;
    std::size_t retries = 2;  ///< extra attempts after a FetchError
    bool skip_cached = true;
};

/// Fetches every entity into the cache with bounded parallelism. Outcomes are
/// returned in input order.
std::vector<FetchOutcome> fetch_many(const SparqlEndpoint& endpoint,
                                     const std::vector<EntityId>& entities, TripleCache& cache,
                                     const FetchManyOptions& options);

}  // namespace kgned
