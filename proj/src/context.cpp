#include "kgned/context.hpp"

#include <ostream>

#include "kgned/tokenize.hpp"

namespace kgned {

void ContextConfig::validate() const {
    if (max_seq_len < 16)
        throw InputError("max_seq_len must be >= 16, got " + std::to_string(max_seq_len));
}

VerbalizedTriple verbalize(const TripleStore& store, const Triple& triple) {
    VerbalizedTriple v;
    v.text = store.primary_label(triple.head.str());
    v.text += ' ';
    v.text += store.primary_label(triple.relation.str());
    v.text += ' ';
    v.text += triple.tail_is_literal ? triple.tail : store.primary_label(triple.tail);
    v.token_count = count_tokens(v.text);
    v.source = triple;
    return v;
}

ContextBundle fit_context(std::vector<VerbalizedTriple> full, std::size_t budget) {
    ContextBundle bundle;
    std::size_t used = 0;
    std::size_t n_kept = 0;
    for (const auto& v : full) {
        const std::size_t cost = v.token_count + 1;  // trailing [SEP]
        if (used + cost > budget) break;
        used += cost;
        ++n_kept;
    }
    bundle.kept.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n_kept));
    bundle.dropped_count = full.size() - n_kept;
    bundle.full = std::move(full);
    return bundle;
}

ContextBundle build_context(const TripleStore& store, const EntityId& entity,
                            const ContextConfig& cfg, std::size_t budget) {
    std::vector<VerbalizedTriple> full;
    if (cfg.max_triples > 0) {
        auto triples = store.neighbors(entity, cfg.hops);
        if (triples.size() > cfg.max_triples) triples.resize(cfg.max_triples);
        full.reserve(triples.size());
        for (const auto& t : triples) full.push_back(verbalize(store, t));
    }
    return fit_context(std::move(full), budget);
}

void dump_context(std::ostream& out, const ContextBundle& bundle) {
    for (const auto& v : bundle.kept) out << v.text << '\n';
    for (std::size_t i = bundle.kept.size(); i < bundle.full.size(); ++i)
        out << "# " << bundle.full[i].text << '\n';
}

}  // namespace kgned
