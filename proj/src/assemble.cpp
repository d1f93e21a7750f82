#include "kgned/assemble.hpp"

#include <algorithm>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

struct Prefix {
    std::vector<TokenId> sentence;
    std::vector<TokenId> surface;

    std::size_t size() const { return 3 + sentence.size() + surface.size(); }
};

Prefix encode_prefix(const Vocab& vocab, const Mention& mention, const ContextConfig& cfg) {
    cfg.validate();
    Prefix p;
    if (cfg.include_sentence) p.sentence = encode(vocab, mention.sentence);
    p.surface = encode(vocab, mention.surface);
    const std::size_t limit = cfg.max_seq_len;
    if (p.size() > limit) {
        const std::size_t room = limit - 3;
        p.sentence.resize(room > p.surface.size() ? std::min(p.sentence.size(), room - p.surface.size())
                                                  : 0);
        if (p.surface.size() > room) p.surface.resize(room);
    }
    return p;
}

}  // namespace

std::size_t context_budget(const Vocab& vocab, const Mention& mention, const ContextConfig& cfg) {
    return cfg.max_seq_len - encode_prefix(vocab, mention, cfg).size();
}

AssembledInput assemble(const Vocab& vocab, const Mention& mention, const ContextBundle& bundle,
                        const ContextConfig& cfg) {
    const Prefix prefix = encode_prefix(vocab, mention, cfg);
    if (bundle.kept.size() > cfg.max_triples)
        throw InputError("context has " + std::to_string(bundle.kept.size()) +
                         " triples but max_triples is " + std::to_string(cfg.max_triples));

    AssembledInput in;
    in.token_ids.reserve(cfg.max_seq_len);
    in.segment_ids.reserve(cfg.max_seq_len);
    auto push = [&](TokenId id, std::int32_t segment) {
        in.token_ids.push_back(id);
        in.segment_ids.push_back(segment);
    };

    push(kClsId, 0);
    for (TokenId id : prefix.sentence) push(id, 0);
    push(kSepId, 0);
    for (TokenId id : prefix.surface) push(id, 1);
    push(kSepId, 1);

    std::int32_t segment = 2;
    for (const auto& triple : bundle.kept) {
        for (TokenId id : encode(vocab, triple.text)) push(id, segment);
        push(kSepId, segment);
        ++segment;
    }

    if (in.token_ids.size() > cfg.max_seq_len)
        throw InputError("context does not fit: " + std::to_string(in.token_ids.size()) +
                         " tokens for max_seq_len " + std::to_string(cfg.max_seq_len));

    in.length = in.token_ids.size();
    in.mask.assign(in.length, 1);
    in.token_ids.resize(cfg.max_seq_len, kPadId);
    in.segment_ids.resize(cfg.max_seq_len, 0);
    in.mask.resize(cfg.max_seq_len, 0);
    return in;
}

}  // namespace kgned
