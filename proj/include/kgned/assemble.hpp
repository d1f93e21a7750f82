#pragma once

#include <cstddef>

#include "kgned/context.hpp"
#include "kgned/tokenize.hpp"

namespace kgned {

/// Tokens left for KG context after [CLS] sentence [SEP] surface [SEP],
/// with the sentence tail-truncated if the prefix alone would not fit.
std::size_t context_budget(const Vocab& vocab, const Mention& mention, const ContextConfig& cfg);

/// Lays out
///   [CLS] sentence [SEP] surface [SEP] triple_1 [SEP] ... triple_k [SEP] [PAD]...
/// with segment 0 for the sentence part, 1 for the surface part and 1 + i for
/// triple i (including its trailing separator). Padding has segment 0, mask 0.
///
/// Throws InputError if `bundle.kept` does not fit the budget reported by
/// context_budget, or holds more triples than cfg.max_triples.
AssembledInput assemble(const Vocab& vocab, const Mention& mention, const ContextBundle& bundle,
                        const ContextConfig& cfg);

}  // namespace kgned
