#pragma once

#include <cstdint>
#include <filesystem>

#include "kgned/context.hpp"
#include "kgned/model.hpp"
#include "kgned/tokenize.hpp"

namespace kgned {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to score new inputs: the classifier, its vocabulary and
/// the context settings it was trained with.
struct Checkpoint {
    Classifier model;
    Vocab vocab;
    ContextConfig context;
};

/// Binary little-endian file: magic, version, configs, vocab, parameters,
/// end marker. Parameters are stored as raw IEEE doubles, so a reloaded
/// model reproduces forward() bit for bit.
void save_checkpoint(const std::filesystem::path& file, const Classifier& model, const Vocab& vocab,
                     const ContextConfig& context);

/// Throws CheckpointError on a bad magic, a version mismatch, truncation or,
/// when `expected_vocab` is given, a vocabulary of a different size.
Checkpoint load_checkpoint(const std::filesystem::path& file, const Vocab* expected_vocab = nullptr);

}  // namespace kgned
