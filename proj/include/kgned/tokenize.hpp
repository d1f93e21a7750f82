#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgned {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr TokenId kReservedCount = 4;

/// Lowercases ASCII, splits on whitespace, and emits every ASCII punctuation
/// character as its own token. Bytes >= 0x80 are kept inside words, so UTF-8
/// text passes through untouched.
std::vector<std::string> tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

class Vocab {
public:
    /// Reserved tokens only.
    Vocab();

    /// `tokens` are the non-reserved entries in id order (id = index + 4).
    /// Throws InputError on duplicates or tokens that the tokenizer could not produce.
    static Vocab from_tokens(std::vector<std::string> tokens);

    static Vocab load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    TokenId id(std::string_view token) const;
    const std::string& token(TokenId id) const;
    bool contains(std::string_view token) const;

    std::size_t size() const noexcept { return id_to_token_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.id_to_token_ == b.id_to_token_; }

private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
};

/// Tokens with frequency >= min_freq, ordered by descending frequency, ties
/// broken lexicographically.
Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_freq);
/// Same, reading the corpus one line at a time.
Vocab build_vocab(std::istream& corpus, std::size_t min_freq);

/// Out-of-vocabulary tokens map to kUnkId.
std::vector<TokenId> encode(const Vocab& vocab, std::string_view text);
std::string decode(const Vocab& vocab, std::span<const TokenId> ids);

/// A surface form inside a sentence. Offsets are UTF-8 byte offsets,
/// `end` exclusive.
struct Mention {
    std::string sentence;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string surface;

    /// Builds a mention from a span, taking the surface from the sentence.
    static Mention from_span(std::string sentence, std::size_t begin, std::size_t end);
    /// Builds a mention from the first occurrence of `surface`.
    static Mention from_surface(std::string sentence, std::string surface);

    /// Throws InputError unless the span is non-empty, in bounds, and matches `surface`.
    void validate() const;
};

/// Classifier input: token ids, per-token segment ids and attention mask, all
/// padded to max_seq_len. `length` counts the unpadded prefix.
struct AssembledInput {
    std::vector<TokenId> token_ids;
    std::vector<std::int32_t> segment_ids;
    std::vector<std::uint8_t> mask;
    std::size_t length = 0;

    friend bool operator==(const AssembledInput&, const AssembledInput&) = default;
};

}  // namespace kgned
