#include "kgned/tokenize.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
    return c < 0x80 && ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
                        (c >= 123 && c <= 126));
}

const char* const kReserved[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            out.emplace_back(1, ch);
        } else {
            current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
        }
    }
    flush();
    return out;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            in_word = false;
        } else if (is_punct(c)) {
            in_word = false;
            ++n;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

Vocab::Vocab() {
    for (TokenId i = 0; i < kReservedCount; ++i) {
        id_to_token_.emplace_back(kReserved[i]);
        token_to_id_.emplace(kReserved[i], i);
    }
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    Vocab v;
    v.id_to_token_.reserve(tokens.size() + kReservedCount);
    for (auto& t : tokens) {
        auto pieces = tokenize(t);
        if (pieces.size() != 1 || pieces.front() != t)
            throw InputError("'" + t + "' is not a single normalized token");
        const auto id = static_cast<TokenId>(v.id_to_token_.size());
        if (!v.token_to_id_.emplace(t, id).second) throw InputError("duplicate vocab token '" + t + "'");
        v.id_to_token_.push_back(std::move(t));
    }
    return v;
}

Vocab Vocab::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string(), 0, "cannot open vocab file");
    std::vector<std::string> tokens;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) throw ParseError(file.string(), number, "empty vocab entry");
        tokens.push_back(line);
    }
    try {
        return from_tokens(std::move(tokens));
    } catch (const InputError& e) {
        throw ParseError(file.string(), 0, e.what());
    }
}

void Vocab::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    for (std::size_t i = kReservedCount; i < id_to_token_.size(); ++i) out << id_to_token_[i] << '\n';
}

TokenId Vocab::id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        return id_to_token_[kUnkId];
    return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
    return token_to_id_.contains(std::string(token));
}

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_freq) {
    if (min_freq < 1) throw InputError("min_freq must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& line : corpus)
        for (auto& t : tokenize(line)) ++counts[std::move(t)];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [token, n] : counts)
        if (n >= min_freq) kept.emplace_back(token, n);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens;
    tokens.reserve(kept.size());
    for (auto& [token, n] : kept) tokens.push_back(std::move(token));
    return Vocab::from_tokens(std::move(tokens));
}

Vocab build_vocab(std::istream& corpus, std::size_t min_freq) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(corpus, line)) lines.push_back(line);
    return build_vocab(lines, min_freq);
}

std::vector<TokenId> encode(const Vocab& vocab, std::string_view text) {
    std::vector<TokenId> ids;
    for (const auto& t : tokenize(text)) ids.push_back(vocab.id(t));
    return ids;
}

std::string decode(const Vocab& vocab, std::span<const TokenId> ids) {
    std::string out;
    for (TokenId id : ids) {
        if (!out.empty()) out += ' ';
        out += vocab.token(id);
    }
    return out;
}

Mention Mention::from_span(std::string sentence, std::size_t begin, std::size_t end) {
    if (begin >= end || end > sentence.size())
        throw InputError("mention span [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") is empty or out of bounds");
    Mention m;
    m.surface = sentence.substr(begin, end - begin);
    m.sentence = std::move(sentence);
    m.begin = begin;
    m.end = end;
    return m;
}

Mention Mention::from_surface(std::string sentence, std::string surface) {
    const auto pos = sentence.find(surface);
    if (surface.empty() || pos == std::string::npos)
        throw InputError("surface '" + surface + "' does not occur in the sentence");
    Mention m;
    m.begin = pos;
    m.end = pos + surface.size();
    m.sentence = std::move(sentence);
    m.surface = std::move(surface);
    return m;
}

void Mention::validate() const {
    if (begin >= end || end > sentence.size())
        throw InputError("mention span [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") is empty or out of bounds");
    if (std::string_view(sentence).substr(begin, end - begin) != surface)
        throw InputError("span does not match surface '" + surface + "'");
}

}  // namespace kgned
