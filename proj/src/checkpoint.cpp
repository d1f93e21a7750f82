#include "kgned/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kgned/errors.hpp"

namespace kgned {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'K', 'G', 'N', 'E', 'D', 'C', 'K', '\0'};
constexpr char kEndMarker[8] = {'K', 'G', 'N', 'E', 'D', 'E', 'N', 'D'};

class Writer {
public:
    template <class T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const char*>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_bytes(const char* data, std::size_t n) { bytes.insert(bytes.end(), data, data + n); }
    void put_string(const std::string& s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        put_bytes(s.data(), s.size());
    }

    std::vector<char> bytes;
};

class Reader {
public:
    explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

    template <class T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)), sizeof(T));
        return value;
    }
    std::string get_string() {
        const auto n = get<std::uint32_t>();
        const char* p = take(n);
        return std::string(p, n);
    }
    const char* take(std::size_t n) {
        if (data_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    std::vector<char> data_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Classifier& model, const Vocab& vocab,
                     const ContextConfig& context) {
    const auto& cfg = model.config();
    if (cfg.vocab_size != vocab.size())
        throw InputError("model vocab_size " + std::to_string(cfg.vocab_size) + " != vocab size " +
                         std::to_string(vocab.size()));
    Writer w;
    w.put_bytes(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kCheckpointVersion);

    for (std::size_t v : {cfg.vocab_size, cfg.d_model, cfg.n_layers, cfg.n_heads, cfg.ffn_dim,
                          cfg.n_segments, cfg.max_seq_len})
        w.put<std::uint64_t>(v);
    w.put<double>(cfg.dropout);

    w.put<std::uint8_t>(context.hops == Hops::One ? 1 : 12);
    w.put<std::uint64_t>(context.max_triples);
    w.put<std::uint64_t>(context.max_seq_len);
    w.put<std::uint8_t>(context.include_sentence ? 1 : 0);

    w.put<std::uint64_t>(vocab.size() - kReservedCount);
    for (std::size_t i = kReservedCount; i < vocab.size(); ++i)
        w.put_string(vocab.tokens()[i]);

    const auto params = model.params();
    w.put<std::uint64_t>(params.size());
    w.put_bytes(reinterpret_cast<const char*>(params.data()), params.size() * sizeof(double));
    w.put_bytes(kEndMarker, sizeof kEndMarker);

    const auto tmp = std::filesystem::path(file.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

Checkpoint load_checkpoint(const std::filesystem::path& file, const Vocab* expected_vocab) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + file.string());
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

    if (std::memcmp(r.take(sizeof kMagic), kMagic, sizeof kMagic) != 0)
        throw CheckpointError(file.string() + " is not a kgned checkpoint");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");

    ModelConfig cfg;
    cfg.vocab_size = r.get<std::uint64_t>();
    cfg.d_model = r.get<std::uint64_t>();
    cfg.n_layers = r.get<std::uint64_t>();
    cfg.n_heads = r.get<std::uint64_t>();
    cfg.ffn_dim = r.get<std::uint64_t>();
    cfg.n_segments = r.get<std::uint64_t>();
    cfg.max_seq_len = r.get<std::uint64_t>();
    cfg.dropout = r.get<double>();

    ContextConfig context;
    const auto hops = r.get<std::uint8_t>();
    if (hops != 1 && hops != 12) throw CheckpointError("corrupt hops field in checkpoint");
    context.hops = hops == 1 ? Hops::One : Hops::OneAndTwo;
    context.max_triples = r.get<std::uint64_t>();
    context.max_seq_len = r.get<std::uint64_t>();
    context.include_sentence = r.get<std::uint8_t>() != 0;

    const auto n_tokens = r.get<std::uint64_t>();
    if (n_tokens + kReservedCount != cfg.vocab_size)
        throw CheckpointError("checkpoint vocab does not match its model config");
    if (expected_vocab && expected_vocab->size() != cfg.vocab_size)
        throw CheckpointError("checkpoint vocab size " + std::to_string(cfg.vocab_size) +
                              " differs from the supplied vocab (" +
                              std::to_string(expected_vocab->size()) + ")");
    std::vector<std::string> tokens;
    tokens.reserve(n_tokens);
    for (std::uint64_t i = 0; i < n_tokens; ++i) tokens.push_back(r.get_string());

    try {
        Classifier model(cfg);
        const auto n_params = r.get<std::uint64_t>();
        if (n_params != model.params().size())
            throw CheckpointError("checkpoint parameter count does not match its config");
        std::memcpy(model.params().data(), r.take(n_params * sizeof(double)), n_params * sizeof(double));
        if (std::memcmp(r.take(sizeof kEndMarker), kEndMarker, sizeof kEndMarker) != 0 || !r.at_end())
            throw CheckpointError("checkpoint has a corrupt trailer");
        return Checkpoint{std::move(model), Vocab::from_tokens(std::move(tokens)), context};
    } catch (const InputError& e) {
        throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
    }
}

}  // namespace kgned
