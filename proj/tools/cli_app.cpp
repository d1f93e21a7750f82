#include "cli_app.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgned/candidates.hpp"
#include "kgned/checkpoint.hpp"
#include "kgned/datasets.hpp"
#include "kgned/errors.hpp"
#include "kgned/eval.hpp"
#include "kgned/kg_store.hpp"
#include "kgned/sparql_client.hpp"
#include "kgned/synthetic.hpp"
#include "kgned/train.hpp"

namespace kgned::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Reads --config files as JSON when they start with '{', otherwise as
/// key=value lines with optional [subcommand] sections.
class ConfigReader : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream in(text);
            return CLI::ConfigTOML::from_config(in);
        }
        ordered_json doc;
        try {
            doc = ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
        }
        std::vector<CLI::ConfigItem> items;
        flatten(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const ordered_json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    }

    static void flatten(const ordered_json& node, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : node.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                flatten(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

std::string env_name(const std::string& subcommand, const std::string& option) {
    std::string name = std::string(kEnvPrefix) + subcommand + "_" + option;
    for (char& c : name) {
        if (c == '-') c = '_';
        else if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return name;
}

/// Registers an option and its environment fallback.
template <typename T>
CLI::Option* add(CLI::App* sub, const std::string& flag, T& target, const std::string& help) {
    auto* opt = sub->add_option("--" + flag, target, help);
    opt->envname(env_name(sub->get_name(), flag));
    return opt;
}

CLI::Option* add_flag(CLI::App* sub, const std::string& flag, bool& target, const std::string& help) {
    auto* opt = sub->add_flag("--" + flag, target, help);
    opt->envname(env_name(sub->get_name(), flag));
    return opt;
}

/// Every option of `sub` with its resolved value, in declaration order.
ordered_json echo_options(const CLI::App* sub) {
    ordered_json out = ordered_json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config") continue;
        if (opt->get_expected_min() == 0) {
            out[name] = opt->count() > 0 && opt->as<bool>();
        } else if (opt->count() > 0) {
            out[name] = opt->as<std::string>();
        } else {
            out[name] = opt->get_default_str();
        }
    }
    return out;
}

ordered_json to_json(const ModelConfig& m) {
    return {{"vocab_size", m.vocab_size}, {"d_model", m.d_model},     {"n_layers", m.n_layers},
            {"n_heads", m.n_heads},       {"ffn_dim", m.ffn_dim},     {"n_segments", m.n_segments},
            {"max_seq_len", m.max_seq_len}, {"dropout", m.dropout}};
}

ordered_json to_json(const TrainConfig& t) {
    return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size}, {"epochs", t.epochs},
            {"seed", t.seed}, {"clip_norm", t.clip_norm}};
}

ordered_json to_json(const ContextConfig& c) {
    return {{"hops", std::string(to_string(c.hops))}, {"max_triples", c.max_triples},
            {"max_seq_len", c.max_seq_len}, {"include_sentence", c.include_sentence}};
}

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InputError("cannot write " + file.string());
    out << text;
    if (!out) throw InputError("write failed: " + file.string());
}

std::vector<EntityId> read_entity_list(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw InputError("cannot open entity list " + file.string());
    std::vector<EntityId> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t");
        try {
            out.emplace_back(line.substr(b, e - b + 1));
        } catch (const InputError& err) {
            throw ParseError(file.string(), line_no, err.what());
        }
    }
    return out;
}

TripleStore require_store(const std::string& kg_dir) {
    if (kg_dir.empty()) throw InputError("--kg is required when KG context is used");
    if (!fs::is_directory(kg_dir)) throw InputError("KG directory not found: " + kg_dir);
    return load_store_dir(kg_dir);
}

/// key=value lines or a flat JSON object of model and training settings.
std::map<std::string, std::string> read_settings(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw InputError("cannot open " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::map<std::string, std::string> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(file.string(), 0, e.what());
        }
        for (const auto& [k, v] : doc.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(file.string(), line_no, "expected key=value");
        auto trim = [](std::string s) {
            const auto l = s.find_first_not_of(" \t\r");
            const auto r = s.find_last_not_of(" \t\r");
            return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_settings(const std::map<std::string, std::string>& settings, ModelConfig& model, TrainConfig& tc) {
    for (const auto& [key, value] : settings) {
        try {
            if (key == "d_model") model.d_model = std::stoul(value);
            else if (key == "n_layers") model.n_layers = std::stoul(value);
            else if (key == "n_heads") model.n_heads = std::stoul(value);
            else if (key == "ffn_dim") model.ffn_dim = std::stoul(value);
            else if (key == "dropout") model.dropout = std::stod(value);
            else if (key == "learning_rate" || key == "lr") tc.learning_rate = std::stod(value);
            else if (key == "batch_size") tc.batch_size = std::stoul(value);
            else if (key == "epochs") tc.epochs = std::stoul(value);
            else if (key == "clip_norm") tc.clip_norm = std::stod(value);
            else throw InputError("unknown model setting '" + key + "'");
        } catch (const std::logic_error&) {
            throw InputError("bad value for " + key + ": '" + value + "'");
        }
    }
}

std::string history_text(const std::vector<EpochStats>& history) {
    std::string out = "epoch\tloss\taccuracy\ttrain_loss\n";
    for (const auto& s : history) {
        out += std::to_string(s.epoch) + "\t" + fmt("%.17g", s.loss) + "\t" + fmt("%.17g", s.accuracy) + "\t" +
               fmt("%.17g", s.train_loss) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------- fetch

struct FetchArgs {
    std::string endpoint = "https://query.wikidata.org/sparql";
    std::string entities;
    std::string hops = "1";
    std::size_t cap = 15;
    std::string out;
    std::size_t parallelism = 4;
    std::size_t retries = 2;
    int timeout = 30;
    bool post = false;
};

int cmd_fetch(const FetchArgs& a, std::ostream& out, std::ostream& err) {
    const auto entities = read_entity_list(a.entities);
    if (entities.empty()) {
        out << "no entities to fetch\n";
        return kOk;
    }
    SparqlEndpoint endpoint;
    endpoint.url = a.endpoint;
    endpoint.use_post = a.post;
    endpoint.timeout = std::chrono::seconds(a.timeout);
    TripleCache cache(a.out);
    FetchManyOptions options;
    options.hops = parse_hops(a.hops);
    options.cap = a.cap;
    options.parallelism = a.parallelism;
    options.retries = a.retries;
    const auto outcomes = fetch_many(endpoint, entities, cache, options);

    std::size_t fetched = 0, skipped = 0, failed = 0;
    for (const auto& o : outcomes) {
        if (o.skipped) {
            ++skipped;
        } else if (o.error) {
            ++failed;
            err << "error " << o.entity.str() << ": " << *o.error << "\n";
        } else {
            ++fetched;
            out << "fetched " << o.entity.str() << " (" << o.triple_count << " triples)\n";
        }
    }
    out << "fetched " << fetched << ", cached " << skipped << ", failed " << failed << "\n";
    return failed > 0 && fetched == 0 && skipped == 0 ? kRuntimeAbort : kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string kg;
    std::string vocab;
    std::string save_vocab;
    std::size_t min_freq = 1;
    std::string ctx_hops = "1";
    std::size_t max_triples = 15;
    std::size_t max_seq_len = 512;
    bool no_sentence = false;
    std::string model_cfg;
    std::uint64_t seed = 13;
    double lr = 1e-3;
    std::size_t batch_size = 16;
    std::size_t epochs = 10;
    bool candidates_as_negatives = false;
    std::string out;
    std::string history;
    std::string report;
};

int cmd_train(const TrainArgs& a, const CLI::App* sub, std::ostream& out) {
    ContextConfig ctx;
    ctx.hops = parse_hops(a.ctx_hops);
    ctx.max_triples = a.max_triples;
    ctx.max_seq_len = a.max_seq_len;
    ctx.include_sentence = !a.no_sentence;
    ctx.validate();

    const auto examples = load_jsonl(a.data);
    std::optional<TripleStore> store;
    if (ctx.max_triples > 0 || !a.kg.empty()) store = require_store(a.kg);

    const Vocab vocab = !a.vocab.empty()
                            ? Vocab::load(a.vocab)
                            : build_vocab(corpus_text(examples, store ? *store : TripleStore{}, ctx.hops),
                                          a.min_freq);
    if (!a.save_vocab.empty()) vocab.save(a.save_vocab);

    ModelConfig mc;
    TrainConfig tc;
    if (!a.model_cfg.empty()) apply_settings(read_settings(a.model_cfg), mc, tc);
    if (sub->get_option("--lr")->count() > 0) tc.learning_rate = a.lr;
    if (sub->get_option("--batch-size")->count() > 0) tc.batch_size = a.batch_size;
    if (sub->get_option("--epochs")->count() > 0) tc.epochs = a.epochs;
    tc.seed = a.seed;
    mc.vocab_size = vocab.size();
    mc.n_segments = ctx.segment_count();
    mc.max_seq_len = ctx.max_seq_len;
    mc.validate();
    tc.validate();

    const ContextPipeline pipeline(store ? &*store : nullptr, vocab, ctx);
    const auto pairs = to_pairs(examples, a.candidates_as_negatives);
    if (pairs.empty()) throw InputError("no training pairs in " + a.data);
    const auto data = prepare_all(pairs, examples, pipeline);

    Classifier model(mc);
    model.init(tc.seed);
    const auto history = train(model, data, tc, [&](const EpochStats& s) {
        out << "epoch " << s.epoch << " loss " << fmt("%.6f", s.loss) << " acc " << fmt("%.4f", s.accuracy)
            << "\n";
    });

    save_checkpoint(a.out, model, vocab, ctx);
    const std::string history_file = a.history.empty() ? a.out + ".history.tsv" : a.history;
    write_text(history_file, history_text(history));
    out << "wrote " << a.out << " and " << history_file << "\n";

    if (!a.report.empty()) {
        RunReport report;
        report.command = "train";
        report.seed = tc.seed;
        report.config = {{"options", echo_options(sub)},
                         {"context", to_json(ctx)},
                         {"model", to_json(mc)},
                         {"train", to_json(tc)},
                         {"pairs", pairs.size()}};
        for (const auto& s : history) report.loss_history.push_back(s.loss);
        write_text(a.report, report.to_json().dump(2) + "\n");
    }
    return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string data;
    std::string checkpoint;
    std::string kg;
    std::string protocol = "both";
    bool candidates_as_negatives = false;
    std::string report;
    std::string predictions;
};

int cmd_eval(const EvalArgs& a, const CLI::App* sub, std::ostream& out) {
    const bool do_pairs = a.protocol == "pairs" || a.protocol == "both";
    const bool do_argmax = a.protocol == "argmax" || a.protocol == "both";

    Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const auto examples = load_jsonl(a.data);
    std::optional<TripleStore> store;
    if (ckpt.context.max_triples > 0 || !a.kg.empty()) store = require_store(a.kg);
    const ContextPipeline pipeline(store ? &*store : nullptr, ckpt.vocab, ckpt.context);

    RunReport report;
    report.command = "eval";
    report.protocol = a.protocol;
    report.config = {{"options", echo_options(sub)},
                     {"context", to_json(ckpt.context)},
                     {"model", to_json(ckpt.model.config())}};

    if (do_pairs) {
        ConfusionCounts counts;
        for (const auto& pair : to_pairs(examples, a.candidates_as_negatives)) {
            const auto labeled = prepare(pair, examples, pipeline);
            counts.add(ckpt.model.forward(labeled.input) >= 0.5 ? 1 : 0, labeled.label);
        }
        report.pairs = counts;
    }

    if (do_argmax) {
        MentionPredictions predicted, gold;
        std::vector<PredictionRecord> records;
        const auto builder = pipeline.builder();
        for (const auto& ex : examples) {
            gold[ex.id] = ex.gold;
            if (ex.gold_missing()) ++report.gold_missing;
            PredictionRecord rec{ex.id, std::nullopt, 0.0};
            if (ex.candidates.empty()) {
                ++report.no_candidates;
            } else {
                const auto p = predict(ckpt.model, ex.mention, {ex.id, ex.candidates, CandidateSource::Precomputed},
                                       builder);
                rec.predicted = p.chosen;
                rec.score = p.ranked.front().second;
            }
            predicted[ex.id] = rec.predicted;
            records.push_back(std::move(rec));
        }
        report.argmax = inkb_accuracy(predicted, gold);
        if (!a.predictions.empty()) {
            std::ostringstream buf;
            write_predictions(buf, records);
            write_text(a.predictions, buf.str());
        }
    }

    out << report.to_text();
    if (!a.report.empty()) write_text(a.report, report.to_json().dump(2) + "\n");
    return kOk;
}

// ---------------------------------------------------------------- diff

struct DiffArgs {
    std::string before;
    std::string after;
    std::string gold;
    std::string report;
};

int cmd_diff(const DiffArgs& a, const CLI::App* sub, std::ostream& out) {
    const auto before = to_mention_predictions(load_predictions(a.before));
    const auto after = to_mention_predictions(load_predictions(a.after));
    MentionPredictions gold;
    for (const auto& ex : load_jsonl(a.gold)) gold[ex.id] = ex.gold;

    RunReport report;
    report.command = "diff";
    report.config = {{"options", echo_options(sub)}};
    report.flips = flip_analysis(before, after, gold);
    out << report.to_text();
    if (!a.report.empty()) write_text(a.report, report.to_json().dump(2) + "\n");
    return kOk;
}

// ---------------------------------------------------------------- disambiguate

struct DisambiguateArgs {
    std::string sentence;
    std::string surface;
    std::string kg;
    std::string checkpoint;
    bool contains = false;
};

int cmd_disambiguate(const DisambiguateArgs& a, std::ostream& out) {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const TripleStore store = require_store(a.kg);
    const Mention mention = Mention::from_surface(a.sentence, a.surface);
    const auto candidates =
        build_index(store).lookup(a.surface, a.contains ? MatchMode::Contains : MatchMode::Exact);
    if (candidates.entities.empty()) {
        out << "no candidates\n";
        return kOk;
    }
    const ContextPipeline pipeline(&store, ckpt.vocab, ckpt.context);
    const auto prediction = predict(ckpt.model, mention, candidates, pipeline.builder());
    std::size_t rank = 0;
    for (const auto& [entity, prob] : prediction.ranked) {
        out << ++rank << "\t" << entity.str() << "\t" << fmt("%.4f", prob) << "\t"
            << store.primary_label(entity.str());
        for (const auto& rec : store.labels(entity.str()))
            if (rec.kind == LabelKind::Description) out << "\t" << rec.text;
        out << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- synth / build-vocab

struct SynthArgs {
    std::string out;
    SyntheticOptions options;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto corpus = make_synthetic_corpus(a.options);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_store(corpus.store, dir / kTriplesFileName, dir / kLabelsFileName);
    save_jsonl(dir / "train.jsonl", corpus.train);
    save_jsonl(dir / "test.jsonl", corpus.test);
    out << corpus.group_count << " labels, " << corpus.entity_count << " entities, " << corpus.train.size()
        << " train / " << corpus.test.size() << " test mentions in " << a.out << "\n";
    return kOk;
}

struct VocabArgs {
    std::vector<std::string> data;
    std::string kg;
    std::string hops = "1";
    std::size_t min_freq = 1;
    std::string out;
};

int cmd_build_vocab(const VocabArgs& a, std::ostream& out) {
    std::vector<MentionExample> examples;
    for (const auto& file : a.data) {
        auto part = load_jsonl(file);
        examples.insert(examples.end(), part.begin(), part.end());
    }
    const TripleStore store = a.kg.empty() ? TripleStore{} : require_store(a.kg);
    const Vocab vocab = build_vocab(corpus_text(examples, store, parse_hops(a.hops)), a.min_freq);
    vocab.save(a.out);
    out << vocab.size() << " tokens written to " << a.out << "\n";
    return kOk;
}

struct ConvertArgs {
    std::string input;
    std::string adapter;
    std::string alignment;
    std::string out;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
    const AdapterConfig cfg = a.adapter.empty() ? AdapterConfig{} : AdapterConfig::load(a.adapter);
    std::optional<WikidataAlignment> alignment;
    if (!a.alignment.empty()) alignment = wikidata_alignment(a.alignment);
    if (cfg.values_are_titles && !alignment) throw InputError("the adapter maps titles: pass --alignment");
    std::ifstream in(a.input);
    if (!in) throw ParseError(a.input, 0, "cannot open");
    const auto examples = adapt_jsonl(in, a.input, cfg, alignment ? &*alignment : nullptr);
    save_jsonl(a.out, examples);
    std::size_t out_of_kb = 0, gold_missing = 0;
    for (const auto& ex : examples) {
        out_of_kb += ex.gold ? 0 : 1;
        gold_missing += ex.gold_missing() ? 1 : 0;
    }
    out << examples.size() << " examples written to " << a.out << " (" << out_of_kb << " without gold, "
        << gold_missing << " with gold missing from candidates)\n";
    return kOk;
}

const CLI::Validator kHopsValidator = CLI::IsMember({"1", "12", "1&2", "1+2"});

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-graph context for named entity disambiguation", "kgned"};
    app.config_formatter(std::make_shared<ConfigReader>());
    app.set_config("--config", "", "key=value or JSON file with option defaults");
    app.require_subcommand(1);

    FetchArgs fa;
    auto* fetch = app.add_subcommand("fetch", "Fetch 1- or 2-hop triples for entities into a KG directory");
    add(fetch, "endpoint", fa.endpoint, "SPARQL endpoint URL")->capture_default_str();
    add(fetch, "entities", fa.entities, "File with one entity id per line")->required();
    add(fetch, "hops", fa.hops, "1 or 12")->check(kHopsValidator)->capture_default_str();
    add(fetch, "cap", fa.cap, "Max triples per entity and hop")->capture_default_str();
    add(fetch, "out", fa.out, "KG directory (cache)")->required();
    add(fetch, "parallel", fa.parallelism, "Concurrent requests")->capture_default_str();
    add(fetch, "retries", fa.retries, "Retries after a transport error")->capture_default_str();
    add(fetch, "timeout", fa.timeout, "Request timeout in seconds")->capture_default_str();
    add_flag(fetch, "post", fa.post, "Send queries with POST");

    TrainArgs ta;
    auto* trn = app.add_subcommand("train", "Train a classifier and write a checkpoint plus loss history");
    add(trn, "data", ta.data, "Training JSONL")->required();
    add(trn, "kg", ta.kg, "KG directory");
    add(trn, "vocab", ta.vocab, "Vocabulary file (built from the data when omitted)");
    add(trn, "save-vocab", ta.save_vocab, "Write the vocabulary used");
    add(trn, "min-freq", ta.min_freq, "Minimum token count when building the vocabulary")->capture_default_str();
    add(trn, "ctx-hops", ta.ctx_hops, "1 or 12")->check(kHopsValidator)->capture_default_str();
    add(trn, "max-triples", ta.max_triples, "Context triples per candidate (0: no context)")->capture_default_str();
    add(trn, "max-seq-len", ta.max_seq_len, "Input length in tokens")->capture_default_str();
    add_flag(trn, "no-sentence", ta.no_sentence, "Leave the sentence out of the input");
    add(trn, "model-cfg", ta.model_cfg, "key=value or JSON file with model/training settings");
    add(trn, "seed", ta.seed, "Seed for init, shuffling and dropout")->capture_default_str();
    add(trn, "lr", ta.lr, "Learning rate")->capture_default_str();
    add(trn, "batch-size", ta.batch_size, "Mini-batch size")->capture_default_str();
    add(trn, "epochs", ta.epochs, "Epochs")->capture_default_str();
    add_flag(trn, "candidates-as-negatives", ta.candidates_as_negatives,
             "Use non-gold candidates as negative pairs");
    add(trn, "out", ta.out, "Checkpoint file")->required();
    add(trn, "history", ta.history, "Loss history TSV (default: <out>.history.tsv)");
    add(trn, "report", ta.report, "Training report JSON");

    EvalArgs ea;
    auto* evl = app.add_subcommand("eval", "Score a dataset with a checkpoint");
    add(evl, "data", ea.data, "Evaluation JSONL")->required();
    add(evl, "checkpoint", ea.checkpoint, "Checkpoint file")->required();
    add(evl, "kg", ea.kg, "KG directory");
    add(evl, "protocol", ea.protocol, "pairs, argmax or both")
        ->check(CLI::IsMember({"pairs", "argmax", "both"}))
        ->capture_default_str();
    add_flag(evl, "candidates-as-negatives", ea.candidates_as_negatives,
             "Use non-gold candidates as negative pairs");
    add(evl, "report", ea.report, "Report JSON");
    add(evl, "predictions", ea.predictions, "Per-mention predictions JSONL");

    DiffArgs da;
    auto* dif = app.add_subcommand("diff", "Flip analysis between two prediction files");
    add(dif, "before", da.before, "Predictions of the baseline")->required();
    add(dif, "after", da.after, "Predictions of the compared system")->required();
    add(dif, "gold", da.gold, "Dataset JSONL with gold entities")->required();
    add(dif, "report", da.report, "Report JSON");

    DisambiguateArgs ga;
    auto* dis = app.add_subcommand("disambiguate", "Rank KG candidates for one mention");
    add(dis, "sentence", ga.sentence, "Sentence text")->required();
    add(dis, "surface", ga.surface, "Surface form occurring in the sentence")->required();
    add(dis, "kg", ga.kg, "KG directory")->required();
    add(dis, "checkpoint", ga.checkpoint, "Checkpoint file")->required();
    add_flag(dis, "contains", ga.contains, "Match labels containing the surface form");

    SynthArgs sa;
    auto* syn = app.add_subcommand("synth", "Write the synthetic ambiguous-label corpus");
    add(syn, "out", sa.out, "Output directory")->required();
    add(syn, "labels", sa.options.n_labels, "Ambiguous labels")->capture_default_str();
    add(syn, "train", sa.options.train_mentions, "Training mentions")->capture_default_str();
    add(syn, "test", sa.options.test_mentions, "Test mentions")->capture_default_str();
    add(syn, "hop2-distractors", sa.options.hop2_distractors, "Distractor 2-hop triples per entity")
        ->capture_default_str();
    add(syn, "seed", sa.options.seed, "Generator seed")->capture_default_str();

    VocabArgs va;
    auto* voc = app.add_subcommand("build-vocab", "Build a vocabulary from datasets and their KG context");
    add(voc, "data", va.data, "Dataset JSONL files")->required();
    add(voc, "kg", va.kg, "KG directory");
    add(voc, "hops", va.hops, "1 or 12")->check(kHopsValidator)->capture_default_str();
    add(voc, "min-freq", va.min_freq, "Minimum token count")->capture_default_str();
    add(voc, "out", va.out, "Vocabulary file")->required();

    ConvertArgs ca;
    auto* cnv = app.add_subcommand("convert", "Convert a third-party JSONL dataset to the canonical format");
    add(cnv, "input", ca.input, "Source JSONL")->required();
    add(cnv, "adapter", ca.adapter, "JSON field mapping (default: canonical names)");
    add(cnv, "alignment", ca.alignment, "Wikipedia title to Wikidata id TSV");
    add(cnv, "out", ca.out, "Canonical JSONL")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "kgned: " << e.what() << "\n";
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << "run 'kgned " << sub->get_name() << " --help' for usage\n";
        return kUsage;
    }

    try {
        if (fetch->parsed()) return cmd_fetch(fa, out, err);
        if (trn->parsed()) return cmd_train(ta, trn, out);
        if (evl->parsed()) return cmd_eval(ea, evl, out);
        if (dif->parsed()) return cmd_diff(da, dif, out);
        if (dis->parsed()) return cmd_disambiguate(ga, out);
        if (syn->parsed()) return cmd_synth(sa, out);
        if (voc->parsed()) return cmd_build_vocab(va, out);
        if (cnv->parsed()) return cmd_convert(ca, out);
    } catch (const TrainingAborted& e) {
        err << "kgned: training aborted: " << e.what() << "\n";
        return kRuntimeAbort;
    } catch (const FetchError& e) {
        err << "kgned: " << e.what() << "\n";
        return kRuntimeAbort;
    } catch (const EndpointError& e) {
        err << "kgned: " << e.what() << "\n";
        return kRuntimeAbort;
    } catch (const Error& e) {
        err << "kgned: " << e.what() << "\n";
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        err << "kgned: " << e.what() << "\n";
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        err << "kgned: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "kgned: " << e.what() << "\n";
        return kRuntimeAbort;
    }
    return kUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace kgned::cli
