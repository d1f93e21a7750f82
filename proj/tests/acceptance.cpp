// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli_app.hpp"
#include "helpers.hpp"
#include "kgned/candidates.hpp"
#include "kgned/datasets.hpp"
#include "kgned/eval.hpp"
#include "kgned/synthetic.hpp"
#include "kgned/train.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace kgned;

namespace {

// Tolerances and thresholds.
constexpr double kMinContextAccuracy = 0.95;
constexpr double kMaxBaselineAccuracy = 0.65;
constexpr double kMinFlipRatio = 5.0;
constexpr double kMaxReproductionSeconds = 600.0;
constexpr double kMaxTwoHopGain = 0.01;
constexpr double kF1Tolerance = 0.01;
constexpr double kMaxGradError = 1e-3;
constexpr std::size_t kGradProbes = 150;
constexpr double kMaxGradSeconds = 30.0;
constexpr std::size_t kFuzzCases = 1000;
constexpr std::size_t kIndexEntities = 10000;
constexpr std::size_t kIndexQueries = 1000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool report(int id, bool pass, const std::string& detail) {
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
    return pass;
}

ModelConfig desk_model(const Vocab& vocab, const ContextConfig& ctx) {
    ModelConfig mc;
    mc.vocab_size = vocab.size();
    mc.d_model = 32;
    mc.n_layers = 2;
    mc.n_heads = 2;
    mc.ffn_dim = 64;
    mc.n_segments = ctx.segment_count();
    mc.max_seq_len = ctx.max_seq_len;
    mc.dropout = 0.0;
    return mc;
}

TrainConfig desk_training() {
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 16;
    tc.epochs = 30;
    tc.seed = 13;
    return tc;
}

struct RunOutcome {
    MentionPredictions predicted;
    InKbAccuracy accuracy;
};

/// Trains on corpus.train and scores corpus.test by mention-level argmax.
RunOutcome train_and_score(const SyntheticCorpus& corpus, const Vocab& vocab, const ContextConfig& ctx) {
    const ContextPipeline pipeline(&corpus.store, vocab, ctx);
    const auto pairs = to_pairs(corpus.train);
    const auto data = prepare_all(pairs, corpus.train, pipeline);
    const TrainConfig tc = desk_training();
    Classifier model(desk_model(vocab, ctx));
    model.init(tc.seed);
    train(model, data, tc);

    RunOutcome out;
    MentionPredictions gold;
    const auto builder = pipeline.builder();
    for (const auto& ex : corpus.test) {
        gold[ex.id] = ex.gold;
        out.predicted[ex.id] =
            predict(model, ex.mention, {ex.id, ex.candidates, CandidateSource::Precomputed}, builder).chosen;
    }
    out.accuracy = inkb_accuracy(out.predicted, gold);
    return out;
}

ContextConfig context(Hops hops, std::size_t max_triples) {
    ContextConfig c;
    c.hops = hops;
    c.max_triples = max_triples;
    c.max_seq_len = 64;
    return c;
}

bool context_utility() {
    const auto t0 = Clock::now();
    const auto corpus = make_synthetic_corpus(SyntheticOptions{});
    const auto vocab = build_vocab(corpus_text(corpus.train, corpus.store, Hops::One), 1);
    const auto without = train_and_score(corpus, vocab, context(Hops::One, 0));
    const auto with = train_and_score(corpus, vocab, context(Hops::One, 15));
    MentionPredictions gold;
    for (const auto& ex : corpus.test) gold[ex.id] = ex.gold;
    const auto flips = flip_analysis(without.predicted, with.predicted, gold);
    const double secs = seconds_since(t0);

    const std::size_t up = flips.wrong_to_right.size(), down = flips.right_to_wrong.size();
    const bool pass = with.accuracy.accuracy >= kMinContextAccuracy &&
                      without.accuracy.accuracy <= kMaxBaselineAccuracy && up > 0 &&
                      static_cast<double>(up) >= kMinFlipRatio * static_cast<double>(down) &&
                      secs <= kMaxReproductionSeconds;
    return report(1, pass,
                  "labels=" + std::to_string(corpus.group_count) + " test mentions=" +
                      std::to_string(corpus.test.size()) + " with-context=" + fixed(with.accuracy.accuracy) +
                      " (>= " + fixed(kMinContextAccuracy, 2) + ") without=" + fixed(without.accuracy.accuracy) +
                      " (<= " + fixed(kMaxBaselineAccuracy, 2) + ") flips up=" + std::to_string(up) +
                      " down=" + std::to_string(down) + " (up >= " + fixed(kMinFlipRatio, 0) +
                      "x down) time=" + fixed(secs, 1) + "s (<= " + fixed(kMaxReproductionSeconds, 0) + "s)");
}

bool two_hop_direction() {
    SyntheticOptions o;
    o.hop2_distractors = 3;
    const auto corpus = make_synthetic_corpus(o);
    const auto vocab = build_vocab(corpus_text(corpus.train, corpus.store, Hops::OneAndTwo), 1);
    const auto one = train_and_score(corpus, vocab, context(Hops::One, 15));
    const auto both = train_and_score(corpus, vocab, context(Hops::OneAndTwo, 15));
    const double gain = both.accuracy.accuracy - one.accuracy.accuracy;
    return report(2, gain <= kMaxTwoHopGain,
                  "hops=1 accuracy=" + fixed(one.accuracy.accuracy) + " hops=1&2 accuracy=" +
                      fixed(both.accuracy.accuracy) + " gain=" + fixed(gain) + " (<= " + fixed(kMaxTwoHopGain, 2) +
                      ")");
}

bool metric_oracle() {
    const double a = f1_score(91.48, 93.23), b = f1_score(96.39, 89.11);
    const bool pass = std::abs(a - 92.35) <= kF1Tolerance && std::abs(b - 92.61) <= kF1Tolerance;
    return report(3, pass,
                  "F1(91.48, 93.23)=" + fixed(a, 4) + " vs 92.35, F1(96.39, 89.11)=" + fixed(b, 4) +
                      " vs 92.61 (tolerance " + fixed(kF1Tolerance, 2) + ")");
}

bool gradient_check() {
    ModelConfig c;
    c.vocab_size = 20;
    c.d_model = 16;
    c.n_layers = 1;
    c.n_heads = 2;
    c.ffn_dim = 32;
    c.n_segments = 5;
    c.max_seq_len = 12;
    c.dropout = 0.0;
    GradCheckOptions o;
    o.n_probes = kGradProbes;
    const auto t0 = Clock::now();
    const auto r = grad_check(c, o);
    const double secs = seconds_since(t0);
    const bool pass = r.probes >= 100 && r.max_relative_error < kMaxGradError && secs < kMaxGradSeconds;
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", r.max_relative_error);
    return report(4, pass,
                  "probes=" + std::to_string(r.probes) + " max relative error=" + err + " (< 1e-3, worst " +
                      r.worst_param + ") time=" + fixed(secs, 2) + "s (< " + fixed(kMaxGradSeconds, 0) + "s)");
}

bool structural_fuzz() {
    struct Check {
        const char* name;
        std::function<testing::PropertyResult()> run;
    };
    const std::vector<Check> checks = {
        {"prefix", [] { return testing::check_prefix_property(1001, kFuzzCases); }},
        {"length", [] { return testing::check_length_property(1002, kFuzzCases); }},
        {"separators", [] { return testing::check_separator_property(1003, kFuzzCases); }},
        {"segments", [] { return testing::check_segment_property(1004, kFuzzCases); }},
        {"padding", [] { return testing::check_padding_invariance(1005, kFuzzCases); }},
    };
    bool pass = true;
    std::string detail;
    for (const auto& c : checks) {
        const auto r = c.run();
        pass = pass && r.ok() && r.cases == kFuzzCases;
        detail += std::string(c.name) + "=" + std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases) + " ";
        if (!r.ok()) detail += "[" + r.first_failure + "] ";
    }
    return report(5, pass, detail);
}

bool lookup_oracle() {
    const auto store = testing::label_fixture(kIndexEntities, 6001);
    const auto index = build_index(store);
    std::size_t mismatches = 0, queries = 0;
    for (const auto& q : testing::label_queries(store, kIndexQueries, 6002)) {
        ++queries;
        for (const auto mode : {MatchMode::Exact, MatchMode::Contains})
            if (index.lookup(q, mode).entities != testing::brute_force_lookup(store, q, mode)) ++mismatches;
    }
    return report(6, mismatches == 0 && queries == kIndexQueries,
                  "entities=" + std::to_string(store.subjects().size()) + " queries=" + std::to_string(queries) +
                      " (exact and contains) mismatches=" + std::to_string(mismatches));
}

bool cli_ok(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << "kgned " << args.front() << " failed: " << err.str();
    return code == 0;
}

bool determinism() {
    testing::TempDir dir;
    const auto syn = (dir / "syn").string();
    testing::write_file(dir / "model.cfg", "d_model=16\nn_layers=1\nn_heads=2\nffn_dim=32\ndropout=0.1\n");
    bool ran = cli_ok({"synth", "--out", syn, "--labels", "20", "--train", "100", "--test", "50", "--seed", "7"});
    std::vector<std::string> files;
    const auto ckpt = (dir / "model.ckpt").string();
    for (int run = 0; run < 2; ++run) {
        ran = ran && cli_ok({"train", "--data", syn + "/train.jsonl", "--kg", syn, "--max-seq-len", "64",
                             "--model-cfg", (dir / "model.cfg").string(), "--epochs", "5", "--seed", "21", "--out",
                             ckpt, "--history", (dir / "history.tsv").string(), "--report",
                             (dir / "train.json").string()});
        ran = ran && cli_ok({"eval", "--data", syn + "/test.jsonl", "--checkpoint", ckpt, "--kg", syn, "--report",
                             (dir / "eval.json").string(), "--predictions", (dir / "pred.jsonl").string()});
        // the config echo names every path, so both runs write to the same files
        std::string bundle;
        for (const char* f : {"history.tsv", "train.json", "eval.json", "pred.jsonl"})
            bundle += ran ? testing::read_file(dir / f) : std::string();
        bundle += ran ? testing::read_file(ckpt) : std::string();
        files.push_back(std::move(bundle));
    }
    const bool identical = ran && files[0] == files[1] && !files[0].empty();
    return report(7, identical,
                  std::string("two seeded train+eval runs: history, reports, predictions and checkpoint ") +
                      (identical ? "byte-identical" : "differ") + " (" + std::to_string(files[0].size()) +
                      " bytes compared)");
}

}  // namespace

int main() {
    bool all = true;
    all &= context_utility();
    all &= two_hop_direction();
    all &= metric_oracle();
    all &= gradient_check();
    all &= structural_fuzz();
    all &= lookup_oracle();
    all &= determinism();
    std::cout << (all ? "all criteria PASS" : "some criteria FAIL") << std::endl;
    return all ? 0 : 1;
}
