#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgned/ids.hpp"

namespace kgned {

/// Binary confusion counts over (mention, candidate) pairs; label 1 is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    void add(int predicted, int label);
    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& other);
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); 0/0 is taken as 0.
Prf prf(const ConfusionCounts& counts);

/// Harmonic mean of a precision/recall pair (any common scale); 0 when both are 0.
double f1_score(double precision, double recall);

/// Mention id -> predicted or gold entity (empty: none / out of KB).
using MentionPredictions = std::map<std::string, std::optional<EntityId>>;

struct InKbAccuracy {
    std::size_t correct = 0;
    std::size_t total = 0;  ///< mentions with a gold entity
    double accuracy = 0.0;  ///< NaN when total == 0
    std::optional<std::string> warning;
};

/// Accuracy over in-KB mentions only. Throws InputError if the key sets differ.
InKbAccuracy inkb_accuracy(const MentionPredictions& predictions, const MentionPredictions& gold);

struct FlipReport {
    std::vector<std::string> wrong_to_right;  ///< mention ids, ascending
    std::vector<std::string> right_to_wrong;
    std::size_t unchanged = 0;
    std::size_t unique_entities_up = 0;    ///< distinct gold entities among wrong_to_right
    std::size_t unique_entities_down = 0;  ///< distinct gold entities among right_to_wrong
};

/// A prediction is right when it equals the gold value (both empty counts as right).
/// Throws InputError if the three key sets differ.
FlipReport flip_analysis(const MentionPredictions& before, const MentionPredictions& after,
                         const MentionPredictions& gold);

/// One line of a predictions file.
struct PredictionRecord {
    std::string mention_id;
    std::optional<EntityId> predicted;
    double score = 0.0;
};

/// JSONL of {"mention_id", "predicted", "score"}.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& file);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
MentionPredictions to_mention_predictions(const std::vector<PredictionRecord>& records);

inline constexpr int kReportSchemaVersion = 1;

/// Summary of one evaluation or comparison run.
struct RunReport {
    std::string command;                  ///< train | eval | diff
    std::string protocol;                 ///< pairs | argmax | both | ""
    std::uint64_t seed = 0;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::optional<ConfusionCounts> pairs;
    std::optional<InKbAccuracy> argmax;
    std::size_t gold_missing = 0;  ///< mentions whose gold is absent from the candidates
    std::size_t no_candidates = 0;
    std::optional<FlipReport> flips;
    std::vector<double> loss_history;

    nlohmann::ordered_json to_json() const;
    static RunReport from_json(const nlohmann::ordered_json& doc);
    /// Human-readable table; metrics as percentages with two decimals.
    std::string to_text() const;

    friend bool operator==(const RunReport& a, const RunReport& b);
};

/// Formats a fraction as a percentage with two decimals ("92.35").
std::string percent(double fraction);

}  // namespace kgned
