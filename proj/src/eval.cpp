#include "kgned/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "kgned/errors.hpp"

namespace kgned {

using nlohmann::ordered_json;

void ConfusionCounts::add(int predicted, int label) {
    if (predicted) (label ? tp : fp)++;
    else (label ? fn : tn)++;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <class Map>
bool same_keys(const Map& a, const Map& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib)
        if (ia->first != ib->first) return false;
    return true;
}

ordered_json optional_id(const std::optional<EntityId>& id) {
    return id ? ordered_json(id->str()) : ordered_json(nullptr);
}

}  // namespace

double f1_score(double precision, double recall) {
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

Prf prf(const ConfusionCounts& c) {
    Prf out;
    out.precision = ratio(c.tp, c.tp + c.fp);
    out.recall = ratio(c.tp, c.tp + c.fn);
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

InKbAccuracy inkb_accuracy(const MentionPredictions& predictions, const MentionPredictions& gold) {
    if (!same_keys(predictions, gold))
        throw InputError("predictions and gold cover different mention ids");
    InKbAccuracy out;
    for (const auto& [id, g] : gold) {
        if (!g) continue;
        ++out.total;
        if (predictions.at(id) == g) ++out.correct;
    }
    if (out.total == 0) {
        out.accuracy = std::numeric_limits<double>::quiet_NaN();
        out.warning = "no in-KB mentions: accuracy is undefined";
    } else {
        out.accuracy = ratio(out.correct, out.total);
    }
    return out;
}

FlipReport flip_analysis(const MentionPredictions& before, const MentionPredictions& after,
                         const MentionPredictions& gold) {
    if (!same_keys(before, after) || !same_keys(before, gold))
        throw InputError("flip analysis needs identical mention id sets");
    FlipReport out;
    std::set<std::string> up_entities, down_entities;
    for (const auto& [id, g] : gold) {
        const bool was_right = before.at(id) == g;
        const bool is_right = after.at(id) == g;
        if (!was_right && is_right) {
            out.wrong_to_right.push_back(id);
            if (g) up_entities.insert(g->str());
        } else if (was_right && !is_right) {
            out.right_to_wrong.push_back(id);
            if (g) down_entities.insert(g->str());
        } else {
            ++out.unchanged;
        }
    }
    out.unique_entities_up = up_entities.size();
    out.unique_entities_down = down_entities.size();
    return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string(), 0, "cannot open");
    std::vector<PredictionRecord> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            PredictionRecord rec;
            if (!obj.contains("mention_id") || !obj["mention_id"].is_string())
                throw ParseError(file.string(), number, "missing field 'mention_id'");
            rec.mention_id = obj["mention_id"].get<std::string>();
            if (!obj.contains("predicted"))
                throw ParseError(file.string(), number, "missing field 'predicted'");
            if (!obj["predicted"].is_null()) rec.predicted = EntityId{obj["predicted"].get<std::string>()};
            if (obj.contains("score") && obj["score"].is_number()) rec.score = obj["score"].get<double>();
            if (!seen.insert(rec.mention_id).second)
                throw ParseError(file.string(), number, "duplicate mention_id '" + rec.mention_id + "'");
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file.string(), number, e.what());
        } catch (const InputError& e) {
            throw ParseError(file.string(), number, e.what());
        }
    }
    return out;
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
    for (const auto& r : records) {
        ordered_json obj;
        obj["mention_id"] = r.mention_id;
        obj["predicted"] = optional_id(r.predicted);
        obj["score"] = r.score;
        out << obj.dump() << '\n';
    }
}

MentionPredictions to_mention_predictions(const std::vector<PredictionRecord>& records) {
    MentionPredictions out;
    for (const auto& r : records) out[r.mention_id] = r.predicted;
    return out;
}

std::string percent(double fraction) {
    if (std::isnan(fraction)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

ordered_json RunReport::to_json() const {
    ordered_json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["command"] = command;
    doc["protocol"] = protocol;
    doc["seed"] = seed;
    doc["config"] = config;

    if (pairs) {
        const auto m = prf(*pairs);
        doc["pairs"] = {{"tp", pairs->tp},
                        {"fp", pairs->fp},
                        {"tn", pairs->tn},
                        {"fn", pairs->fn},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"precision_pct", percent(m.precision)},
                        {"recall_pct", percent(m.recall)},
                        {"f1_pct", percent(m.f1)}};
    } else {
        doc["pairs"] = nullptr;
    }

    if (argmax) {
        doc["argmax"] = {{"correct", argmax->correct},
                         {"total", argmax->total},
                         {"accuracy", std::isnan(argmax->accuracy) ? ordered_json(nullptr)
                                                                   : ordered_json(argmax->accuracy)},
                         {"accuracy_pct", percent(argmax->accuracy)},
                         {"warning", argmax->warning ? ordered_json(*argmax->warning) : ordered_json(nullptr)}};
    } else {
        doc["argmax"] = nullptr;
    }
    doc["gold_missing"] = gold_missing;
    doc["no_candidates"] = no_candidates;

    if (flips) {
        doc["flips"] = {{"wrong_to_right", flips->wrong_to_right},
                        {"right_to_wrong", flips->right_to_wrong},
                        {"unchanged", flips->unchanged},
                        {"unique_entities_up", flips->unique_entities_up},
                        {"unique_entities_down", flips->unique_entities_down}};
    } else {
        doc["flips"] = nullptr;
    }
    doc["loss_history"] = loss_history;
    return doc;
}

RunReport RunReport::from_json(const ordered_json& doc) {
    if (doc.value("schema_version", 0) != kReportSchemaVersion)
        throw InputError("unsupported report schema version");
    RunReport r;
    r.command = doc.value("command", "");
    r.protocol = doc.value("protocol", "");
    r.seed = doc.value("seed", std::uint64_t{0});
    r.config = doc.value("config", ordered_json::object());
    if (const auto& p = doc["pairs"]; !p.is_null()) {
        r.pairs = ConfusionCounts{p.at("tp").get<std::size_t>(), p.at("fp").get<std::size_t>(),
                                  p.at("tn").get<std::size_t>(), p.at("fn").get<std::size_t>()};
    }
    if (const auto& a = doc["argmax"]; !a.is_null()) {
        InKbAccuracy acc;
        acc.correct = a.at("correct").get<std::size_t>();
        acc.total = a.at("total").get<std::size_t>();
        acc.accuracy = a.at("accuracy").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                  : a.at("accuracy").get<double>();
        if (!a.at("warning").is_null()) acc.warning = a.at("warning").get<std::string>();
        r.argmax = acc;
    }
    r.gold_missing = doc.value("gold_missing", std::size_t{0});
    r.no_candidates = doc.value("no_candidates", std::size_t{0});
    if (const auto& f = doc["flips"]; !f.is_null()) {
        FlipReport fr;
        fr.wrong_to_right = f.at("wrong_to_right").get<std::vector<std::string>>();
        fr.right_to_wrong = f.at("right_to_wrong").get<std::vector<std::string>>();
        fr.unchanged = f.at("unchanged").get<std::size_t>();
        fr.unique_entities_up = f.at("unique_entities_up").get<std::size_t>();
        fr.unique_entities_down = f.at("unique_entities_down").get<std::size_t>();
        r.flips = fr;
    }
    r.loss_history = doc.value("loss_history", std::vector<double>{});
    return r;
}

bool operator==(const RunReport& a, const RunReport& b) {
    return a.to_json() == b.to_json();
}

std::string RunReport::to_text() const {
    std::ostringstream out;
    out << command;
    if (!protocol.empty()) out << " (" << protocol << ")";
    out << ", seed " << seed << '\n';
    if (pairs) {
        const auto m = prf(*pairs);
        out << "  Prec    Recall  F1\n"
            << "  " << percent(m.precision) << "   " << percent(m.recall) << "   " << percent(m.f1) << '\n'
            << "  tp=" << pairs->tp << " fp=" << pairs->fp << " tn=" << pairs->tn << " fn=" << pairs->fn
            << '\n';
    }
    if (argmax) {
        out << "  In-KB accuracy " << percent(argmax->accuracy) << " (" << argmax->correct << "/"
            << argmax->total << ")\n";
        if (argmax->warning) out << "  warning: " << *argmax->warning << '\n';
    }
    if (gold_missing) out << "  gold missing from candidates: " << gold_missing << '\n';
    if (no_candidates) out << "  mentions without candidates: " << no_candidates << '\n';
    if (flips) {
        out << "  wrong->right " << flips->wrong_to_right.size() << " (" << flips->unique_entities_up
            << " unique entities), right->wrong " << flips->right_to_wrong.size() << " ("
            << flips->unique_entities_down << " unique entities), unchanged " << flips->unchanged << '\n';
    }
    if (!loss_history.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", loss_history.back());
        out << "  final loss " << buf << " after " << loss_history.size() << " epochs\n";
    }
    return out.str();
}

}  // namespace kgned
