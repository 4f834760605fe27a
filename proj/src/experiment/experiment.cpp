#include "skewmorph/experiment.hpp"

#include "skewmorph/errors.hpp"
#include "skewmorph/log.hpp"
#include "skewmorph/seeding.hpp"
#include "skewmorph/target_dist.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace skewmorph {
namespace {

using nlohmann::json;

constexpr std::size_t kMinFlowsPerApp = 4;

template <class T>
T get_as(const json& obj, const char* key) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("config key '") + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw SchemaError(where + ": unknown key '" + key + "'");
        }
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    if (!(split > 0.0 && split < 1.0)) {
        throw DomainError("split must lie strictly between 0 and 1");
    }
    if (cv_k < 2) {
        throw DomainError("cv_k must be at least 2");
    }
    if (!std::isfinite(schedule.fixed)) {
        throw DomainError("fixed alpha must be finite");
    }
    if (input == "synthetic" && (synth_apps < 2 || synth_flows_per_app < 1)) {
        throw DomainError("synthetic corpus needs at least two apps and one flow per app");
    }
    classifier.validate();
}

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("config: ") + ex.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("config must be a JSON object");
    }
    reject_unknown(doc,
                   {"input", "grid", "schedule", "split", "cv_k", "classifier", "seed", "report_path",
                    "synth_apps", "synth_flows_per_app", "use_iat", "clock_base", "instrument"},
                   "config");
    ExperimentConfig cfg;
    if (doc.contains("input")) cfg.input = get_as<std::string>(doc, "input");
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        reject_unknown(g, {"bin_width", "max_len"}, "config.grid");
        if (g.contains("bin_width")) cfg.grid.bin_width = get_as<std::uint32_t>(g, "bin_width");
        if (g.contains("max_len")) cfg.grid.max_len = get_as<std::uint32_t>(g, "max_len");
    }
    if (doc.contains("schedule")) {
        const json& s = doc["schedule"];
        if (s.is_string() && s.get<std::string>() == "timestamp") {
            cfg.schedule.from_time = true;
        } else if (s.is_number()) {
            cfg.schedule = {false, s.get<double>()};
        } else {
            throw SchemaError("config key 'schedule' must be \"timestamp\" or a number");
        }
    }
    if (doc.contains("split")) cfg.split = get_as<double>(doc, "split");
    if (doc.contains("cv_k")) cfg.cv_k = get_as<int>(doc, "cv_k");
    if (doc.contains("classifier")) {
        const json& c = doc["classifier"];
        reject_unknown(c, {"n_trees", "max_depth", "min_samples_split", "features_per_split"}, "config.classifier");
        if (c.contains("n_trees")) cfg.classifier.n_trees = get_as<int>(c, "n_trees");
        if (c.contains("max_depth")) cfg.classifier.max_depth = get_as<int>(c, "max_depth");
        if (c.contains("min_samples_split")) cfg.classifier.min_samples_split = get_as<int>(c, "min_samples_split");
        if (c.contains("features_per_split")) cfg.classifier.features_per_split = get_as<int>(c, "features_per_split");
    }
    if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("report_path")) cfg.report_path = get_as<std::string>(doc, "report_path");
    if (doc.contains("synth_apps")) cfg.synth_apps = get_as<int>(doc, "synth_apps");
    if (doc.contains("synth_flows_per_app")) cfg.synth_flows_per_app = get_as<int>(doc, "synth_flows_per_app");
    if (doc.contains("use_iat")) cfg.use_iat = get_as<bool>(doc, "use_iat");
    if (doc.contains("clock_base")) cfg.clock_base = get_as<std::int64_t>(doc, "clock_base");
    if (doc.contains("instrument")) cfg.instrument = get_as<bool>(doc, "instrument");
    cfg.validate();
    return cfg;
}

std::vector<Flow> parse_flows(std::string_view text) {
    // a MIRAGE document is one object keyed by flow; flow lines carry "packets" per line
    if (json::accept(text)) {
        const json doc = json::parse(text);
        if (doc.is_object() && !doc.contains("packets")) {
            return parse_mirage_json(text);
        }
    }
    return parse_flow_lines(text);
}

std::vector<Flow> load_flows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_flows(buf.str());
}

double accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
    if (truth.empty()) {
        throw DomainError("accuracy of an empty list is undefined");
    }
    if (truth.size() != predicted.size()) {
        throw DomainError("accuracy: label lists differ in length");
    }
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
    return double(hit) / double(truth.size());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<Flow>& flows) {
    cfg.validate();
    const FeatureOptions features{cfg.use_iat};

    std::map<std::string, std::vector<const Flow*>> by_app;
    std::set<std::string> ids;
    for (const Flow& f : flows) {
        validate_flow(f);
        if (!ids.insert(f.flow_id).second) {
            throw SchemaError("duplicate flow_id '" + f.flow_id + "'");
        }
        by_app[f.app_label].push_back(&f);
    }
    for (auto it = by_app.begin(); it != by_app.end();) {
        if (it->second.size() < kMinFlowsPerApp) {
            warn("app '" + it->first + "' has " + std::to_string(it->second.size()) +
                 " flows; excluded (needs at least 4)");
            it = by_app.erase(it);
        } else {
            ++it;
        }
    }
    if (by_app.size() < 2) {
        throw DomainError("experiment needs at least two apps with 4 or more flows");
    }

    ExperimentResult result;
    LabeledDataset train;
    std::vector<const Flow*> test;
    for (auto& [app, members] : by_app) {
        std::sort(members.begin(), members.end(), [](const Flow* a, const Flow* b) { return a->flow_id < b->flow_id; });
        std::mt19937_64 rng(derive_seed(cfg.seed, "split/" + app));
        std::shuffle(members.begin(), members.end(), rng);
        const auto n = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::clamp(std::round(cfg.split * n), 1.0, n - 1.0));
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < n_train) {
                train.add(extract_features(*members[i], features), app);
                result.train_ids.push_back(members[i]->flow_id);
            } else {
                test.push_back(members[i]);
            }
        }
    }

    TrainConfig tc = cfg.classifier;
    tc.seed = derive_seed(cfg.seed, std::string_view("forest"));
    result.forest = train_forest(train, tc);
    try {
        result.cv_accuracies = kfold_cv(train, tc, cfg.cv_k);
    } catch (const DomainError& ex) {
        warn(std::string("cross-validation skipped: ") + ex.what());
    }

    const std::uint64_t mutation_seed = derive_seed(cfg.seed, std::string_view("mutation"));
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Flow& flow = *test[i];
        FlowOutcome out;
        out.flow_id = flow.flow_id;
        out.app_label = flow.app_label;
        out.predicted_origin = predict(result.forest, extract_features(flow, features));

        const std::int64_t clock = flow_clock(flow, cfg.clock_base + static_cast<std::int64_t>(i));
        out.alpha = cfg.schedule.from_time ? schedule_alpha(clock) : cfg.schedule.fixed;
        const TargetHistogram target = flow_target(flow, out.alpha, cfg.grid, clock);
        const MutationPlan plan = plan_mutation(flow, target, mutation_seed);
        MutatedFlow mutated = apply_plan(flow, plan);

        // the adversary only sees what goes on the wire
        out.predicted_mutated = predict(result.forest, extract_features(observed_flow(mutated), features));
        out.overhead = overhead(flow, mutated);
        const auto seen = histogram_of_lengths(mutated_lengths(mutated), cfg.grid);
        out.tv = total_variation(seen->probs, target.probs);
        result.test.push_back(std::move(out));
        if (cfg.instrument) {
            result.mutated.push_back(std::move(mutated));
        }
    }

    for (const auto& [app, members] : by_app) {
        std::vector<std::string> truth, origin, mutated;
        double oh = 0.0;
        for (const FlowOutcome& o : result.test) {
            if (o.app_label != app) continue;
            truth.push_back(app);
            origin.push_back(o.predicted_origin);
            mutated.push_back(o.predicted_mutated);
            oh += o.overhead;
        }
        ReportRow row;
        row.app_label = app;
        row.n_flows = members.size();
        row.accuracy_origin = accuracy(truth, origin);
        row.accuracy_mutated = accuracy(truth, mutated);
        row.overhead_mean = oh / double(truth.size());
        result.rows.push_back(row);
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<Flow> flows =
        cfg.input == "synthetic"
            ? synth_corpus(cfg.synth_apps, cfg.synth_flows_per_app, derive_seed(cfg.seed, std::string_view("corpus")))
            : load_flows(cfg.input);
    return run_experiment(cfg, flows);
}

CorpusMeans corpus_means(const std::vector<ReportRow>& rows) {
    if (rows.empty()) {
        throw DomainError("no report rows");
    }
    CorpusMeans m;
    for (const ReportRow& r : rows) {
        m.accuracy_origin += r.accuracy_origin;
        m.accuracy_mutated += r.accuracy_mutated;
        m.overhead += r.overhead_mean;
    }
    const double n = double(rows.size());
    m.accuracy_origin /= n;
    m.accuracy_mutated /= n;
    m.overhead /= n;
    return m;
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
    if (rows.empty()) {
        throw DomainError("no report rows");
    }
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "app,n_flows,acc_origin,acc_mutated,overhead_mean\n";
    for (const ReportRow& r : rows) {
        out << r.app_label << ',' << r.n_flows << ',' << 100.0 * r.accuracy_origin << ','
            << 100.0 * r.accuracy_mutated << ',' << 100.0 * r.overhead_mean << '\n';
    }
    return out.str();
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
    if (rows.empty()) {
        throw DomainError("no report rows");
    }
    std::size_t w = 3;
    for (const ReportRow& r : rows) w = std::max(w, r.app_label.size());
    std::ostringstream out;
    out << std::left << std::setw(int(w)) << "app" << std::right << std::setw(9) << "flows" << std::setw(13)
        << "origin %" << std::setw(13) << "mutated %" << std::setw(13) << "overhead %" << '\n';
    out << std::fixed << std::setprecision(1);
    for (const ReportRow& r : rows) {
        out << std::left << std::setw(int(w)) << r.app_label << std::right << std::setw(9) << r.n_flows
            << std::setw(13) << 100.0 * r.accuracy_origin << std::setw(13) << 100.0 * r.accuracy_mutated
            << std::setw(13) << 100.0 * r.overhead_mean << '\n';
    }
    const CorpusMeans m = corpus_means(rows);
    out << std::left << std::setw(int(w)) << "mean" << std::right << std::setw(9) << "" << std::setw(13)
        << 100.0 * m.accuracy_origin << std::setw(13) << 100.0 * m.accuracy_mutated << std::setw(13)
        << 100.0 * m.overhead << '\n';
    return out.str();
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& path, std::ostream& table_out) {
    const std::string csv = format_report_csv(rows);
    if (!path.empty()) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f || !(f << csv) || !f.flush()) {
            throw IoError("cannot write report to '" + path + "'");
        }
    }
    table_out << format_report_table(rows);
}

}  // namespace skewmorph
