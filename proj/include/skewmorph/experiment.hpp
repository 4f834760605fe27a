#pragma once

#include "skewmorph/classifier.hpp"
#include "skewmorph/mutation.hpp"
#include "skewmorph/trace_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace skewmorph {

struct AlphaSchedule {
    /// true: alpha from each flow's start time; false: `fixed` for every flow.
    bool from_time = true;
    double fixed = 0.0;

    bool operator==(const AlphaSchedule&) const = default;
};

struct ExperimentConfig {
    std::string input = "synthetic";  // or a path to MIRAGE JSON / flow lines
    LengthGrid grid;
    AlphaSchedule schedule;
    double split = 0.75;
    int cv_k = 5;
    TrainConfig classifier;  // its seed is replaced by one derived from `seed`
    std::uint64_t seed = 1;
    std::string report_path;  // empty: no CSV file

    int synth_apps = 5;
    int synth_flows_per_app = 100;
    bool use_iat = true;
    /// Clock for flows without a start time: clock_base + flow index.
    std::int64_t clock_base = 0;
    /// Keep the mutated test flows in the result.
    bool instrument = false;

    void validate() const;
};

/// Reads a JSON object whose keys override the defaults. Unknown keys are a SchemaError.
ExperimentConfig parse_config(std::string_view json_text);

/// MIRAGE JSON or flow lines, chosen by content.
std::vector<Flow> parse_flows(std::string_view text);
std::vector<Flow> load_flows(const std::string& path);

std::vector<Flow> synth_corpus(int n_apps, int flows_per_app, std::uint64_t seed);

double accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& predicted);

struct ReportRow {
    std::string app_label;
    std::size_t n_flows = 0;
    double accuracy_origin = 0.0;
    double accuracy_mutated = 0.0;
    double overhead_mean = 0.0;

    bool operator==(const ReportRow&) const = default;
};

struct FlowOutcome {
    std::string flow_id;
    std::string app_label;
    std::string predicted_origin;
    std::string predicted_mutated;
    double alpha = 0.0;
    double overhead = 0.0;
    double tv = 0.0;  // mutated length histogram vs target
};

struct ExperimentResult {
    std::vector<ReportRow> rows;
    std::vector<double> cv_accuracies;
    std::vector<std::string> train_ids;
    std::vector<FlowOutcome> test;
    std::vector<MutatedFlow> mutated;  // filled when instrument is set
    Forest forest;
};

/// Train on origin flows, evaluate on origin and mutated test flows.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<Flow>& flows);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CorpusMeans {
    double accuracy_origin = 0.0;
    double accuracy_mutated = 0.0;
    double overhead = 0.0;
};

/// Unweighted means over the report rows.
CorpusMeans corpus_means(const std::vector<ReportRow>& rows);

std::string format_report_csv(const std::vector<ReportRow>& rows);
std::string format_report_table(const std::vector<ReportRow>& rows);

/// Writes the CSV to `path` (if non-empty) and the aligned table to `table_out`.
void emit_report(const std::vector<ReportRow>& rows, const std::string& path, std::ostream& table_out);

}  // namespace skewmorph
