// skewmorph command line: corpus ingest, mutation, recovery, training and evaluation.

#include "skewmorph/classifier.hpp"
#include "skewmorph/errors.hpp"
#include "skewmorph/experiment.hpp"
#include "skewmorph/mutation.hpp"
#include "skewmorph/seeding.hpp"
#include "skewmorph/target_dist.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace skewmorph;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInvariant = 3 };

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> report;
    std::optional<std::uint32_t> bin_width;
    std::optional<std::uint32_t> max_len;
    std::optional<std::string> alpha;
};

ExperimentConfig resolve(const Globals& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw IoError("cannot open config '" + g.config_path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = parse_config(buf.str());
    }
    if (g.seed) cfg.seed = *g.seed;
    if (g.report) cfg.report_path = *g.report;
    if (g.bin_width) cfg.grid.bin_width = *g.bin_width;
    if (g.max_len) cfg.grid.max_len = *g.max_len;
    if (g.alpha) {
        if (*g.alpha == "schedule") {
            cfg.schedule = {true, 0.0};
        } else {
            std::size_t used = 0;
            double a = 0.0;
            try {
                a = std::stod(*g.alpha, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != g.alpha->size()) {
                throw CLI::ValidationError("--alpha", "expected a number or 'schedule'");
            }
            cfg.schedule = {false, a};
        }
    }
    cfg.validate();
    return cfg;
}

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) throw IoError("cannot write '" + path + "'");
}

int cmd_ingest(const std::string& input) {
    const auto flows = parse_flows(read_input(input));
    std::map<std::string, std::pair<std::size_t, std::size_t>> apps;
    for (const Flow& f : flows) {
        validate_flow(f);
        auto& [n_flows, n_packets] = apps[f.app_label];
        ++n_flows;
        n_packets += f.packets.size();
    }
    std::cout << flows.size() << " flows, " << apps.size() << " apps\n";
    for (const auto& [app, counts] : apps) {
        std::cout << "  " << std::left << std::setw(24) << app << std::right << std::setw(8) << counts.first
                  << " flows" << std::setw(10) << counts.second << " packets\n";
    }
    return kOk;
}

int cmd_mutate(const ExperimentConfig& cfg, const std::string& input, const std::string& output) {
    const auto flows = parse_flows(read_input(input));
    const std::uint64_t seed = derive_seed(cfg.seed, std::string_view("mutation"));
    std::vector<Flow> out;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const Flow& flow = flows[i];
        const std::int64_t clock = flow_clock(flow, cfg.clock_base + static_cast<std::int64_t>(i));
        const double alpha = cfg.schedule.from_time ? schedule_alpha(clock) : cfg.schedule.fixed;
        const auto target = flow_target(flow, alpha, cfg.grid, clock);
        out.push_back(observed_flow(apply_plan(flow, plan_mutation(flow, target, seed))));
    }
    write_output(output, format_flow_lines(out, {.payload_only_if_custom = false}));
    return kOk;
}

int cmd_recover(const std::string& input, const std::string& output) {
    const auto mutated = parse_flow_lines(read_input(input));
    std::vector<Flow> out;
    for (const Flow& m : mutated) out.push_back(recover(mutated_from_observed(m)));
    write_output(output, format_flow_lines(out));
    return kOk;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& input, const std::string& output) {
    const auto flows = parse_flows(read_input(input));
    LabeledDataset data;
    for (const Flow& f : flows) data.add(extract_features(f, {cfg.use_iat}), f.app_label);
    TrainConfig tc = cfg.classifier;
    tc.seed = derive_seed(cfg.seed, std::string_view("forest"));
    const Forest forest = train_forest(data, tc);
    write_output(output, serialize_forest(forest));
    if (forest.oob_accuracy) {
        std::cerr << "out-of-bag accuracy " << std::fixed << std::setprecision(3) << *forest.oob_accuracy << '\n';
    }
    return kOk;
}

int cmd_evaluate(ExperimentConfig cfg, const std::string& input) {
    if (!input.empty()) cfg.input = input;
    const ExperimentResult result = run_experiment(cfg);
    if (!result.cv_accuracies.empty()) {
        std::cerr << "cv accuracy:";
        for (double a : result.cv_accuracies) std::cerr << ' ' << std::fixed << std::setprecision(3) << a;
        std::cerr << '\n';
    }
    emit_report(result.rows, cfg.report_path, std::cout);
    return kOk;
}

int cmd_synth(const ExperimentConfig& cfg, int apps, int flows, const std::string& output) {
    const auto corpus = synth_corpus(apps, flows, derive_seed(cfg.seed, std::string_view("corpus")));
    write_output(output, format_flow_lines(corpus));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewmorph: packet-length morphing toward skew-normal targets"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON experiment config");
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--report", g.report, "CSV report path");
    app.add_option("--bin-width", g.bin_width, "Length bin width in bytes");
    app.add_option("--max-len", g.max_len, "Largest packet length");
    app.add_option("--alpha", g.alpha, "Fixed shape parameter, or 'schedule'");

    std::string input = "-", output = "-";
    int apps = 5, flows = 100;

    auto* ingest = app.add_subcommand("ingest", "Validate and summarize a corpus");
    ingest->add_option("input", input, "MIRAGE JSON or flow lines ('-' for stdin)");

    auto* mutate = app.add_subcommand("mutate", "Write mutated flows");
    mutate->add_option("input", input, "Flows to mutate");
    mutate->add_option("-o,--output", output, "Output flow lines");

    auto* recover_cmd = app.add_subcommand("recover", "Rebuild flows from mutated flows");
    recover_cmd->add_option("input", input, "Mutated flow lines");
    recover_cmd->add_option("-o,--output", output, "Output flow lines");

    auto* train = app.add_subcommand("train", "Fit and serialize a forest");
    train->add_option("input", input, "Training flows");
    train->add_option("-o,--output", output, "Forest JSON");

    std::string eval_input;
    auto* evaluate = app.add_subcommand("evaluate", "Run the train / mutate / evaluate experiment");
    evaluate->add_option("input", eval_input, "Corpus path (default: config input or synthetic)");

    auto* synth = app.add_subcommand("synth", "Emit the synthetic corpus");
    synth->add_option("--apps", apps, "Number of apps");
    synth->add_option("--flows", flows, "Flows per app");
    synth->add_option("-o,--output", output, "Output flow lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*ingest) return cmd_ingest(input);
        if (*recover_cmd) return cmd_recover(input, output);
        const ExperimentConfig cfg = resolve(g);
        if (*mutate) return cmd_mutate(cfg, input, output);
        if (*train) return cmd_train(cfg, input, output);
        if (*evaluate) return cmd_evaluate(cfg, eval_input);
        if (*synth) return cmd_synth(cfg, apps, flows, output);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const PlanValidationError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInvariant;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInvariant;
    }
    return kUsage;
}
