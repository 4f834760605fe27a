#include "skewmorph/errors.hpp"
#include "skewmorph/experiment.hpp"
#include "skewmorph/log.hpp"
#include "skewmorph/seeding.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace skewmorph;

namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.classifier.n_trees = 20;
    cfg.synth_apps = 3;
    cfg.synth_flows_per_app = 20;
    cfg.cv_k = 3;
    cfg.seed = 4;
    return cfg;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("accuracy") {
    CHECK(accuracy({"a", "b", "c", "d"}, {"a", "b", "c", "x"}) == 0.75);
    CHECK(accuracy({"a", "b"}, {"a", "b"}) == 1.0);
    CHECK(accuracy({"a", "b"}, {"c", "d"}) == 0.0);
    CHECK_THROWS_AS(accuracy({}, {}), DomainError);
    CHECK_THROWS_AS(accuracy({"a"}, {"a", "b"}), DomainError);
}

TEST_CASE("synthetic corpus shape") {
    const auto flows = synth_corpus(5, 100, 9);
    REQUIRE(flows.size() == 500);
    std::set<std::string> labels;
    for (const Flow& f : flows) {
        labels.insert(f.app_label);
        CHECK(f.packets.size() >= 20);
        CHECK(f.packets.size() <= 400);
        CHECK_NOTHROW(validate_flow(f));
        REQUIRE(f.start_time);
    }
    CHECK(labels == std::set<std::string>{"app0", "app1", "app2", "app3", "app4"});
    CHECK(synth_corpus(5, 100, 9) == flows);
    CHECK(synth_corpus(5, 100, 10) != flows);
    CHECK_THROWS_AS(synth_corpus(1, 10, 1), DomainError);
}

TEST_CASE("report formatting") {
    const std::vector<ReportRow> rows = {{"app0", 100, 0.924, 0.216, 0.134}};
    const std::string csv = format_report_csv(rows);
    CHECK(csv == "app,n_flows,acc_origin,acc_mutated,overhead_mean\napp0,100,92.4,21.6,13.4\n");
    CHECK_THROWS_AS(format_report_csv({}), DomainError);

    std::ostringstream table;
    const std::string path = temp_path("skewmorph_report_test.csv");
    emit_report(rows, path, table);
    std::ifstream in(path);
    std::ostringstream written;
    written << in.rdbuf();
    CHECK(written.str() == csv);
    CHECK(table.str().find("92.4") != std::string::npos);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_report(rows, "/nonexistent-dir/x/report.csv", table), IoError);
}

TEST_CASE("config parsing") {
    const auto cfg = parse_config(R"({"grid": {"bin_width": 128}, "schedule": 3.5, "seed": 9,
                                      "classifier": {"n_trees": 10}, "split": 0.5})");
    CHECK(cfg.grid.bin_width == 128);
    CHECK(cfg.grid.max_len == 1440);
    CHECK_FALSE(cfg.schedule.from_time);
    CHECK(cfg.schedule.fixed == 3.5);
    CHECK(cfg.seed == 9);
    CHECK(cfg.classifier.n_trees == 10);
    CHECK(cfg.split == 0.5);
    CHECK(parse_config("{}").schedule.from_time);
    CHECK_THROWS_AS(parse_config(R"({"split": 1.0})"), DomainError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), SchemaError);
    CHECK_THROWS_AS(parse_config(R"({"seed": "x"})"), SchemaError);
    CHECK_THROWS_AS(parse_config("[1"), ParseError);
}

TEST_CASE("split sizes and disjointness") {
    auto cfg = quick_config();
    cfg.synth_flows_per_app = 100;
    cfg.classifier.n_trees = 5;
    cfg.instrument = true;
    const auto r = run_experiment(cfg);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.train_ids.size() == 3 * 75);
    CHECK(r.test.size() == 3 * 25);
    std::set<std::string> train(r.train_ids.begin(), r.train_ids.end());
    for (const auto& o : r.test) CHECK(train.count(o.flow_id) == 0);
    for (const auto& row : r.rows) CHECK(row.n_flows == 100);
    CHECK(r.cv_accuracies.size() == 3);
}

TEST_CASE("mutated predictions come from the mutated packets") {
    auto cfg = quick_config();
    cfg.instrument = true;
    const auto r = run_experiment(cfg);
    REQUIRE(r.mutated.size() == r.test.size());
    for (std::size_t i = 0; i < r.test.size(); ++i) {
        const Flow seen = observed_flow(r.mutated[i]);
        CHECK(predict(r.forest, extract_features(seen)) == r.test[i].predicted_mutated);
        CHECK(r.mutated[i].flow_id == r.test[i].flow_id);
    }

    // per-app overhead is the mean of recomputed per-flow overheads
    const auto flows = synth_corpus(cfg.synth_apps, cfg.synth_flows_per_app, derive_seed(cfg.seed, std::string_view("corpus")));
    for (const ReportRow& row : r.rows) {
        double sum = 0;
        int n = 0;
        for (std::size_t i = 0; i < r.test.size(); ++i) {
            if (r.test[i].app_label != row.app_label) continue;
            const auto it = std::find_if(flows.begin(), flows.end(), [&](const Flow& f) { return f.flow_id == r.test[i].flow_id; });
            sum += overhead(*it, r.mutated[i]);
            ++n;
        }
        CHECK(row.overhead_mean == doctest::Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("small apps are excluded") {
    auto flows = synth_corpus(3, 10, 2);
    flows.erase(std::remove_if(flows.begin(), flows.end(),
                               [](const Flow& f) { return f.app_label == "app2" && f.flow_id != "app2-0"; }),
                flows.end());
    std::vector<std::string> warnings;
    set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
    const auto r = run_experiment(quick_config(), flows);
    set_warning_sink({});
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].app_label == "app0");
    CHECK(r.rows[1].app_label == "app1");
    CHECK(std::any_of(warnings.begin(), warnings.end(), [](const std::string& w) { return w.find("app2") != std::string::npos; }));
}

TEST_CASE("identical runs give identical reports") {
    const auto cfg = quick_config();
    CHECK(format_report_csv(run_experiment(cfg).rows) == format_report_csv(run_experiment(cfg).rows));
}

TEST_CASE("corpus loading picks the format from the content") {
    const auto flows = synth_corpus(2, 2, 1);
    CHECK(parse_flows(format_flow_lines(flows)) == flows);
    CHECK(parse_flows(format_flow_line(flows[0])).size() == 1);
    CHECK_THROWS_AS(load_flows("/nonexistent/flows.jsonl"), IoError);
}
