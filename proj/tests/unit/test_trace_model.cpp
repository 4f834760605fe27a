#include "data_path.hpp"
#include "skewmorph/errors.hpp"
#include "skewmorph/trace_model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace skewmorph;
using skewmorph::testing::make_flow;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Straightforward textbook statistics, written independently of describe_series.
struct NaiveStats {
    double mean, std, mad, skew, kurt;
    std::vector<double> pct;
};

NaiveStats naive(std::vector<double> v) {
    const double n = double(v.size());
    NaiveStats s{};
    for (double x : v) s.mean += x / n;
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (n - 1));
    for (double x : v) s.mad += std::abs(x - s.mean) / n;
    // sample skewness / excess kurtosis with the usual bias corrections
    double m2 = ss / n, m3 = 0, m4 = 0;
    for (double x : v) {
        m3 += std::pow(x - s.mean, 3) / n;
        m4 += std::pow(x - s.mean, 4) / n;
    }
    s.skew = std::sqrt(n * (n - 1)) / (n - 2) * m3 / std::pow(m2, 1.5);
    s.kurt = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * (m4 / (m2 * m2) - 3) + 6);
    std::sort(v.begin(), v.end());
    for (int k = 1; k <= 9; ++k) {
        const double h = (n - 1) * k / 10.0;
        const double lo = v[std::size_t(std::floor(h))];
        const double hi = v[std::size_t(std::ceil(h))];
        s.pct.push_back(lo + (h - std::floor(h)) * (hi - lo));
    }
    return s;
}

}  // namespace

TEST_CASE("flow invariants") {
    Flow f = make_flow({10, 20, 30});
    CHECK_NOTHROW(validate_flow(f));
    SUBCASE("gap in seq") {
        f.packets[2].seq = 5;
        CHECK_THROWS_AS(validate_flow(f), SchemaError);
    }
    SUBCASE("time runs backwards") {
        f.packets[2].timestamp = 0.0;
        CHECK_THROWS_AS(validate_flow(f), SchemaError);
    }
    SUBCASE("first iat") {
        f.packets[0].iat = 0.5;
        CHECK_THROWS_AS(validate_flow(f), SchemaError);
    }
    SUBCASE("empty") {
        f.packets.clear();
        CHECK_THROWS_AS(validate_flow(f), SchemaError);
    }
}

TEST_CASE("synthetic payloads are stable") {
    CHECK(synthetic_payload("f", 3, 50) == synthetic_payload("f", 3, 50));
    CHECK(synthetic_payload("f", 3, 50) != synthetic_payload("f", 4, 50));
    CHECK(synthetic_payload("f", 3, 0).empty());
}

TEST_CASE("MIRAGE documents") {
    const auto flows = parse_mirage_json(slurp(SKEWMORPH_TEST_DATA "/mirage_sample.json"));
    REQUIRE(flows.size() == 2);
    const Flow& f = flows[0];
    CHECK(f.app_label == "com.spotify.music");
    REQUIRE(f.packets.size() == 3);
    CHECK(f.packets[0].payload_len() == 517);
    CHECK(f.packets[0].payload[0] == 22);
    CHECK(f.packets[0].payload[4] == 0);
    CHECK(f.packets[1].payload[0] == 0x16);
    CHECK(f.packets[1].payload_len() == 1368);
    CHECK(f.packets[2].payload_len() == 0);
    CHECK(f.packets[1].direction == Direction::downstream);
    CHECK(f.packets[1].tcp_win_size == 1024);
    CHECK(f.packets[2].timestamp == doctest::Approx(0.033));
    REQUIRE(f.start_time);
    CHECK(*f.start_time == doctest::Approx(1554130800.25));
    CHECK(flows[1].app_label == "com.facebook.katana");
    CHECK_FALSE(flows[1].start_time);
    for (const Flow& g : flows) CHECK_NOTHROW(validate_flow(g));
}

TEST_CASE("MIRAGE schema errors") {
    const std::string base = R"({"k": {"packet_data": {"src_port": [1], "dst_port": [2],
        "packet_dir": [DIR], "L4_payload_bytes": [LEN], "iat": [0], "TCP_win_size": [5]},
        "flow_metadata": {"BF_label": "x"}}})";
    auto doc = [&](std::string dir, std::string len) {
        std::string s = base;
        s.replace(s.find("DIR"), 3, dir);
        s.replace(s.find("LEN"), 3, len);
        return s;
    };
    CHECK_NOTHROW(parse_mirage_json(doc("1", "10")));
    CHECK_THROWS_AS(parse_mirage_json(doc("2", "10")), SchemaError);
    CHECK_THROWS_AS(parse_mirage_json(doc("1", "10, 20")), SchemaError);
    CHECK_THROWS_AS(parse_mirage_json(doc("1", "\"x\"")), ParseError);
    CHECK_THROWS_AS(parse_mirage_json("{\"k\": {"), ParseError);
    const std::string empty = R"({"k": {"packet_data": {"src_port": [], "dst_port": [], "packet_dir": [],
        "L4_payload_bytes": [], "iat": [], "TCP_win_size": []}, "flow_metadata": {"BF_label": "x"}}})";
    CHECK_THROWS_AS(parse_mirage_json(empty), SchemaError);
    const std::string unlabeled = R"({"k": {"packet_data": {"src_port": [1], "dst_port": [2], "packet_dir": [0],
        "L4_payload_bytes": [3], "iat": [0], "TCP_win_size": [1]}, "flow_metadata": {}}})";
    CHECK_THROWS_WITH_AS(parse_mirage_json(unlabeled), doctest::Contains("BF_label"), SchemaError);
}

TEST_CASE("flow lines") {
    const auto flows = parse_flow_lines(
        R"({"app":"a","flow_id":"f1","packets":[{"ts":0,"dir":0,"len":100,"src_port":1,"dst_port":2,"extra":1}]})");
    REQUIRE(flows.size() == 1);
    REQUIRE(flows[0].packets.size() == 1);
    CHECK(flows[0].packets[0].payload_len() == 100);
    CHECK(flows[0].packets[0].payload == synthetic_payload("f1", 0, 100));

    const std::string dup = R"({"app":"a","flow_id":"f1","packets":[{"ts":0,"dir":0,"len":1,"src_port":1,"dst_port":2}]})";
    CHECK_THROWS_AS(parse_flow_lines(dup + "\n" + dup), SchemaError);

    std::string many;
    for (int i = 0; i < 1000; ++i) {
        many += format_flow_line(make_flow({std::uint32_t(i % 50)}, {}, "id" + std::to_string(i))) + "\n";
    }
    const auto parsed = parse_flow_lines(many);
    REQUIRE(parsed.size() == 1000);
    CHECK(parsed[0].flow_id == "id0");
    CHECK(parsed[999].flow_id == "id999");
}

TEST_CASE("flow lines round trip") {
    std::mt19937_64 rng(5);
    std::vector<Flow> flows;
    for (int k = 0; k < 50; ++k) {
        std::vector<std::uint32_t> lens;
        for (int i = 0, n = 1 + int(rng() % 30); i < n; ++i) lens.push_back(std::uint32_t(rng() % 1500));
        Flow f = make_flow(lens, {}, "rt" + std::to_string(k));
        double t = 0;
        for (auto& p : f.packets) {
            p.iat = p.seq == 0 ? 0.0 : std::ldexp(double(rng() % 100000), -20);
            t += p.iat;
            p.timestamp = t;
        }
        if (k % 3 == 0) f.packets.back().payload.assign(f.packets.back().payload.size(), 0xab);
        if (k % 2 == 0) f.start_time.reset();
        flows.push_back(f);
    }
    const auto back = parse_flow_lines(format_flow_lines(flows));
    REQUIRE(back.size() == flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) CHECK(back[i] == flows[i]);
    const auto mirage = parse_mirage_json(slurp(SKEWMORPH_TEST_DATA "/mirage_sample.json"));
    CHECK(parse_flow_lines(format_flow_lines(mirage)) == mirage);
}

TEST_CASE("series statistics: constant and empty series") {
    const Flow f = make_flow({100, 100, 100}, {0, 0, 0});
    const auto fv = extract_features(f);
    for (std::size_t i = 0; i < kStatsPerSeries; ++i) {
        const std::string name = feature_name(i);
        const bool dispersion = i >= 3 && i <= 7;
        CHECK_MESSAGE(fv.values[i] == (dispersion ? 0.0 : 100.0), name);
        CHECK(fv.values[kStatsPerSeries + i] == 0.0);  // no downstream packets
    }
    CHECK(feature_name(0) == "length_up_min");
    CHECK(feature_name(kFeatureCount - 1) == "iat_bi_p90");
}

TEST_CASE("series statistics: small worked case") {
    const std::vector<double> v = {1, 2, 3, 4, 5};
    const auto s = describe_series(v);
    CHECK(s[2] == 3.0);
    CHECK(s[3] == doctest::Approx(1.5811388300841898));
    CHECK(s[4] == doctest::Approx(2.5));
    CHECK(s[5] == doctest::Approx(1.2));
    CHECK(s[12] == 3.0);

    const auto one = describe_series(std::vector<double>{7});
    for (std::size_t i = 3; i <= 7; ++i) CHECK(one[i] == 0.0);
    const auto two = describe_series(std::vector<double>{1, 3});
    CHECK(two[6] == 0.0);  // skew needs 3 values
    CHECK(two[7] == 0.0);
}

TEST_CASE("series statistics agree with a naive implementation") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v;
        for (int i = 0, n = 4 + int(rng() % 300); i < n; ++i) v.push_back(double(rng() % 1500));
        const auto s = describe_series(v);
        const auto o = naive(v);
        CHECK(s[2] == doctest::Approx(o.mean).epsilon(1e-12));
        CHECK(s[3] == doctest::Approx(o.std).epsilon(1e-12));
        CHECK(s[5] == doctest::Approx(o.mad).epsilon(1e-12));
        CHECK(s[6] == doctest::Approx(o.skew).epsilon(1e-9));
        CHECK(s[7] == doctest::Approx(o.kurt).epsilon(1e-9));
        for (int k = 0; k < 9; ++k) CHECK(s[8 + std::size_t(k)] == doctest::Approx(o.pct[std::size_t(k)]));
    }
}

TEST_CASE("feature vector layout") {
    Flow f = make_flow({10, 20, 30, 40, 0});
    const auto a = extract_features(f);
    const auto b = extract_features(f);
    CHECK(a == b);
    for (double x : a.values) CHECK(std::isfinite(x));
    CHECK(a.values[0] == 0.0);  // upstream lengths 10, 30, 0
    CHECK(a.values[1] == 30.0);
    const auto no_iat = extract_features(f, {false});
    for (std::size_t i = 3 * kStatsPerSeries; i < kFeatureCount; ++i) CHECK(no_iat.values[i] == 0.0);
    CHECK(std::equal(a.values.begin(), a.values.begin() + 3 * kStatsPerSeries, no_iat.values.begin()));
}

TEST_CASE("length histograms") {
    const LengthGrid g{100, 300};
    const std::vector<std::uint32_t> lens = {100, 100, 300};
    const auto h = histogram_of_lengths(lens, g);
    REQUIRE(h);
    CHECK(h->probs[0] == doctest::Approx(2.0 / 3.0));
    CHECK(h->probs[1] == 0.0);
    CHECK(h->probs[2] == doctest::Approx(1.0 / 3.0));

    const LengthGrid d{64, 1440};
    CHECK(d.bins() == 23);
    CHECK(d.bin_of(5000) == 22);
    CHECK(d.top(22) == 1440);
    CHECK(d.bin_of(64) == 0);
    CHECK(d.bin_of(65) == 1);
    CHECK_THROWS_AS(d.bin_of(0), DomainError);
    CHECK_FALSE(histogram_of_lengths(std::vector<std::uint32_t>{0, 0}, d));

    const auto same = histogram_of_lengths(std::vector<std::uint32_t>{700, 700}, d);
    CHECK(same->probs[d.bin_of(700)] == 1.0);

    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<std::uint32_t> v;
        for (int i = 0; i < 1 + int(rng() % 500); ++i) v.push_back(1 + std::uint32_t(rng() % 3000));
        const auto r = histogram_of_lengths(v, d);
        double sum = 0;
        for (double p : r->probs) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}
