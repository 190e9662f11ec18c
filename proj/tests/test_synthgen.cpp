#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "synergy/decomposition.hpp"
#include "synergy/entropy.hpp"
#include "synergy/errors.hpp"
#include "synergy/ingest.hpp"
#include "synergy/synthgen.hpp"

#include "helpers.hpp"
#include "oracle.hpp"

using namespace synergy;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Generates, writes CSV plus hierarchy, and runs the ingest pipeline, i.e.
// the same path the CLI takes from a synthetic spec.
struct Roundtrip {
    RegionHierarchy hierarchy;
    IngestResult result;
};

Roundtrip roundtrip(const SynthSpec& spec) {
    TempDir dir;
    const auto records = generate(spec);
    std::ostringstream csv;
    write_records_csv(records, spec.year.has_value(), csv);
    const auto csv_path = write_file(dir.file("records.csv"), csv.str());
    const auto hier_path = write_file(dir.file("hierarchy.tsv"), hierarchy_file_text(spec));

    Roundtrip r{RegionHierarchy::load(hier_path), {}};
    r.result = ingest_file(csv_path, r.hierarchy, SectorTaxonomy::default_taxonomy(),
                           SizeBins::default_bins());
    return r;
}

SynthSpec parity_spec(std::uint32_t cats) {
    SynthSpec spec;
    spec.mode = SynthMode::Exact;
    spec.geo_cells = cats;
    spec.size_classes = cats;
    spec.divisions = cats;
    spec.structure = ParityCoupled{};
    spec.layout = {cats, 1};
    return spec;
}

} // namespace

TEST_CASE("exact parity tensors hit the closed-form synergy") {
    CHECK(transmission3(exact_counts_mode(parity_spec(2))).value() == -1000.0);
    CHECK(transmission3(exact_counts_mode(parity_spec(4))).value() == -2000.0);
    CHECK(transmission3(exact_counts_mode(parity_spec(3))).value() ==
          doctest::Approx(-1000.0 * std::log2(3.0)).epsilon(1e-12));
}

TEST_CASE("exact pair coupling reproduces the analytic mutual information") {
    SynthSpec spec;
    spec.mode = SynthMode::Exact;
    spec.structure = PairCoupled{AxisId::Geography, AxisId::Size, 1.0};

    SUBCASE("full strength: 1000 mbits between the pair, no triple term") {
        const auto tensor = exact_counts_mode(spec);
        CHECK(transmission2(tensor, AxisId::Geography, AxisId::Size).value() == 1000.0);
        CHECK(transmission3(tensor).value() == 0.0);
    }

    SUBCASE("half strength: diagonal 3, off-diagonal 1") {
        std::get<PairCoupled>(spec.structure).strength = 0.5;
        const auto tensor = exact_counts_mode(spec);
        CHECK(tensor.total() == 16); // (3+1+1+3) pair counts x 2 technology values
        CHECK(std::abs(transmission2(tensor, AxisId::Geography, AxisId::Size).value() -
                       oracle::pair_coupled_mi_mbits(0.5, 2)) < 1e-9);
        CHECK(std::abs(transmission3(tensor).value()) < 1e-9);
    }

    SUBCASE("coupling between size and technology") {
        spec.structure = PairCoupled{AxisId::Size, AxisId::Technology, 1.0};
        const auto tensor = exact_counts_mode(spec);
        CHECK(transmission2(tensor, AxisId::Size, AxisId::Technology).value() == 1000.0);
        CHECK(transmission2(tensor, AxisId::Geography, AxisId::Size).value() == 0.0);
    }
}

TEST_CASE("irrational coupling strengths have no exact form") {
    SynthSpec spec;
    spec.mode = SynthMode::Exact;
    spec.structure = PairCoupled{AxisId::Geography, AxisId::Size, 1.0 / std::sqrt(2.0)};
    CHECK_THROWS_CODE(exact_counts_mode(spec), NotRational);
    CHECK_THROWS_CODE(generate(spec), NotRational);
    // Sampling has no rationality requirement.
    spec.mode = SynthMode::Sampled;
    spec.n_records = 10;
    CHECK_NOTHROW(generate(spec));
}

TEST_CASE("exact generation emits whole copies of the minimal tensor") {
    SynthSpec spec;
    spec.mode = SynthMode::Exact; // independent 2x2x2, minimal total 8

    spec.n_records = 0;
    CHECK(generate(spec).size() == 8);
    spec.n_records = 7;
    CHECK(generate(spec).size() == 8);
    spec.n_records = 20;
    CHECK(generate(spec).size() == 16);
    spec.n_records = 24;
    CHECK(generate(spec).size() == 24);
}

TEST_CASE("generated records survive the ingest pipeline unchanged") {
    auto spec = parity_spec(2);
    spec.n_records = 32;
    spec.year = 2019;
    const auto r = roundtrip(spec);
    CHECK(r.result.report.total_read == 32);
    CHECK(r.result.report.total_valid == 32);
    CHECK(r.result.report.excluded() == 0);

    // Zip-axis tensor from ingested records equals the exact tensor's
    // transmission bit for bit: same labels, same proportions.
    const auto ingested = build_tensor(r.result.records, r.hierarchy, GeoAxis::zip(),
                                       SizeBins::default_bins());
    const auto exact = exact_counts_mode(spec);
    CHECK(ingested.axes()[0].labels() == exact.axes()[0].labels());
    CHECK(ingested.axes()[1].labels() == exact.axes()[1].labels());
    CHECK(ingested.axes()[2].labels() == exact.axes()[2].labels());
    CHECK(transmission3(ingested) == transmission3(exact));
    CHECK(transmission3(ingested).value() == -1000.0);
}

TEST_CASE("the synthetic hierarchy is clean and covers every record") {
    auto spec = parity_spec(4);
    spec.layout = {4, 2};
    spec.n_records = 64;
    std::istringstream in(hierarchy_file_text(spec));
    const auto hierarchy = RegionHierarchy::parse(in, "synth");
    CHECK(hierarchy.validate().empty());
    CHECK(hierarchy.level_names() == std::vector<std::string>{"subject", "district", "nation"});
    CHECK(hierarchy.regions(0).size() == 4);
    CHECK(hierarchy.regions(1).size() == 2);
    for (const auto& record : generate(spec)) {
        CHECK(hierarchy.try_resolve(record.location_code).has_value());
    }
}

TEST_CASE("a parity-plus-independent mixture decomposes exactly") {
    SynthSpec spec;
    spec.mode = SynthMode::Exact;
    spec.geo_cells = 2;
    spec.layout = {2, 2};
    Mixture mixture;
    mixture.components.push_back({0.5, ParityCoupled{}});
    mixture.components.push_back({0.5, Independent{}});
    spec.structure = mixture;
    spec.n_records = 16;

    const auto r = roundtrip(spec);
    CHECK(r.result.report.total_valid == 16);
    const std::vector<std::size_t> levels{0, 1, 2};
    const auto report = multilevel_table(r.result.records, r.hierarchy, levels, GeoAxis::zip(),
                                         SizeBins::default_bins());
    // One component per subject: the parity block contributes -1000 on half
    // the records, the independent block exactly nothing.
    REQUIRE(report.grouped.size() == 2);
    CHECK(report.grouped[0].in_group_sum.value() == -500.0);
    REQUIRE(report.grouped[0].groups.size() == 2);
    CHECK(report.grouped[0].groups[0].t_g.value() == -1000.0);
    CHECK(report.grouped[0].groups[1].t_g.value() == 0.0);
}

TEST_CASE("sampling is deterministic in the seed") {
    SynthSpec spec;
    spec.n_records = 500;
    spec.seed = 99;
    spec.structure = PairCoupled{AxisId::Geography, AxisId::Technology, 0.7};
    const auto a = generate(spec);
    const auto b = generate(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].firm_id == b[i].firm_id);
        CHECK(a[i].location_code == b[i].location_code);
        CHECK(a[i].employees == b[i].employees);
        CHECK(a[i].nace == b[i].nace);
    }
    spec.seed = 100;
    const auto c = generate(spec);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        any_difference = any_difference || a[i].location_code != c[i].location_code ||
                         a[i].nace != c[i].nace;
    }
    CHECK(any_difference);
}

TEST_CASE("sampled estimates converge on the planted values") {
    SynthSpec spec;
    spec.n_records = 40000;

    SUBCASE("independent: transmission near zero") {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            spec.seed = seed;
            const auto r = roundtrip(spec);
            const auto tensor = build_tensor(r.result.records, r.hierarchy, GeoAxis::zip(),
                                             SizeBins::default_bins());
            CHECK(std::abs(transmission3(tensor).value()) < 25.0);
        }
    }

    SUBCASE("parity: transmission near -1000") {
        spec.structure = ParityCoupled{};
        for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
            spec.seed = seed;
            const auto r = roundtrip(spec);
            const auto tensor = build_tensor(r.result.records, r.hierarchy, GeoAxis::zip(),
                                             SizeBins::default_bins());
            CHECK(std::abs(transmission3(tensor).value() + 1000.0) < 25.0);
        }
    }

    SUBCASE("pair coupling: mutual information near the closed form") {
        spec.structure = PairCoupled{AxisId::Geography, AxisId::Size, 0.6};
        spec.seed = 7;
        const auto r = roundtrip(spec);
        const auto tensor = build_tensor(r.result.records, r.hierarchy, GeoAxis::zip(),
                                         SizeBins::default_bins());
        CHECK(std::abs(transmission2(tensor, AxisId::Geography, AxisId::Size).value() -
                       oracle::pair_coupled_mi_mbits(0.6, 2)) < 25.0);
    }
}

TEST_CASE("specs parse from JSON") {
    const std::string text = R"({
        "seed": 7,
        "n_records": 100,
        "geo_cells": 3,
        "size_classes": 4,
        "divisions": 5,
        "mode": "exact",
        "year": 2019,
        "layout": {"subjects": 2, "districts": 2},
        "structure": {"kind": "mixture", "components": [
            {"weight": 0.5, "structure": {"kind": "parity"}},
            {"weight": 0.5, "structure": {"kind": "pair", "first": "size",
                                          "second": "technology", "strength": 0.25}}
        ]}
    })";
    const auto spec = SynthSpec::from_json(text, "inline");
    CHECK(spec.seed == 7);
    CHECK(spec.n_records == 100);
    CHECK(spec.geo_cells == 3);
    CHECK(spec.size_classes == 4);
    CHECK(spec.divisions == 5);
    CHECK(spec.mode == SynthMode::Exact);
    CHECK(spec.year == 2019);
    CHECK(spec.layout.subjects == 2);
    CHECK(spec.layout.districts == 2);
    const auto* mixture = std::get_if<Mixture>(&spec.structure);
    REQUIRE(mixture != nullptr);
    REQUIRE(mixture->components.size() == 2);
    const auto* pair = std::get_if<PairCoupled>(&mixture->components[1].structure);
    REQUIRE(pair != nullptr);
    CHECK(pair->first == AxisId::Size);
    CHECK(pair->second == AxisId::Technology);
    CHECK(pair->strength == 0.25);
}

TEST_CASE("bad specs are rejected") {
    auto parse = [](const std::string& text) { return SynthSpec::from_json(text, "inline"); };
    CHECK_THROWS_CODE(parse("{"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"mode": "psychic"})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"geo_cells": 0})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"size_classes": 9})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"divisions": 100})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"layout": {"subjects": 0}})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"layout": {"subjects": 2, "districts": 3}})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"structure": {"kind": "cosmic"}})"), BadSpec);
    CHECK_THROWS_CODE(
        parse(R"({"structure": {"kind": "pair", "first": "size", "second": "size"}})"), BadSpec);
    CHECK_THROWS_CODE(
        parse(R"({"structure": {"kind": "pair", "strength": 1.5}})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"structure": {"kind": "mixture", "components": []}})"), BadSpec);
    CHECK_THROWS_CODE(parse(R"({"structure": {"kind": "mixture", "components": [
        {"weight": 0.4, "structure": {"kind": "independent"}},
        {"weight": 0.4, "structure": {"kind": "independent"}}]}})"),
                      BadSpec);
    // Three components cannot split two subjects evenly.
    CHECK_THROWS_CODE(parse(R"({"layout": {"subjects": 2, "districts": 1},
        "structure": {"kind": "mixture", "components": [
        {"weight": 0.5, "structure": {"kind": "independent"}},
        {"weight": 0.25, "structure": {"kind": "independent"}},
        {"weight": 0.25, "structure": {"kind": "independent"}}]}})"),
                      BadSpec);
    CHECK_THROWS_CODE(SynthSpec::from_json_file("/nonexistent/spec.json"), IoError);
}

TEST_CASE("records CSV carries the year column only when asked") {
    SynthSpec spec;
    spec.mode = SynthMode::Exact;
    spec.year = 2021;
    const auto records = generate(spec);
    std::ostringstream with_year;
    write_records_csv(records, true, with_year);
    CHECK(with_year.str().rfind("firm_id,zip,employees,nace,year\n", 0) == 0);
    CHECK(with_year.str().find(",2021\n") != std::string::npos);
    std::ostringstream without;
    write_records_csv(records, false, without);
    CHECK(without.str().rfind("firm_id,zip,employees,nace\n", 0) == 0);
    CHECK(without.str().find("2021") == std::string::npos);
}
