#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "synergy/entropy.hpp"
#include "synergy/errors.hpp"
#include "synergy/ingest.hpp"

#include "helpers.hpp"

using namespace synergy;
using testutil::TempDir;
using testutil::write_file;

namespace {

const std::string kHierarchyText = "101\tS1\tD1\tN\n"
                                   "102\tS1\tD1\tN\n"
                                   "201\tS2\tD1\tN\n"
                                   "301\tS3\tD2\tN\n";

RegionHierarchy test_hierarchy() {
    std::istringstream in(kHierarchyText);
    return RegionHierarchy::parse(in, "inline");
}

const std::string kMixedCsv = "firm_id,zip,employees,nace,year\n"
                              "F1,101,5,2620,2019\n"
                              "F2,102,0,3011,2019\n"
                              "F3,201,12,6201,2019\n"
                              "F1,301,3,21,2019\n"
                              "F4,,3,21,2019\n"
                              "F5,999,3,21,2019\n"
                              "F6,101,,21,2019\n"
                              "F7,101,x,21,2019\n"
                              "F8,101,3,2,2019\n"
                              "F9,101,3,21,2018\n"
                              "\n"
                              "F10,101,0,21,2019\n"
                              "F11,101,3\n";

struct Fixture {
    TempDir dir;
    RegionHierarchy hierarchy = test_hierarchy();
    SectorTaxonomy taxonomy = SectorTaxonomy::default_taxonomy();
    SizeBins bins = SizeBins::default_bins();
};

} // namespace

TEST_CASE("parser requires the four mandatory columns") {
    std::vector<RawRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
    auto keep_record = [&](RawRecord&& r) { records.push_back(std::move(r)); };
    auto keep_diag = [&](ParseDiagnostic&& d) { diagnostics.push_back(std::move(d)); };

    std::istringstream missing("firm_id,zip,employees\nF1,101,5\n");
    CHECK_THROWS_CODE(parse_records(missing, "t", keep_record, keep_diag), HeaderMismatch);
    std::istringstream empty("");
    CHECK_THROWS_CODE(parse_records(empty, "t", keep_record, keep_diag), HeaderMismatch);
}

TEST_CASE("columns are located by name, extras ignored, year optional") {
    std::vector<RawRecord> records;
    std::istringstream in("region,nace,firm_id,employees,zip\n"
                          "ignored,2620,F1,5,101\n");
    parse_records(in, "t", [&](RawRecord&& r) { records.push_back(std::move(r)); },
                  [](ParseDiagnostic&&) {});
    REQUIRE(records.size() == 1);
    CHECK(records[0].firm_id == "F1");
    CHECK(records[0].location_code == "101");
    CHECK(records[0].employees == "5");
    CHECK(records[0].nace == "2620");
    CHECK(records[0].year.empty());
}

TEST_CASE("rows with the wrong field count become diagnostics, not records") {
    std::vector<RawRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
    std::istringstream in("firm_id,zip,employees,nace\n"
                          "F1,101,5,2620\n"
                          "F2,101,5\n"
                          "F3,101,5,2620,extra\n");
    parse_records(in, "t", [&](RawRecord&& r) { records.push_back(std::move(r)); },
                  [&](ParseDiagnostic&& d) { diagnostics.push_back(std::move(d)); });
    CHECK(records.size() == 1);
    REQUIRE(diagnostics.size() == 2);
    CHECK(diagnostics[0].line == 3);
    CHECK(diagnostics[1].line == 4);
}

TEST_CASE("ingest classifies and accounts for every row") {
    Fixture f;
    const auto path = write_file(f.dir.file("firms.csv"), kMixedCsv);

    SUBCASE("defaults: no year filter, zero size kept") {
        const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins);
        CHECK(result.report.total_read == 12);
        CHECK(result.report.total_valid == 5);
        CHECK(result.records.size() == 5);
        CHECK(result.report.reasons.at("duplicate_id") == 1);
        CHECK(result.report.reasons.at("missing_location") == 1);
        CHECK(result.report.reasons.at("unmapped_location") == 1);
        CHECK(result.report.reasons.at("missing_size") == 2);
        CHECK(result.report.reasons.at("bad_nace") == 1);
        CHECK(result.report.reasons.at("malformed_line") == 1);
        CHECK(result.report.reasons.count("filtered_year") == 0);
        CHECK(result.report.total_read == result.report.total_valid + result.report.excluded());
        CHECK(result.report.validity_pct() == doctest::Approx(100.0 * 5 / 12));
    }

    SUBCASE("year filter and zero-size exclusion") {
        IngestOptions options;
        options.year = 2019;
        options.include_zero_size = false;
        const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins, options);
        CHECK(result.report.total_read == 12);
        CHECK(result.report.total_valid == 2);
        CHECK(result.report.reasons.at("filtered_year") == 1);
        CHECK(result.report.reasons.at("filtered_zero_size") == 2);
        CHECK(result.report.total_read == result.report.total_valid + result.report.excluded());
    }
}

TEST_CASE("classified records carry chain, size bin, division and sector") {
    Fixture f;
    const auto path = write_file(f.dir.file("firms.csv"),
                                 "firm_id,zip,employees,nace,year\nF1,201,12,6201,2019\n");
    const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins);
    REQUIRE(result.records.size() == 1);
    const auto& r = result.records[0];
    CHECK(f.hierarchy.region_id(0, r.chain[0]) == "S2");
    CHECK(f.hierarchy.region_id(1, r.chain[1]) == "D1");
    CHECK(r.size_bin == 3);
    CHECK(r.division == "62");
    CHECK(r.sector.sector == Sector::Kis);
    CHECK(r.sector.high_tech_services);
    CHECK(r.firm.year == 2019);
}

TEST_CASE("the year filter runs before duplicate tracking") {
    Fixture f;
    const auto path = write_file(f.dir.file("firms.csv"), "firm_id,zip,employees,nace,year\n"
                                                          "G3,101,3,21,2018\n"
                                                          "G3,101,3,21,2018\n"
                                                          "G3,101,3,21,2019\n");
    IngestOptions options;
    options.year = 2019;
    const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins, options);
    // The 2018 rows never claim the id, so the 2019 row is valid.
    CHECK(result.report.reasons.at("filtered_year") == 2);
    CHECK(result.report.reasons.count("duplicate_id") == 0);
    CHECK(result.report.total_valid == 1);
}

TEST_CASE("duplicate tracking runs before field validation") {
    Fixture f;
    const auto path = write_file(f.dir.file("firms.csv"), "firm_id,zip,employees,nace\n"
                                                          "G4,101,3,21\n"
                                                          "G4,,3,21\n");
    const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins);
    CHECK(result.report.reasons.at("duplicate_id") == 1);
    CHECK(result.report.reasons.count("missing_location") == 0);
}

TEST_CASE("exclusion checks run in a fixed order") {
    Fixture f;
    auto classify_reason = [&](const std::string& zip, const std::string& employees,
                               const std::string& nace) {
        RawRecord raw{2, "X", zip, employees, nace, ""};
        const auto outcome = validate_and_classify(raw, f.hierarchy, f.taxonomy, f.bins);
        REQUIRE(outcome.reason.has_value());
        return *outcome.reason;
    };
    // Each row fails several checks; only the first in order is reported.
    CHECK(classify_reason("", "x", "9") == ExclusionReason::MissingLocation);
    CHECK(classify_reason("999", "x", "9") == ExclusionReason::UnmappedLocation);
    CHECK(classify_reason("101", "x", "9") == ExclusionReason::MissingSize);
    CHECK(classify_reason("101", "-3", "9") == ExclusionReason::MissingSize);
    CHECK(classify_reason("101", "3", "9") == ExclusionReason::BadNace);
}

TEST_CASE("duplicate ids are tracked across files") {
    Fixture f;
    const auto first = write_file(f.dir.file("a.csv"),
                                  "firm_id,zip,employees,nace\nF1,101,5,2620\nF2,102,3,21\n");
    const auto second = write_file(f.dir.file("b.csv"),
                                   "firm_id,zip,employees,nace\nF2,201,9,26\nF3,301,1,50\n");
    const auto result = ingest_files({first, second}, f.hierarchy, f.taxonomy, f.bins);
    CHECK(result.report.total_read == 4);
    CHECK(result.report.total_valid == 3);
    CHECK(result.report.reasons.at("duplicate_id") == 1);
}

TEST_CASE("missing input files raise IoError") {
    Fixture f;
    CHECK_THROWS_CODE(ingest_file(f.dir.file("absent.csv"), f.hierarchy, f.taxonomy, f.bins),
                      IoError);
}

TEST_CASE("build_tensor enumerates only observed categories, sorted") {
    Fixture f;
    const auto path = write_file(f.dir.file("firms.csv"), "firm_id,zip,employees,nace\n"
                                                          "F1,101,5,2620\n"
                                                          "F2,102,5,2620\n"
                                                          "F3,201,300,21\n"
                                                          "F4,301,300,2110\n");
    const auto result = ingest_file(path, f.hierarchy, f.taxonomy, f.bins);
    const auto tensor =
        build_tensor(result.records, f.hierarchy, GeoAxis::at_level(0), f.bins);
    CHECK(tensor.axes()[0].labels() == std::vector<std::string>{"S1", "S2", "S3"});
    CHECK(tensor.axes()[1].labels() == std::vector<std::string>{"5-9", ">249"});
    CHECK(tensor.axes()[2].labels() == std::vector<std::string>{"21", "26"});
    CHECK(tensor.total() == 4);
    CHECK(tensor.at({0, 0, 1}) == 2); // S1, 5-9, 26
    CHECK(tensor.at({1, 1, 0}) == 1); // S2, >249, 21
    CHECK(tensor.at({2, 1, 0}) == 1); // S3, >249, 21
    CHECK(tensor.at({0, 0, 0}) == 0);

    const auto district = build_tensor(result.records, f.hierarchy, GeoAxis::at_level(1), f.bins);
    CHECK(district.axes()[0].labels() == std::vector<std::string>{"D1", "D2"});
    CHECK(district.at({0, 0, 1}) == 2);

    const auto zip = build_tensor(result.records, f.hierarchy, GeoAxis::zip(), f.bins);
    CHECK(zip.axes()[0].labels() == std::vector<std::string>{"101", "102", "201", "301"});
    CHECK(zip.at({0, 0, 1}) == 1);
}

TEST_CASE("build_tensor output is identical across thread counts") {
    Fixture f;
    std::mt19937_64 rng(101);
    const auto data = testutil::random_dataset(rng, 12, 6, 3, 8, 20, 5000);
    const auto reference = build_tensor(data.records, data.hierarchy, GeoAxis::at_level(0),
                                        f.bins, 1);
    for (unsigned threads : {2u, 3u, 8u, 64u}) {
        const auto tensor = build_tensor(data.records, data.hierarchy, GeoAxis::at_level(0),
                                         f.bins, threads);
        CHECK(tensor.cells() == reference.cells());
        CHECK(transmission3(tensor) == transmission3(reference));
    }
}

TEST_CASE("build_tensor refuses an empty record set") {
    Fixture f;
    std::vector<ClassifiedRecord> no_records;
    CHECK_THROWS_CODE(build_tensor(no_records, f.hierarchy, GeoAxis::at_level(0), f.bins),
                      NoValidRecords);
}
