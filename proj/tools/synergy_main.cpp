#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "synergy/decomposition.hpp"
#include "synergy/geo.hpp"
#include "synergy/ingest.hpp"
#include "synergy/report_io.hpp"
#include "synergy/synthgen.hpp"
#include "synergy/taxonomy.hpp"

namespace fs = std::filesystem;
using synergy::Error;
using synergy::ErrorCode;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::HeaderMismatch:
    case ErrorCode::MissingRun:
        return 2;
    case ErrorCode::InvalidConfig:
        return 1;
    default:
        return 3;
    }
}

struct SectorFilter {
    std::string description = "all";
    bool active = false;
    std::optional<synergy::Sector> sector;
    std::vector<std::string> prefixes; // custom mode: digit prefixes
};

SectorFilter parse_sector_filter(const std::string& text) {
    SectorFilter filter;
    filter.description = text;
    if (text == "all") {
        return filter;
    }
    filter.active = true;
    if (text == "high_tech") {
        filter.sector = synergy::Sector::HighTech;
        return filter;
    }
    if (text == "medium_tech") {
        filter.sector = synergy::Sector::MediumHighTech;
        return filter;
    }
    if (text == "kis") {
        filter.sector = synergy::Sector::Kis;
        return filter;
    }
    if (text.rfind("custom:", 0) == 0) {
        std::string item;
        std::istringstream list(text.substr(7));
        while (std::getline(list, item, ',')) {
            std::string digits;
            for (const char c : item) {
                if (c >= '0' && c <= '9') {
                    digits += c;
                } else if (c != '.' && c != ' ') {
                    throw Error(ErrorCode::InvalidConfig,
                                "bad sector prefix '" + item + "'");
                }
            }
            if (digits.empty()) {
                throw Error(ErrorCode::InvalidConfig, "empty sector prefix");
            }
            filter.prefixes.push_back(digits);
        }
        if (filter.prefixes.empty()) {
            throw Error(ErrorCode::InvalidConfig, "custom sector filter lists no prefixes");
        }
        return filter;
    }
    throw Error(ErrorCode::InvalidConfig,
                "unknown sector '" + text + "' (all, high_tech, medium_tech, kis, custom:...)");
}

bool sector_match(const synergy::ClassifiedRecord& record, const SectorFilter& filter) {
    if (!filter.active) {
        return true;
    }
    if (filter.sector) {
        return record.sector.sector == *filter.sector;
    }
    for (const std::string& prefix : filter.prefixes) {
        if (record.firm.nace.rfind(prefix, 0) == 0) {
            return true;
        }
    }
    return false;
}

synergy::SectorTaxonomy load_taxonomy(const std::string& path) {
    if (path.empty()) {
        return synergy::SectorTaxonomy::default_taxonomy();
    }
    return synergy::SectorTaxonomy::load(path);
}

synergy::RegionNames load_names_sidecar(const std::string& hierarchy_path) {
    const fs::path sidecar = fs::path(hierarchy_path).concat(".names");
    std::error_code ec;
    if (fs::exists(sidecar, ec)) {
        return synergy::RegionNames::load(sidecar.string());
    }
    return {};
}

std::vector<std::size_t> parse_levels(const synergy::RegionHierarchy& hierarchy,
                                      const std::string& text) {
    std::vector<std::size_t> levels;
    if (text.empty()) {
        for (std::size_t l = 0; l < hierarchy.level_count(); ++l) {
            levels.push_back(l);
        }
        return levels;
    }
    std::string item;
    std::istringstream list(text);
    while (std::getline(list, item, ',')) {
        const auto index = hierarchy.level_index(item);
        if (!index) {
            throw Error(ErrorCode::InvalidConfig, "unknown level '" + item + "'");
        }
        levels.push_back(*index);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

synergy::GeoAxis parse_geo_axis(const synergy::RegionHierarchy& hierarchy,
                                const std::string& text) {
    if (text.empty() || text == "finest") {
        return synergy::GeoAxis::at_level(0);
    }
    if (text == "zip") {
        return synergy::GeoAxis::zip();
    }
    const auto index = hierarchy.level_index(text);
    if (!index) {
        throw Error(ErrorCode::InvalidConfig, "unknown geography axis '" + text + "'");
    }
    return synergy::GeoAxis::at_level(*index);
}

void require_fresh(const fs::path& path, bool force) {
    std::error_code ec;
    if (!force && fs::exists(path, ec)) {
        throw Error(ErrorCode::IoError,
                    path.string() + " exists; pass --force to overwrite");
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "write failure on " + path.string());
    }
}

std::string now_iso8601() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

// Run metadata lives beside the data files so those stay byte-identical
// across reruns.
void write_meta(const fs::path& stem, const std::vector<std::string>& inputs,
                const std::string& dataset_hash, const std::string& command, bool force) {
    nlohmann::ordered_json meta;
    meta["created"] = now_iso8601();
    meta["command"] = command;
    meta["inputs"] = inputs;
    meta["dataset_hash"] = dataset_hash;
    const fs::path path = fs::path(stem).concat(".meta.json");
    require_fresh(path, force);
    write_text_file(path, meta.dump(2) + "\n");
}

std::string join_args(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) {
            joined += ' ';
        }
        joined += argv[i];
    }
    return joined;
}

struct RunOptions {
    std::vector<std::string> inputs;
    std::string hierarchy_path;
    std::string taxonomy_path;
    std::string levels_text;
    std::string sector_text = "all";
    std::string geo_axis_text = "finest";
    std::string format = "both";
    std::string out_stem;
    std::optional<int> year;
    bool exclude_zero_size = false;
    bool force = false;
    double min_share = 0.0;
    unsigned threads = 1;
};

fs::path stem_for(const RunOptions& options) {
    if (!options.out_stem.empty()) {
        return options.out_stem;
    }
    fs::path stem(options.inputs.front());
    stem.replace_extension();
    return stem;
}

int cmd_run(const RunOptions& options, const std::string& command) {
    const auto hierarchy = synergy::RegionHierarchy::load(options.hierarchy_path);
    const auto taxonomy = load_taxonomy(options.taxonomy_path);
    const auto names = load_names_sidecar(options.hierarchy_path);
    const auto bins = synergy::SizeBins::default_bins();
    const auto levels = parse_levels(hierarchy, options.levels_text);
    const auto geo_axis = parse_geo_axis(hierarchy, options.geo_axis_text);
    const auto filter = parse_sector_filter(options.sector_text);

    synergy::IngestOptions ingest_options;
    ingest_options.year = options.year;
    ingest_options.include_zero_size = !options.exclude_zero_size;
    ingest_options.threads = options.threads;
    auto ingested = synergy::ingest_files(options.inputs, hierarchy, taxonomy, bins,
                                          ingest_options);
    if (ingested.records.empty()) {
        throw Error(ErrorCode::NoValidRecords, "no valid records after exclusions");
    }

    std::vector<synergy::ClassifiedRecord> selected;
    if (filter.active) {
        for (const auto& record : ingested.records) {
            if (sector_match(record, filter)) {
                selected.push_back(record);
            }
        }
        if (selected.empty()) {
            throw Error(ErrorCode::NoValidRecords,
                        "sector filter '" + filter.description + "' selects no records");
        }
    }
    const auto& records = filter.active ? selected : ingested.records;

    auto report = synergy::multilevel_table(records, hierarchy, levels, geo_axis, bins,
                                            options.threads);
    report.metadata.dataset_hash = synergy::hash_files(options.inputs);
    report.metadata.filter_description =
        "sector=" + filter.description +
        (options.year ? " year=" + std::to_string(*options.year) : std::string()) +
        (options.exclude_zero_size ? " zero_size=excluded" : std::string());

    if (filter.active) {
        const auto pooled_all =
            synergy::build_tensor(ingested.records, hierarchy, geo_axis, bins, options.threads);
        const auto t_all = synergy::transmission3(pooled_all);
        synergy::NormalizedNationally normalized;
        normalized.n_sector = records.size();
        normalized.n_all = ingested.records.size();
        normalized.value =
            synergy::sector_normalize(report.t_total, normalized.n_sector, normalized.n_all);
        if (t_all.value() != 0.0) {
            normalized.share_pct = 100.0 * normalized.value.value() / t_all.value() + 0.0;
        }
        report.normalized = normalized;
    }

    const fs::path stem = stem_for(options);
    if (!stem.parent_path().empty()) {
        fs::create_directories(stem.parent_path());
    }
    const bool want_csv = options.format == "csv" || options.format == "both";
    const bool want_json = options.format == "json" || options.format == "both";
    if (options.format != "csv" && options.format != "json" && options.format != "both") {
        throw Error(ErrorCode::InvalidConfig, "unknown format '" + options.format + "'");
    }

    if (want_json) {
        const fs::path path = fs::path(stem).concat(".json");
        require_fresh(path, options.force);
        write_text_file(path, synergy::report_json(report, ingested.report, names));
    }
    if (want_csv) {
        const fs::path levels_path = fs::path(stem).concat(".levels.csv");
        require_fresh(levels_path, options.force);
        std::ostringstream levels_csv;
        synergy::write_levels_csv(report, levels_csv);
        write_text_file(levels_path, levels_csv.str());

        auto ranked = report;
        for (auto& detail : ranked.grouped) {
            detail.groups =
                synergy::rank_regions(std::move(detail.groups), options.min_share,
                                      ranked.n_records);
        }
        const fs::path regions_path = fs::path(stem).concat(".regions.csv");
        require_fresh(regions_path, options.force);
        std::ostringstream regions_csv;
        synergy::write_regions_csv(ranked, names, regions_csv);
        write_text_file(regions_path, regions_csv.str());
    }
    write_meta(stem, options.inputs, report.metadata.dataset_hash, command, options.force);

    std::cout << "records: " << ingested.report.total_read << " read, "
              << ingested.report.total_valid << " valid";
    if (filter.active) {
        std::cout << ", " << records.size() << " in " << filter.description;
    }
    std::cout << "\nT_total: " << synergy::format_mbits(report.t_total) << " mbits\n";
    for (const auto& row : report.rows) {
        std::cout << "  " << row.level << "\t" << synergy::format_mbits(row.row);
        if (row.share_pct) {
            std::cout << "\t" << synergy::format_pct(*row.share_pct) << "%";
        }
        std::cout << "\n";
    }
    if (report.normalized) {
        std::cout << "  normalized nationally\t"
                  << synergy::format_mbits(report.normalized->value) << "\n";
    }
    std::cout << "wrote " << stem.string() << ".*\n";
    return 0;
}

struct ValidateOptions {
    std::vector<std::string> inputs;
    std::string hierarchy_path;
    std::string taxonomy_path;
    std::optional<int> year;
    bool exclude_zero_size = false;
};

int cmd_validate(const ValidateOptions& options) {
    const auto hierarchy = synergy::RegionHierarchy::load(options.hierarchy_path);
    const auto taxonomy = load_taxonomy(options.taxonomy_path);
    const auto bins = synergy::SizeBins::default_bins();
    const auto findings = hierarchy.validate();

    synergy::IngestOptions ingest_options;
    ingest_options.year = options.year;
    ingest_options.include_zero_size = !options.exclude_zero_size;
    const auto ingested =
        synergy::ingest_files(options.inputs, hierarchy, taxonomy, bins, ingest_options);

    std::cout << synergy::exclusion_report_json(ingested.report, findings);
    return findings.empty() ? 0 : 3;
}

struct ExportMapOptions {
    std::string run;
    std::string level;
    std::string out_stem;
    bool force = false;
};

int cmd_export_map(const ExportMapOptions& options) {
    std::string run_path = options.run;
    if (fs::path(run_path).extension() != ".json") {
        run_path += ".json";
    }
    const auto stored = synergy::load_run_json(run_path);
    if (stored.groups.empty()) {
        throw Error(ErrorCode::MissingRun, run_path + ": run has no grouped levels");
    }
    std::string level = options.level.empty() ? stored.groups.front().first : options.level;

    synergy::DecompositionReport report;
    for (const auto& [name, groups] : stored.groups) {
        synergy::LevelDetail detail;
        detail.level = name;
        for (const auto& [region_id, delta_t] : groups) {
            synergy::GroupSynergy group;
            group.group_id = region_id;
            group.delta_t = delta_t;
            detail.groups.push_back(std::move(group));
        }
        report.grouped.push_back(std::move(detail));
    }

    fs::path stem = options.out_stem.empty() ? fs::path(run_path).replace_extension()
                                             : fs::path(options.out_stem);
    const fs::path path = fs::path(stem).concat(".map.csv");
    require_fresh(path, options.force);
    std::ostringstream csv;
    synergy::write_map_csv(report, level, csv);
    write_text_file(path, csv.str());
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

struct GenerateOptions {
    std::string spec_path;
    std::string out_stem;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

int cmd_generate(const GenerateOptions& options, const std::string& command) {
    auto spec = synergy::SynthSpec::from_json_file(options.spec_path);
    if (options.seed) {
        spec.seed = *options.seed;
    }
    const auto records = synergy::generate(spec);

    fs::path stem = options.out_stem.empty() ? fs::path(options.spec_path).replace_extension()
                                             : fs::path(options.out_stem);
    if (!stem.parent_path().empty()) {
        fs::create_directories(stem.parent_path());
    }
    const fs::path csv_path = fs::path(stem).concat(".csv");
    require_fresh(csv_path, options.force);
    std::ostringstream csv;
    synergy::write_records_csv(records, spec.year.has_value(), csv);
    write_text_file(csv_path, csv.str());

    const fs::path hierarchy_path = fs::path(stem).concat(".hierarchy.tsv");
    require_fresh(hierarchy_path, options.force);
    write_text_file(hierarchy_path, synergy::hierarchy_file_text(spec));

    write_meta(stem, {options.spec_path}, synergy::hash_file(csv_path.string()), command,
               options.force);
    std::cout << "wrote " << records.size() << " records to " << csv_path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triple-Helix synergy: signed three-way mutual information over "
                 "geography, firm size and technology class"};
    app.require_subcommand(1);
    const std::string command = join_args(argc, argv);

    RunOptions run_options;
    auto* run = app.add_subcommand("run", "Ingest firm records and decompose synergy by level");
    run->add_option("--input", run_options.inputs, "Input CSV file(s)")
        ->required()
        ->take_all();
    run->add_option("--hierarchy", run_options.hierarchy_path, "Region hierarchy file")
        ->required();
    run->add_option("--taxonomy", run_options.taxonomy_path,
                    "Sector taxonomy file (default: built-in)");
    run->add_option("--levels", run_options.levels_text,
                    "Comma-separated level names (default: all)");
    run->add_option("--sector", run_options.sector_text,
                    "all | high_tech | medium_tech | kis | custom:prefix[,prefix...]");
    run->add_option("--year", run_options.year, "Keep only records with this year");
    run->add_flag("--exclude-zero-size", run_options.exclude_zero_size,
                  "Drop firms with zero employees");
    run->add_flag("--include-zero-size{false}", run_options.exclude_zero_size,
                  "Keep firms with zero employees (default)");
    run->add_option("--format", run_options.format, "csv | json | both (default both)");
    run->add_option("--out", run_options.out_stem, "Output stem (default: first input stem)");
    run->add_flag("--force", run_options.force, "Overwrite existing outputs");
    run->add_option("--geo-axis", run_options.geo_axis_text,
                    "Geography axis: finest | zip | <level name>");
    run->add_option("--min-share", run_options.min_share,
                    "Drop regions below this share of records from the regions table");
    run->add_option("--threads", run_options.threads, "Worker threads (results identical)");

    ValidateOptions validate_options;
    auto* validate = app.add_subcommand("validate",
                                        "Check inputs; report exclusions and hierarchy findings");
    validate->add_option("--input", validate_options.inputs, "Input CSV file(s)")
        ->required()
        ->take_all();
    validate->add_option("--hierarchy", validate_options.hierarchy_path, "Region hierarchy file")
        ->required();
    validate->add_option("--taxonomy", validate_options.taxonomy_path,
                         "Sector taxonomy file (default: built-in)");
    validate->add_option("--year", validate_options.year, "Keep only records with this year");
    validate->add_flag("--exclude-zero-size", validate_options.exclude_zero_size,
                       "Drop firms with zero employees");

    ExportMapOptions map_options;
    auto* export_map =
        app.add_subcommand("export-map", "Export region ΔT with legend buckets from a stored run");
    export_map->add_option("--run", map_options.run, "Run stem or .json path")->required();
    export_map->add_option("--level", map_options.level,
                           "Grouped level to export (default: finest)");
    export_map->add_option("--out", map_options.out_stem, "Output stem (default: run stem)");
    export_map->add_flag("--force", map_options.force, "Overwrite existing outputs");

    GenerateOptions generate_options;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset from a spec");
    generate->add_option("--synth-spec", generate_options.spec_path, "Synthetic spec JSON")
        ->required();
    generate->add_option("--seed", generate_options.seed, "Override the spec's seed");
    generate->add_option("--out", generate_options.out_stem,
                         "Output stem (default: spec stem)");
    generate->add_flag("--force", generate_options.force, "Overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_options, command);
        }
        if (validate->parsed()) {
            return cmd_validate(validate_options);
        }
        if (export_map->parsed()) {
            return cmd_export_map(map_options);
        }
        if (generate->parsed()) {
            return cmd_generate(generate_options, command);
        }
    } catch (const Error& e) {
        std::cerr << "error (" << synergy::to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
