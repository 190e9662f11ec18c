#include "synergy/report_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "json.hpp"

namespace synergy {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string quoted = "\"";
    for (const char c : value) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string format_double(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

ordered_json exclusions_json(const ExclusionReport& report) {
    ordered_json node;
    node["total_read"] = report.total_read;
    node["total_valid"] = report.total_valid;
    node["validity_pct"] = report.validity_pct();
    ordered_json reasons = ordered_json::object();
    for (const auto& [reason, count] : report.reasons) {
        reasons[reason] = count;
    }
    node["excluded"] = std::move(reasons);
    return node;
}

ordered_json group_json(const GroupSynergy& group, const RegionNames& names) {
    ordered_json node;
    node["region_id"] = group.group_id;
    if (const auto name = names.name_of(group.group_id)) {
        node["region_name"] = *name;
    } else {
        node["region_name"] = nullptr;
    }
    node["n"] = group.n;
    node["t_g_mbits"] = group.t_g.value();
    node["delta_t_mbits"] = group.delta_t.value();
    if (group.share_pct) {
        node["share_pct"] = *group.share_pct;
    } else {
        node["share_pct"] = nullptr;
    }
    return node;
}

} // namespace

std::string format_mbits(Mbits value) { return format_double(value.value(), 1); }

std::string format_pct(double value, int decimals) { return format_double(value, decimals); }

std::string format_full(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

std::string format_percent_of(std::uint64_t part, std::uint64_t whole, int decimals) {
    const double pct =
        whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
    return format_double(pct, decimals);
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void hash_stream(std::istream& in, std::uint64_t& hash) {
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof buffer);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= kFnvPrime;
        }
    }
}

std::string hash_to_string(std::uint64_t hash) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

} // namespace

std::string hash_file(const std::string& path) { return hash_files({path}); }

std::string hash_files(const std::vector<std::string>& paths) {
    std::uint64_t hash = kFnvOffset;
    for (const std::string& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open " + path + " for hashing");
        }
        hash_stream(in, hash);
        if (in.bad()) {
            throw Error(ErrorCode::IoError, "read failure hashing " + path);
        }
    }
    return hash_to_string(hash);
}

int map_bucket(Mbits delta_t) {
    const double v = delta_t.value();
    if (v > 0.0) {
        return 0;
    }
    if (v > -10.0) {
        return 1;
    }
    if (v > -25.0) {
        return 2;
    }
    if (v > -50.0) {
        return 3;
    }
    if (v > -100.0) {
        return 4;
    }
    if (v > -200.0) {
        return 5;
    }
    return 6;
}

void write_levels_csv(const DecompositionReport& report, std::ostream& out) {
    out << "level,increment_mbits,share_pct\n";
    for (const LevelRow& row : report.rows) {
        out << row.level << ',' << format_mbits(row.row) << ',';
        if (row.share_pct) {
            out << format_pct(*row.share_pct);
        }
        out << '\n';
    }
    out << "total," << format_mbits(report.t_total) << ',';
    if (!report.shares_suppressed) {
        out << format_pct(100.0);
    }
    out << '\n';
    if (report.normalized) {
        out << "normalized_nationally," << format_mbits(report.normalized->value) << ',';
        if (report.normalized->share_pct) {
            out << format_pct(*report.normalized->share_pct);
        }
        out << '\n';
    }
}

void write_regions_csv(const DecompositionReport& report, const RegionNames& names,
                       std::ostream& out) {
    out << "level,region_id,region_name,n,t_g_mbits,delta_t_mbits,share_pct\n";
    for (const LevelDetail& detail : report.grouped) {
        for (const GroupSynergy& group : detail.groups) {
            out << detail.level << ',' << group.group_id << ',';
            if (const auto name = names.name_of(group.group_id)) {
                out << csv_field(*name);
            }
            out << ',' << group.n << ',' << format_full(group.t_g.value()) << ','
                << format_full(group.delta_t.value()) << ',';
            if (group.share_pct) {
                out << format_full(*group.share_pct);
            }
            out << '\n';
        }
    }
}

void write_map_csv(const DecompositionReport& report, const std::string& level,
                   std::ostream& out) {
    const LevelDetail* match = nullptr;
    for (const LevelDetail& detail : report.grouped) {
        if (detail.level == level) {
            match = &detail;
        }
    }
    if (match == nullptr) {
        throw Error(ErrorCode::InvalidConfig, "no grouped level '" + level + "' in this run");
    }
    out << "region_id,delta_t_mbits,bucket\n";
    for (const GroupSynergy& group : match->groups) {
        out << group.group_id << ',' << format_full(group.delta_t.value()) << ','
            << map_bucket(group.delta_t) << '\n';
    }
}

std::string exclusion_report_json(const ExclusionReport& report,
                                  const std::vector<RegionHierarchy::Violation>& findings) {
    ordered_json node = exclusions_json(report);
    ordered_json list = ordered_json::array();
    for (const auto& finding : findings) {
        list.push_back({{"kind", finding.kind}, {"detail", finding.detail}});
    }
    node["hierarchy_findings"] = std::move(list);
    return node.dump(2) + "\n";
}

std::string report_json(const DecompositionReport& report, const ExclusionReport& exclusions,
                        const RegionNames& names) {
    ordered_json root;
    root["t_total_mbits"] = report.t_total.value();
    root["n_records"] = report.n_records;
    root["levels"] = report.levels;
    root["shares_suppressed"] = report.shares_suppressed;

    ordered_json rows = ordered_json::array();
    for (const LevelRow& row : report.rows) {
        ordered_json node;
        node["level"] = row.level;
        node["increment_mbits"] = row.row.value();
        if (row.share_pct) {
            node["share_pct"] = *row.share_pct;
        } else {
            node["share_pct"] = nullptr;
        }
        rows.push_back(std::move(node));
    }
    root["rows"] = std::move(rows);

    ordered_json grouped = ordered_json::array();
    for (const LevelDetail& detail : report.grouped) {
        ordered_json node;
        node["level"] = detail.level;
        node["in_group_sum_mbits"] = detail.in_group_sum.value();
        node["t0_mbits"] = detail.t0.value();
        ordered_json groups = ordered_json::array();
        for (const GroupSynergy& group : detail.groups) {
            groups.push_back(group_json(group, names));
        }
        node["groups"] = std::move(groups);
        grouped.push_back(std::move(node));
    }
    root["grouped"] = std::move(grouped);

    if (report.normalized) {
        ordered_json node;
        node["value_mbits"] = report.normalized->value.value();
        node["n_sector"] = report.normalized->n_sector;
        node["n_all"] = report.normalized->n_all;
        if (report.normalized->share_pct) {
            node["share_pct"] = *report.normalized->share_pct;
        } else {
            node["share_pct"] = nullptr;
        }
        root["normalized_nationally"] = std::move(node);
    } else {
        root["normalized_nationally"] = nullptr;
    }

    ordered_json small_groups = ordered_json::array();
    for (const SmallGroupWarning& warning : report.small_groups) {
        small_groups.push_back(
            {{"level", warning.level}, {"region_id", warning.group_id}, {"n", warning.n}});
    }
    root["small_groups"] = std::move(small_groups);

    root["exclusions"] = exclusions_json(exclusions);

    ordered_json metadata;
    metadata["dataset_hash"] = report.metadata.dataset_hash;
    metadata["filter"] = report.metadata.filter_description;
    metadata["geo_axis"] = report.metadata.geo_axis;
    metadata["levels"] = report.metadata.levels;
    metadata["axis_summary"] = report.metadata.axis_summary;
    root["metadata"] = std::move(metadata);

    return root.dump(2) + "\n";
}

StoredRun load_run_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingRun, "no stored run at " + path);
    }
    ordered_json root;
    try {
        root = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MissingRun, path + ": not a stored run: " + e.what());
    }
    try {
        StoredRun run;
        run.levels = root.at("levels").get<std::vector<std::string>>();
        for (const auto& detail : root.at("grouped")) {
            std::vector<std::pair<std::string, Mbits>> groups;
            for (const auto& group : detail.at("groups")) {
                groups.emplace_back(group.at("region_id").get<std::string>(),
                                    Mbits(group.at("delta_t_mbits").get<double>()));
            }
            run.groups.emplace_back(detail.at("level").get<std::string>(), std::move(groups));
        }
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MissingRun, path + ": not a stored run: " + e.what());
    }
}

} // namespace synergy
