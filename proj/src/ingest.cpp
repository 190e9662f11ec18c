#include "synergy/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <thread>
#include <unordered_set>

namespace synergy {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<int> parse_year(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

} // namespace

const char* to_string(ExclusionReason reason) {
    switch (reason) {
    case ExclusionReason::MalformedLine: return "malformed_line";
    case ExclusionReason::FilteredYear: return "filtered_year";
    case ExclusionReason::DuplicateId: return "duplicate_id";
    case ExclusionReason::MissingLocation: return "missing_location";
    case ExclusionReason::UnmappedLocation: return "unmapped_location";
    case ExclusionReason::MissingSize: return "missing_size";
    case ExclusionReason::BadNace: return "bad_nace";
    case ExclusionReason::FilteredZeroSize: return "filtered_zero_size";
    }
    return "unknown";
}

std::uint64_t ExclusionReport::excluded() const {
    std::uint64_t sum = 0;
    for (const auto& [reason, count] : reasons) {
        sum += count;
    }
    return sum;
}

double ExclusionReport::validity_pct() const {
    if (total_read == 0) {
        return 0.0;
    }
    return 100.0 * static_cast<double>(total_valid) / static_cast<double>(total_read);
}

void parse_records(std::istream& in, const std::string& origin,
                   const std::function<void(RawRecord&&)>& on_record,
                   const std::function<void(ParseDiagnostic&&)>& on_diagnostic) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::HeaderMismatch, origin + ": empty file, header expected");
    }
    auto header = split_csv(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        return std::nullopt;
    };
    auto require = [&](const std::string& name) {
        auto idx = column(name);
        if (!idx) {
            throw Error(ErrorCode::HeaderMismatch, origin + ": missing column '" + name + "'");
        }
        return *idx;
    };
    const std::size_t col_id = require("firm_id");
    const std::size_t col_zip = require("zip");
    const std::size_t col_emp = require("employees");
    const std::size_t col_nace = require("nace");
    const std::optional<std::size_t> col_year = column("year");

    std::uint64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            on_diagnostic({line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size())});
            continue;
        }
        RawRecord raw;
        raw.line = line_no;
        raw.firm_id = fields[col_id];
        raw.location_code = fields[col_zip];
        raw.employees = fields[col_emp];
        raw.nace = fields[col_nace];
        if (col_year) {
            raw.year = fields[*col_year];
        }
        on_record(std::move(raw));
    }
    if (in.bad()) {
        throw Error(ErrorCode::IoError, origin + ": read failure");
    }
}

std::pair<std::vector<RawRecord>, std::vector<ParseDiagnostic>>
parse_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open input file " + path);
    }
    std::vector<RawRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
    parse_records(
        in, path, [&](RawRecord&& raw) { records.push_back(std::move(raw)); },
        [&](ParseDiagnostic&& diag) { diagnostics.push_back(std::move(diag)); });
    return {std::move(records), std::move(diagnostics)};
}

ClassifyOutcome validate_and_classify(const RawRecord& raw, const RegionHierarchy& hierarchy,
                                      const SectorTaxonomy& taxonomy, const SizeBins& bins,
                                      const IngestOptions& options) {
    const std::optional<int> year = parse_year(raw.year);
    if (options.year && (!year || *year != *options.year)) {
        return {std::nullopt, ExclusionReason::FilteredYear};
    }
    if (raw.location_code.empty()) {
        return {std::nullopt, ExclusionReason::MissingLocation};
    }
    auto chain = hierarchy.try_resolve(raw.location_code);
    if (!chain) {
        return {std::nullopt, ExclusionReason::UnmappedLocation};
    }
    const std::optional<std::uint64_t> employees = parse_u64(raw.employees);
    if (!employees) {
        return {std::nullopt, ExclusionReason::MissingSize};
    }
    auto nace = NaceCode::parse(raw.nace);
    if (!nace) {
        return {std::nullopt, ExclusionReason::BadNace};
    }
    if (!options.include_zero_size && *employees == 0) {
        return {std::nullopt, ExclusionReason::FilteredZeroSize};
    }
    ClassifiedRecord record;
    record.firm = {raw.firm_id, raw.location_code, *employees, nace->digits(), year};
    record.chain = std::move(*chain);
    record.size_bin = size_class(bins, static_cast<std::int64_t>(*employees));
    record.division = nace->division();
    record.sector = taxonomy.classify(*nace);
    return {std::move(record), std::nullopt};
}

IngestResult ingest_files(const std::vector<std::string>& paths,
                          const RegionHierarchy& hierarchy, const SectorTaxonomy& taxonomy,
                          const SizeBins& bins, const IngestOptions& options) {
    IngestResult result;
    std::unordered_set<std::string> seen_ids;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open input file " + path);
        }
        parse_records(
            in, path,
            [&](RawRecord&& raw) {
                ++result.report.total_read;
                if (options.year) {
                    const std::optional<int> year = parse_year(raw.year);
                    if (!year || *year != *options.year) {
                        result.report.count(ExclusionReason::FilteredYear);
                        return;
                    }
                }
                if (!seen_ids.insert(raw.firm_id).second) {
                    result.report.count(ExclusionReason::DuplicateId);
                    return;
                }
                auto outcome = validate_and_classify(raw, hierarchy, taxonomy, bins, options);
                if (outcome.reason) {
                    result.report.count(*outcome.reason);
                    return;
                }
                ++result.report.total_valid;
                result.records.push_back(std::move(*outcome.record));
            },
            [&](ParseDiagnostic&&) {
                ++result.report.total_read;
                result.report.count(ExclusionReason::MalformedLine);
            });
    }
    return result;
}

IngestResult ingest_file(const std::string& path, const RegionHierarchy& hierarchy,
                         const SectorTaxonomy& taxonomy, const SizeBins& bins,
                         const IngestOptions& options) {
    return ingest_files({path}, hierarchy, taxonomy, bins, options);
}

ContingencyTensor build_tensor(std::span<const ClassifiedRecord> records,
                               const RegionHierarchy& hierarchy, GeoAxis geo_axis,
                               const SizeBins& bins, unsigned threads) {
    if (records.empty()) {
        throw Error(ErrorCode::NoValidRecords, "no records to tabulate");
    }

    auto geo_label = [&](const ClassifiedRecord& r) -> const std::string& {
        if (geo_axis.raw_location) {
            return r.firm.location_code;
        }
        return hierarchy.region_id(geo_axis.level, r.chain.at(geo_axis.level));
    };

    std::set<std::string> geo_seen;
    std::set<std::uint32_t> size_seen;
    std::set<std::string> div_seen;
    for (const ClassifiedRecord& r : records) {
        geo_seen.insert(geo_label(r));
        size_seen.insert(r.size_bin);
        div_seen.insert(r.division);
    }

    std::vector<std::string> size_labels;
    std::vector<std::uint32_t> size_index(bins.class_count(),
                                          std::numeric_limits<std::uint32_t>::max());
    for (const std::uint32_t bin : size_seen) {
        size_index[bin] = static_cast<std::uint32_t>(size_labels.size());
        size_labels.push_back(bins.label(bin));
    }

    std::array<CategoryAxis, 3> axes{
        CategoryAxis(AxisId::Geography,
                     std::vector<std::string>(geo_seen.begin(), geo_seen.end())),
        CategoryAxis(AxisId::Size, std::move(size_labels)),
        CategoryAxis(AxisId::Technology,
                     std::vector<std::string>(div_seen.begin(), div_seen.end()))};

    std::map<std::string, std::uint32_t> geo_index;
    for (std::uint32_t i = 0; i < axes[0].cardinality(); ++i) {
        geo_index.emplace(axes[0].label(i), i);
    }
    std::map<std::string, std::uint32_t> div_index;
    for (std::uint32_t i = 0; i < axes[2].cardinality(); ++i) {
        div_index.emplace(axes[2].label(i), i);
    }

    auto count_range = [&](std::size_t begin, std::size_t end) {
        ContingencyTensor::Builder builder(axes);
        for (std::size_t i = begin; i < end; ++i) {
            const ClassifiedRecord& r = records[i];
            builder.add({geo_index.at(geo_label(r)), size_index[r.size_bin],
                         div_index.at(r.division)});
        }
        return builder;
    };

    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(records.size())));
    if (workers == 1) {
        return std::move(count_range(0, records.size())).build();
    }

    std::vector<ContingencyTensor::Builder> partials(workers, ContingencyTensor::Builder(axes));
    std::vector<std::thread> pool;
    const std::size_t chunk = (records.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        const std::size_t end = std::min(records.size(), begin + chunk);
        pool.emplace_back([&, w, begin, end] { partials[w] = count_range(begin, end); });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    ContingencyTensor::Builder merged(axes);
    for (const auto& partial : partials) {
        merged.merge(partial);
    }
    return std::move(merged).build();
}

} // namespace synergy
