#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synergy/geo.hpp"
#include "synergy/taxonomy.hpp"
#include "synergy/tensor.hpp"

namespace synergy {

// Input CSV schema: header `firm_id,zip,employees,nace[,year]`, UTF-8,
// comma-separated, no quoting. Columns are located by header name; extra
// columns are ignored.

struct RawRecord {
    std::uint64_t line = 0; // 1-based line number in the source file
    std::string firm_id;
    std::string location_code;
    std::string employees;
    std::string nace;
    std::string year;
};

struct FirmRecord {
    std::string firm_id;
    std::string location_code;
    std::uint64_t employees = 0;
    std::string nace; // validated 2-4 digit code
    std::optional<int> year;
};

// Exclusion reasons, in the order checks run. A record is excluded for the
// first failing check only.
enum class ExclusionReason {
    MalformedLine,    // wrong field count
    FilteredYear,     // year filter active and the row is outside it
    DuplicateId,      // firm_id already seen (first occurrence wins)
    MissingLocation,  // empty location field
    UnmappedLocation, // no hierarchy prefix matches
    MissingSize,      // employees missing or not a non-negative integer
    BadNace,          // NACE code malformed
    FilteredZeroSize, // zero-employee class excluded by configuration
};

const char* to_string(ExclusionReason reason);

struct ExclusionReport {
    std::uint64_t total_read = 0;
    std::uint64_t total_valid = 0;
    std::map<std::string, std::uint64_t> reasons; // reason name -> count

    void count(ExclusionReason reason) { ++reasons[to_string(reason)]; }
    std::uint64_t excluded() const;
    double validity_pct() const; // 100 * valid / read, 0 when nothing read
};

struct ClassifiedRecord {
    FirmRecord firm;
    std::vector<std::uint32_t> chain; // region index per hierarchy level
    std::uint32_t size_bin = 0;
    std::string division; // two-digit NACE division
    SectorLabel sector;
};

struct IngestOptions {
    std::optional<int> year;       // keep only rows with this year
    bool include_zero_size = true; // drop employees == 0 when false
    unsigned threads = 1;          // classification parallelism
};

// Streaming parse: on_record per data row, on_diagnostic for lines whose
// field count does not match the header. Throws IoError / HeaderMismatch.
struct ParseDiagnostic {
    std::uint64_t line = 0;
    std::string message;
};

void parse_records(std::istream& in, const std::string& origin,
                   const std::function<void(RawRecord&&)>& on_record,
                   const std::function<void(ParseDiagnostic&&)>& on_diagnostic);

// Convenience wrapper collecting everything in memory.
std::pair<std::vector<RawRecord>, std::vector<ParseDiagnostic>>
parse_records_file(const std::string& path);

// One record through the fixed check order: year filter, location, size,
// nace, zero-size filter. Malformed lines and duplicate ids are pipeline
// concerns (see ingest_file).
struct ClassifyOutcome {
    std::optional<ClassifiedRecord> record;
    std::optional<ExclusionReason> reason;
};

ClassifyOutcome validate_and_classify(const RawRecord& raw, const RegionHierarchy& hierarchy,
                                      const SectorTaxonomy& taxonomy, const SizeBins& bins,
                                      const IngestOptions& options = {});

struct IngestResult {
    std::vector<ClassifiedRecord> records;
    ExclusionReport report;
};

// Full pipeline: parse, filter by year, drop duplicate ids (across all
// files), validate and classify. Exclusions are data, never errors; only
// IoError and HeaderMismatch throw.
IngestResult ingest_files(const std::vector<std::string>& paths,
                          const RegionHierarchy& hierarchy, const SectorTaxonomy& taxonomy,
                          const SizeBins& bins, const IngestOptions& options = {});

IngestResult ingest_file(const std::string& path, const RegionHierarchy& hierarchy,
                         const SectorTaxonomy& taxonomy, const SizeBins& bins,
                         const IngestOptions& options = {});

// Geography category choice for tensor axes: a hierarchy level, or the raw
// location code.
struct GeoAxis {
    bool raw_location = false;
    std::size_t level = 0;

    static GeoAxis zip() { return {true, 0}; }
    static GeoAxis at_level(std::size_t level) { return {false, level}; }
};

// Count tensor over (geo category, size class, NACE division). Axis labels
// enumerate only observed categories, sorted (size classes in bin order).
ContingencyTensor build_tensor(std::span<const ClassifiedRecord> records,
                               const RegionHierarchy& hierarchy, GeoAxis geo_axis,
                               const SizeBins& bins, unsigned threads = 1);

} // namespace synergy
