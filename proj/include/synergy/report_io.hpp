#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synergy/decomposition.hpp"
#include "synergy/geo.hpp"
#include "synergy/ingest.hpp"

namespace synergy {

// Display conventions: mbits at one decimal, percentages at one decimal,
// machine formats (JSON, map export) at full precision. Data files carry
// no timestamps so identical runs serialize byte-identically.

std::string format_mbits(Mbits value);                       // "%.1f"
std::string format_pct(double value, int decimals = 1);
std::string format_full(double value);                       // round-trip precision
std::string format_percent_of(std::uint64_t part, std::uint64_t whole, int decimals);

// FNV-1a 64 over raw file bytes; "fnv1a64:<hex>". Throws IoError.
std::string hash_file(const std::string& path);
std::string hash_files(const std::vector<std::string>& paths);

// Choropleth legend buckets for delta-T values, boundaries assigned to the
// more-negative bucket:
//   0: > 0   1: (-10, 0]   2: (-25, -10]   3: (-50, -25]
//   4: (-100, -50]   5: (-200, -100]   6: <= -200
int map_bucket(Mbits delta_t);

void write_levels_csv(const DecompositionReport& report, std::ostream& out);
void write_regions_csv(const DecompositionReport& report, const RegionNames& names,
                       std::ostream& out);
void write_map_csv(const DecompositionReport& report, const std::string& level,
                   std::ostream& out);

std::string exclusion_report_json(const ExclusionReport& report,
                                  const std::vector<RegionHierarchy::Violation>& findings);

std::string report_json(const DecompositionReport& report, const ExclusionReport& exclusions,
                        const RegionNames& names);

// Reload the per-region table of a stored report for map export.
struct StoredRun {
    std::vector<std::string> levels;
    // level -> (region id, delta_t) pairs
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, Mbits>>>> groups;
};

StoredRun load_run_json(const std::string& path); // throws MissingRun / IoError

} // namespace synergy
