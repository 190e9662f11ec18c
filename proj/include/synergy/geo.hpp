#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "synergy/errors.hpp"

namespace synergy {

// Nested region levels resolved from location-code prefixes.
//
// File format, one mapping per line (finest region first, nation last):
//   prefix<TAB>subject_id<TAB>district_id<TAB>nation_id
// '#' starts a comment. An optional directive names the levels:
//   #levels<TAB>subject<TAB>district<TAB>nation
// Any number of levels from 1 to 8 is accepted; three columns default to
// subject/district/nation. Prefix lookup is longest-match.
class RegionHierarchy {
public:
    static constexpr std::size_t kMaxLevels = 8;

    static RegionHierarchy load(const std::string& path);
    static RegionHierarchy parse(std::istream& in, const std::string& origin);

    std::size_t level_count() const { return level_names_.size(); }
    const std::vector<std::string>& level_names() const { return level_names_; }
    std::optional<std::size_t> level_index(const std::string& name) const;

    // Region ids at one level, sorted; indices into this vector are the
    // region indices carried by resolved chains.
    const std::vector<std::string>& regions(std::size_t level) const;
    const std::string& region_id(std::size_t level, std::uint32_t index) const;

    // Ancestor chain (region index per level, finest to coarsest) for the
    // longest matching prefix; nullopt when nothing matches.
    std::optional<std::vector<std::uint32_t>> try_resolve(const std::string& location_code) const;

    // Same as try_resolve but throws UnmappedLocation on a miss.
    std::vector<std::uint32_t> resolve(const std::string& location_code) const;

    struct Violation {
        std::string kind; // multi-parent | multiple-roots | duplicate-prefix | orphan
        std::string detail;
    };

    // Structural findings; an empty result means the hierarchy is usable.
    std::vector<Violation> validate() const;

private:
    std::vector<std::string> level_names_;
    std::vector<std::vector<std::string>> region_ids_;                      // per level, sorted
    std::vector<std::unordered_map<std::string, std::uint32_t>> region_index_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> prefix_map_; // prefix -> chain
    std::vector<std::size_t> prefix_lengths_;                                // distinct, descending
    std::vector<Violation> violations_;
};

std::vector<RegionHierarchy::Violation> validate_hierarchy(const RegionHierarchy& hierarchy);

// Optional sidecar with display names: region_id<TAB>name per line.
class RegionNames {
public:
    RegionNames() = default;
    static RegionNames load(const std::string& path);

    std::optional<std::string> name_of(const std::string& region_id) const;

private:
    std::unordered_map<std::string, std::string> names_;
};

} // namespace synergy
