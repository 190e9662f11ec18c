#include "synergy/geo.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace synergy {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

std::string rstrip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    return s;
}

std::vector<std::string> default_level_names(std::size_t count) {
    if (count == 3) {
        return {"subject", "district", "nation"};
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) {
        names.push_back("level" + std::to_string(i + 1));
    }
    return names;
}

} // namespace

RegionHierarchy RegionHierarchy::parse(std::istream& in, const std::string& origin) {
    struct Row {
        std::string prefix;
        std::vector<std::string> chain;
    };
    std::vector<Row> rows;
    std::vector<std::string> level_names;
    std::vector<Violation> violations;

    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = rstrip(line);
        if (line.rfind("#levels\t", 0) == 0) {
            auto fields = split_tabs(line);
            level_names.assign(fields.begin() + 1, fields.end());
            continue;
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() < 2) {
            throw Error(ErrorCode::InvalidHierarchy,
                        origin + ":" + std::to_string(line_no) + ": expected prefix<TAB>region ids");
        }
        Row row;
        row.prefix = fields[0];
        row.chain.assign(fields.begin() + 1, fields.end());
        if (row.prefix.empty()) {
            throw Error(ErrorCode::InvalidHierarchy,
                        origin + ":" + std::to_string(line_no) + ": empty prefix");
        }
        for (const auto& id : row.chain) {
            if (id.empty()) {
                throw Error(ErrorCode::InvalidHierarchy,
                            origin + ":" + std::to_string(line_no) + ": empty region id");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(ErrorCode::InvalidHierarchy, origin + ": no mappings");
    }

    const std::size_t levels = rows.front().chain.size();
    if (levels == 0 || levels > kMaxLevels) {
        throw Error(ErrorCode::InvalidHierarchy, origin + ": unsupported level count");
    }
    for (const Row& row : rows) {
        if (row.chain.size() != levels) {
            throw Error(ErrorCode::InvalidHierarchy,
                        origin + ": inconsistent column count for prefix " + row.prefix);
        }
    }
    if (level_names.empty()) {
        level_names = default_level_names(levels);
    } else if (level_names.size() != levels) {
        throw Error(ErrorCode::InvalidHierarchy, origin + ": #levels arity differs from data");
    }

    RegionHierarchy h;
    h.level_names_ = std::move(level_names);

    // Region id sets per level, sorted so indices are reproducible.
    h.region_ids_.resize(levels);
    h.region_index_.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        std::set<std::string> ids;
        for (const Row& row : rows) {
            ids.insert(row.chain[l]);
        }
        h.region_ids_[l].assign(ids.begin(), ids.end());
        for (std::uint32_t i = 0; i < h.region_ids_[l].size(); ++i) {
            h.region_index_[l].emplace(h.region_ids_[l][i], i);
        }
    }

    // Parent consistency: a region must keep one chain above it everywhere.
    for (std::size_t l = 0; l + 1 < levels; ++l) {
        std::map<std::string, std::string> parent;
        for (const Row& row : rows) {
            auto [it, inserted] = parent.emplace(row.chain[l], row.chain[l + 1]);
            if (!inserted && it->second != row.chain[l + 1]) {
                h.violations_.push_back({"multi-parent", h.level_names_[l] + " '" + row.chain[l] +
                                                             "' under both '" + it->second +
                                                             "' and '" + row.chain[l + 1] + "'"});
            }
        }
    }
    if (h.region_ids_.back().size() > 1) {
        std::string detail = "coarsest level has";
        for (const auto& id : h.region_ids_.back()) {
            detail += " '" + id + "'";
        }
        h.violations_.push_back({"multiple-roots", detail});
    }

    std::set<std::size_t> lengths;
    for (const Row& row : rows) {
        std::vector<std::uint32_t> chain(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            chain[l] = h.region_index_[l].at(row.chain[l]);
        }
        auto [it, inserted] = h.prefix_map_.emplace(row.prefix, std::move(chain));
        if (!inserted) {
            h.violations_.push_back({"duplicate-prefix", "prefix '" + row.prefix + "'"});
        }
        lengths.insert(row.prefix.size());
    }
    h.prefix_lengths_.assign(lengths.rbegin(), lengths.rend());
    return h;
}

RegionHierarchy RegionHierarchy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open hierarchy file " + path);
    }
    return parse(in, path);
}

std::optional<std::size_t> RegionHierarchy::level_index(const std::string& name) const {
    for (std::size_t l = 0; l < level_names_.size(); ++l) {
        if (level_names_[l] == name) {
            return l;
        }
    }
    return std::nullopt;
}

const std::vector<std::string>& RegionHierarchy::regions(std::size_t level) const {
    return region_ids_.at(level);
}

const std::string& RegionHierarchy::region_id(std::size_t level, std::uint32_t index) const {
    return region_ids_.at(level).at(index);
}

std::optional<std::vector<std::uint32_t>> RegionHierarchy::try_resolve(
    const std::string& location_code) const {
    for (const std::size_t length : prefix_lengths_) {
        if (length > location_code.size()) {
            continue;
        }
        auto it = prefix_map_.find(location_code.substr(0, length));
        if (it != prefix_map_.end()) {
            return it->second;
        }
    }
    return std::nullopt;
}

std::vector<std::uint32_t> RegionHierarchy::resolve(const std::string& location_code) const {
    auto chain = try_resolve(location_code);
    if (!chain) {
        throw Error(ErrorCode::UnmappedLocation, "location code '" + location_code + "'");
    }
    return *chain;
}

std::vector<RegionHierarchy::Violation> RegionHierarchy::validate() const {
    return violations_;
}

std::vector<RegionHierarchy::Violation> validate_hierarchy(const RegionHierarchy& hierarchy) {
    return hierarchy.validate();
}

RegionNames RegionNames::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open names file " + path);
    }
    RegionNames names;
    std::string line;
    while (std::getline(in, line)) {
        line = rstrip(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            continue;
        }
        names.names_[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return names;
}

std::optional<std::string> RegionNames::name_of(const std::string& region_id) const {
    auto it = names_.find(region_id);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return it->second;
}

} // namespace synergy
