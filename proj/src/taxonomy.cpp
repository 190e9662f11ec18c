#include "synergy/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace synergy {

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

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

std::string strip_comment(const std::string& line) {
    auto hash = line.find('#');
    std::string s = hash == std::string::npos ? line : line.substr(0, hash);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    return s;
}

} // namespace

SizeBins SizeBins::default_bins() {
    return from_upper_bounds({0, 4, 9, 19, 49, 99, 249});
}

SizeBins SizeBins::from_upper_bounds(const std::vector<std::uint64_t>& bounds) {
    if (bounds.empty()) {
        throw Error(ErrorCode::InvalidConfig, "size bins need at least one upper bound");
    }
    SizeBins bins;
    std::uint64_t lower = 0;
    for (const std::uint64_t upper : bounds) {
        if (!bins.upper_bounds_.empty() && upper <= bins.upper_bounds_.back()) {
            throw Error(ErrorCode::InvalidConfig, "size-bin bounds must be strictly increasing");
        }
        bins.upper_bounds_.push_back(upper);
        if (lower == upper) {
            bins.labels_.push_back(std::to_string(lower));
        } else {
            bins.labels_.push_back(std::to_string(lower) + "-" + std::to_string(upper));
        }
        lower = upper + 1;
    }
    bins.labels_.push_back(">" + std::to_string(bounds.back()));
    return bins;
}

SizeBins SizeBins::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open size-bin file " + path);
    }
    std::vector<std::uint64_t> bounds;
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = strip_comment(line);
        if (s.empty()) {
            continue;
        }
        if (!all_digits(s)) {
            throw Error(ErrorCode::InvalidConfig, "bad size-bin bound '" + s + "' in " + path);
        }
        bounds.push_back(std::stoull(s));
    }
    return from_upper_bounds(bounds);
}

std::size_t SizeBins::class_of(std::uint64_t employees) const {
    auto it = std::lower_bound(upper_bounds_.begin(), upper_bounds_.end(), employees);
    return static_cast<std::size_t>(it - upper_bounds_.begin());
}

std::size_t size_class(const SizeBins& bins, std::int64_t employees) {
    if (employees < 0) {
        throw Error(ErrorCode::NegativeEmployees,
                    "employee count " + std::to_string(employees));
    }
    return bins.class_of(static_cast<std::uint64_t>(employees));
}

NaceCode::NaceCode(std::string digits) : digits_(std::move(digits)) {
    if (digits_.size() < 2 || digits_.size() > 4 || !all_digits(digits_)) {
        throw Error(ErrorCode::MalformedCode, "NACE code '" + digits_ + "'");
    }
    if (digits_[0] == '0' && digits_[1] == '0') {
        throw Error(ErrorCode::MalformedCode, "NACE division 00");
    }
}

std::optional<NaceCode> NaceCode::parse(std::string digits) {
    try {
        return NaceCode(std::move(digits));
    } catch (const Error&) {
        return std::nullopt;
    }
}

const char* to_string(Sector sector) {
    switch (sector) {
        case Sector::HighTech: return "HighTech";
        case Sector::MediumHighTech: return "MediumHighTech";
        case Sector::Kis: return "KIS";
        case Sector::Other: return "Other";
    }
    return "?";
}

std::optional<Sector> sector_from_string(const std::string& name) {
    if (name == "HighTech") return Sector::HighTech;
    if (name == "MediumHighTech") return Sector::MediumHighTech;
    if (name == "KIS") return Sector::Kis;
    if (name == "Other") return Sector::Other;
    return std::nullopt;
}

SectorTaxonomy::SectorTaxonomy(std::vector<Rule> rules) : rules_(std::move(rules)) {
    // Longest prefix first; equal lengths keep file order.
    std::stable_sort(rules_.begin(), rules_.end(),
                     [](const Rule& a, const Rule& b) { return a.prefix.size() > b.prefix.size(); });
    for (const Rule& rule : rules_) {
        if (!all_digits(rule.prefix)) {
            throw Error(ErrorCode::InvalidConfig, "non-digit taxonomy prefix '" + rule.prefix + "'");
        }
    }
}

SectorTaxonomy SectorTaxonomy::default_taxonomy() {
    std::vector<Rule> rules;
    auto include = [&rules](const char* prefix, Sector sector, bool hts = false) {
        rules.push_back({prefix, sector, true, hts});
    };
    auto exclude = [&rules](const char* prefix) {
        rules.push_back({prefix, Sector::Other, false, false});
    };

    // High-tech manufacturing: pharma, computers/electronics/optics,
    // air and spacecraft.
    include("21", Sector::HighTech);
    include("26", Sector::HighTech);
    include("303", Sector::HighTech);

    // Medium-high-tech manufacturing. Division 30 minus shipbuilding
    // (30.1) and minus air/spacecraft (30.3, claimed above by high-tech).
    include("20", Sector::MediumHighTech);
    include("254", Sector::MediumHighTech);
    include("27", Sector::MediumHighTech);
    include("28", Sector::MediumHighTech);
    include("29", Sector::MediumHighTech);
    include("30", Sector::MediumHighTech);
    exclude("301");
    include("325", Sector::MediumHighTech);

    // Knowledge-intensive services; 59-63 and 72 are high-tech services.
    static const char* kKis[] = {"50", "51", "58", "64", "65", "66", "69", "70", "71",
                                 "73", "74", "75", "78", "80", "84", "85", "86", "87",
                                 "88", "90", "91", "92", "93"};
    static const char* kKisHighTech[] = {"59", "60", "61", "62", "63", "72"};
    for (const char* division : kKis) {
        include(division, Sector::Kis);
    }
    for (const char* division : kKisHighTech) {
        include(division, Sector::Kis, true);
    }

    return SectorTaxonomy(std::move(rules));
}

SectorTaxonomy SectorTaxonomy::parse(std::istream& in, const std::string& origin) {
    std::vector<Rule> rules;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = strip_comment(line);
        if (s.empty()) {
            continue;
        }
        const auto fields = split_tabs(s);
        if (fields.size() < 3 || fields.size() > 4) {
            throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) +
                                                      ": expected prefix<TAB>label<TAB>include|exclude");
        }
        Rule rule;
        rule.prefix = fields[0];
        const auto sector = sector_from_string(fields[1]);
        if (!sector) {
            throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) +
                                                      ": unknown sector label '" + fields[1] + "'");
        }
        rule.sector = *sector;
        if (fields[2] == "include") {
            rule.include = true;
        } else if (fields[2] == "exclude") {
            rule.include = false;
        } else {
            throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) +
                                                      ": flag must be include or exclude");
        }
        if (fields.size() == 4) {
            if (fields[3] != "hts") {
                throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) +
                                                          ": unknown marker '" + fields[3] + "'");
            }
            rule.high_tech_services = true;
        }
        rules.push_back(std::move(rule));
    }
    return SectorTaxonomy(std::move(rules));
}

SectorTaxonomy SectorTaxonomy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open taxonomy file " + path);
    }
    return parse(in, path);
}

SectorLabel SectorTaxonomy::classify(const NaceCode& code) const {
    const std::string& digits = code.digits();
    for (const Rule& rule : rules_) {
        if (digits.compare(0, rule.prefix.size(), rule.prefix) == 0) {
            if (!rule.include) {
                return {Sector::Other, false};
            }
            return {rule.sector, rule.high_tech_services};
        }
    }
    return {Sector::Other, false};
}

SectorLabel sector_of(const NaceCode& code, const SectorTaxonomy& taxonomy) {
    return taxonomy.classify(code);
}

} // namespace synergy
