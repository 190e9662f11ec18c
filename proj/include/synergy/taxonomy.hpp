#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synergy/errors.hpp"

namespace synergy {

// Employee-count bins. The default partitions the non-negative integers
// into eight classes: 0, 1-4, 5-9, 10-19, 20-49, 50-99, 100-249, >249.
class SizeBins {
public:
    static SizeBins default_bins();

    // Bins from ordered inclusive upper bounds, e.g. {0,4,9,19,49,99,249};
    // a final open-ended class is always appended.
    static SizeBins from_upper_bounds(const std::vector<std::uint64_t>& bounds);

    // One bound per line, '#' comments allowed.
    static SizeBins load(const std::string& path);

    std::size_t class_count() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t bin) const { return labels_.at(bin); }

    std::size_t class_of(std::uint64_t employees) const;

private:
    std::vector<std::uint64_t> upper_bounds_; // inclusive, one per closed bin
    std::vector<std::string> labels_;         // closed bins + final ">last"
};

// Throws NegativeEmployees; kept for signed call sites (parsers reject
// negatives earlier, so this mostly guards direct library use).
std::size_t size_class(const SizeBins& bins, std::int64_t employees);

// NACE Rev. 2 code: 2-4 decimal digits, division = first two.
class NaceCode {
public:
    // Throws MalformedCode for non-digits, wrong length, or division 00.
    explicit NaceCode(std::string digits);

    static std::optional<NaceCode> parse(std::string digits);

    const std::string& digits() const { return digits_; }
    std::string division() const { return digits_.substr(0, 2); }
    std::string subclass() const { return digits_.size() > 2 ? digits_.substr(2) : std::string(); }

private:
    std::string digits_;
};

enum class Sector { HighTech, MediumHighTech, Kis, Other };

const char* to_string(Sector sector);
std::optional<Sector> sector_from_string(const std::string& name);

struct SectorLabel {
    Sector sector = Sector::Other;
    bool high_tech_services = false; // KIS subset flag
};

// Prefix-rule classification of NACE codes into sectors. The longest
// matching prefix wins; a matching exclude rule sends the code to Other.
class SectorTaxonomy {
public:
    struct Rule {
        std::string prefix;
        Sector sector = Sector::Other;
        bool include = true;
        bool high_tech_services = false;
    };

    static SectorTaxonomy default_taxonomy();

    // Line format: prefix<TAB>label<TAB>include|exclude[<TAB>hts]
    // Labels: HighTech, MediumHighTech, KIS, Other. '#' comments allowed.
    static SectorTaxonomy load(const std::string& path);
    static SectorTaxonomy parse(std::istream& in, const std::string& origin);

    const std::vector<Rule>& rules() const { return rules_; }

    SectorLabel classify(const NaceCode& code) const;

private:
    explicit SectorTaxonomy(std::vector<Rule> rules);

    std::vector<Rule> rules_; // sorted by prefix length, longest first
};

SectorLabel sector_of(const NaceCode& code, const SectorTaxonomy& taxonomy);

} // namespace synergy
