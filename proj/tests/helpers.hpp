#pragma once

// Shared test scaffolding: temp files, tensor construction shorthand and
// randomized fixtures. Fixtures are seeded; a failing case reproduces from
// the seed printed by doctest.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synergy/errors.hpp"
#include "synergy/geo.hpp"
#include "synergy/ingest.hpp"
#include "synergy/tensor.hpp"

// Asserts that an expression throws synergy::Error with the given code.
#ifdef DOCTEST_LIBRARY_INCLUDED
#define CHECK_THROWS_CODE(expr, expected_code)                                 \
    do {                                                                       \
        bool thrown_ = false;                                                  \
        try {                                                                  \
            (void)(expr);                                                      \
        } catch (const synergy::Error& caught_) {                              \
            thrown_ = true;                                                    \
            CHECK(caught_.code() == synergy::ErrorCode::expected_code);        \
        }                                                                      \
        CHECK_MESSAGE(thrown_, #expr " did not throw");                        \
    } while (0)
#endif

namespace testutil {

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path() / "synergy-test-XXXXXX";
        std::string templ = base.string();
        if (::mkdtemp(templ.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::vector<std::string> numbered_labels(const char* stem, std::uint32_t n) {
    std::vector<std::string> labels;
    for (std::uint32_t i = 0; i < n; ++i) {
        labels.push_back(stem + std::to_string(i));
    }
    return labels;
}

// Tensor over g<n0> x s<n1> x t<n2> with the given cells.
inline synergy::ContingencyTensor
make_tensor(std::uint32_t n0, std::uint32_t n1, std::uint32_t n2,
            const std::map<synergy::CellIndex, synergy::Count>& cells) {
    std::array<synergy::CategoryAxis, 3> axes{
        synergy::CategoryAxis(synergy::AxisId::Geography, numbered_labels("g", n0)),
        synergy::CategoryAxis(synergy::AxisId::Size, numbered_labels("s", n1)),
        synergy::CategoryAxis(synergy::AxisId::Technology, numbered_labels("t", n2))};
    return synergy::ContingencyTensor::from_cells(std::move(axes), cells);
}

// Random sparse tensor; at least one positive cell.
inline synergy::ContingencyTensor random_tensor(std::mt19937_64& rng, std::uint32_t max_card = 5,
                                                synergy::Count max_count = 9) {
    std::uniform_int_distribution<std::uint32_t> card(1, max_card);
    const std::uint32_t n0 = card(rng);
    const std::uint32_t n1 = card(rng);
    const std::uint32_t n2 = card(rng);
    std::uniform_int_distribution<synergy::Count> count(0, max_count);
    std::map<synergy::CellIndex, synergy::Count> cells;
    for (std::uint32_t g = 0; g < n0; ++g) {
        for (std::uint32_t s = 0; s < n1; ++s) {
            for (std::uint32_t t = 0; t < n2; ++t) {
                const synergy::Count c = count(rng);
                if (c > 0) {
                    cells[{g, s, t}] = c;
                }
            }
        }
    }
    if (cells.empty()) {
        cells[{0, 0, 0}] = 1;
    }
    return make_tensor(n0, n1, n2, cells);
}

// Random dataset: a hierarchy of `zips` codes spread over `subjects`
// subjects and `districts` districts, plus classified records drawn
// uniformly over zips, size bins and divisions.
struct Dataset {
    synergy::RegionHierarchy hierarchy;
    std::vector<synergy::ClassifiedRecord> records;
};

inline Dataset random_dataset(std::mt19937_64& rng, std::uint32_t zips, std::uint32_t subjects,
                              std::uint32_t districts, std::uint32_t size_bins,
                              std::uint32_t divisions, std::size_t n_records) {
    std::ostringstream text;
    for (std::uint32_t z = 0; z < zips; ++z) {
        const std::uint32_t subject = z % subjects;
        const std::uint32_t district = subject % districts;
        text << 1000 + z << "\tS" << subject << "\tD" << district << "\tN\n";
    }
    std::istringstream in(text.str());
    Dataset dataset{synergy::RegionHierarchy::parse(in, "random_dataset"), {}};

    std::uniform_int_distribution<std::uint32_t> zip(0, zips - 1);
    std::uniform_int_distribution<std::uint32_t> bin(0, size_bins - 1);
    std::uniform_int_distribution<std::uint32_t> division(0, divisions - 1);
    for (std::size_t i = 0; i < n_records; ++i) {
        synergy::ClassifiedRecord record;
        record.firm.firm_id = "F" + std::to_string(i);
        record.firm.location_code = std::to_string(1000 + zip(rng));
        record.firm.employees = 1;
        char div[4];
        std::snprintf(div, sizeof div, "%02u", division(rng) + 1);
        record.firm.nace = div;
        record.chain = dataset.hierarchy.resolve(record.firm.location_code);
        record.size_bin = bin(rng);
        record.division = div;
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

} // namespace testutil
