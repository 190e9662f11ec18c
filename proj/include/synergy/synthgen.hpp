#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "synergy/ingest.hpp"
#include "synergy/tensor.hpp"

namespace synergy {

// Synthetic firm populations with planted dependence structure, used to
// validate the estimator and the decomposition against known ground truth.

struct Independent {};

struct PairCoupled {
    AxisId first = AxisId::Geography;
    AxisId second = AxisId::Size;
    double strength = 1.0; // 0 = independent, 1 = deterministic coupling
};

struct ParityCoupled {}; // third axis = (first + second) mod cardinality

struct Mixture; // weighted components, each owning its own region block

using Structure = std::variant<Independent, PairCoupled, ParityCoupled, Mixture>;

struct Mixture {
    struct Component {
        double weight = 0.0;
        std::variant<Independent, PairCoupled, ParityCoupled> structure;
    };
    std::vector<Component> components; // weights sum to 1
};

struct RegionLayout {
    std::uint32_t subjects = 1;
    std::uint32_t districts = 1;
};

enum class SynthMode { Exact, Sampled };

struct SynthSpec {
    std::uint64_t seed = 0;
    std::uint64_t n_records = 0;
    std::uint32_t geo_cells = 2; // per mixture component
    std::uint32_t size_classes = 2;
    std::uint32_t divisions = 2;
    Structure structure = Independent{};
    RegionLayout layout;
    SynthMode mode = SynthMode::Sampled;
    std::optional<int> year;

    static SynthSpec from_json_file(const std::string& path);
    static SynthSpec from_json(const std::string& text, const std::string& origin);
};

// Deterministic in the seed; records carry synthetic zips consistent with
// the layout. Exact mode replicates the exact-counts tensor (the largest
// whole multiple fitting n_records, at least one copy). Throws BadSpec.
std::vector<FirmRecord> generate(const SynthSpec& spec);

// The structure's minimal integer-count tensor, free of sampling noise.
// Throws NotRational when cell probabilities have no small rational form.
ContingencyTensor exact_counts_mode(const SynthSpec& spec);

// Matching region hierarchy for the layout (zip -> subject -> district ->
// nation), in the format RegionHierarchy::load reads.
std::string hierarchy_file_text(const SynthSpec& spec);

// CSV in the schema ingest consumes.
void write_records_csv(const std::vector<FirmRecord>& records, bool with_year,
                       std::ostream& out);

} // namespace synergy
