#include "synergy/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace synergy {

namespace {

// Employees value planted for each size class: the lower bound of the
// matching default bin, so ingest maps records straight back.
constexpr std::uint64_t kClassEmployees[] = {0, 1, 5, 10, 20, 50, 100, 250};
constexpr std::uint32_t kMaxSizeClasses = 8;

struct Dims {
    std::uint32_t geo = 0;
    std::uint32_t size = 0;
    std::uint32_t tech = 0;
};

std::uint32_t cardinality_of(AxisId axis, const Dims& dims) {
    switch (axis) {
    case AxisId::Geography: return dims.geo;
    case AxisId::Size: return dims.size;
    case AxisId::Technology: return dims.tech;
    }
    return 0;
}

using ComponentStructure = std::variant<Independent, PairCoupled, ParityCoupled>;

std::vector<ComponentStructure> flatten(const Structure& structure) {
    if (const auto* mixture = std::get_if<Mixture>(&structure)) {
        std::vector<ComponentStructure> parts;
        for (const auto& component : mixture->components) {
            parts.push_back(component.structure);
        }
        return parts;
    }
    std::vector<ComponentStructure> parts(1);
    std::visit(
        [&](const auto& s) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, Mixture>) {
                parts[0] = s;
            }
        },
        structure);
    return parts;
}

std::vector<double> component_weights(const Structure& structure) {
    if (const auto* mixture = std::get_if<Mixture>(&structure)) {
        std::vector<double> weights;
        for (const auto& component : mixture->components) {
            weights.push_back(component.weight);
        }
        return weights;
    }
    return {1.0};
}

// Smallest p/q within 1e-9 of x, q bounded; nullopt when none exists.
std::optional<std::pair<std::uint64_t, std::uint64_t>> to_rational(double x,
                                                                   std::uint64_t max_den) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        return std::nullopt;
    }
    for (std::uint64_t den = 1; den <= max_den; ++den) {
        const double scaled = x * static_cast<double>(den);
        const auto num = static_cast<std::uint64_t>(std::llround(scaled));
        if (std::abs(scaled - static_cast<double>(num)) < 1e-9 * static_cast<double>(den)) {
            const std::uint64_t g = std::gcd(num == 0 ? den : num, den);
            return std::make_pair(num / g, den / g);
        }
    }
    return std::nullopt;
}

void check_pair(const PairCoupled& pair) {
    if (pair.first == pair.second) {
        throw Error(ErrorCode::BadSpec, "pair coupling needs two distinct axes");
    }
    if (!(pair.strength >= 0.0 && pair.strength <= 1.0)) {
        throw Error(ErrorCode::BadSpec, "coupling strength must lie in [0, 1]");
    }
}

void validate(const SynthSpec& spec) {
    const auto parts = flatten(spec.structure);
    const auto weights = component_weights(spec.structure);
    if (parts.empty()) {
        throw Error(ErrorCode::BadSpec, "mixture needs at least one component");
    }
    double weight_sum = 0.0;
    for (const double w : weights) {
        if (!(w > 0.0)) {
            throw Error(ErrorCode::BadSpec, "component weights must be positive");
        }
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::BadSpec, "component weights must sum to 1");
    }
    if (spec.geo_cells == 0 || spec.size_classes == 0 || spec.divisions == 0) {
        throw Error(ErrorCode::BadSpec, "axis cardinalities must be positive");
    }
    if (spec.size_classes > kMaxSizeClasses) {
        throw Error(ErrorCode::BadSpec, "at most 8 size classes");
    }
    if (spec.divisions > 99) {
        throw Error(ErrorCode::BadSpec, "at most 99 divisions");
    }
    const std::uint64_t cells =
        static_cast<std::uint64_t>(parts.size()) * spec.geo_cells;
    if (cells > 9000) {
        throw Error(ErrorCode::BadSpec, "too many geography cells for 4-digit zips");
    }
    if (spec.layout.subjects == 0 || spec.layout.subjects > 999) {
        throw Error(ErrorCode::BadSpec, "subjects must lie in 1..999");
    }
    if (spec.layout.districts == 0 || spec.layout.districts > spec.layout.subjects) {
        throw Error(ErrorCode::BadSpec, "districts must lie in 1..subjects");
    }
    if (spec.layout.subjects % parts.size() != 0) {
        throw Error(ErrorCode::BadSpec, "subjects must split evenly across components");
    }
    for (const auto& part : parts) {
        if (const auto* pair = std::get_if<PairCoupled>(&part)) {
            check_pair(*pair);
        }
    }
}

// Minimal integer counts realizing one component's distribution exactly.
std::map<CellIndex, Count> exact_component_counts(const ComponentStructure& structure,
                                                  const Dims& dims) {
    std::map<CellIndex, Count> counts;
    if (std::holds_alternative<Independent>(structure)) {
        for (std::uint32_t g = 0; g < dims.geo; ++g) {
            for (std::uint32_t s = 0; s < dims.size; ++s) {
                for (std::uint32_t d = 0; d < dims.tech; ++d) {
                    counts[{g, s, d}] = 1;
                }
            }
        }
        return counts;
    }
    if (std::holds_alternative<ParityCoupled>(structure)) {
        for (std::uint32_t g = 0; g < dims.geo; ++g) {
            for (std::uint32_t s = 0; s < dims.size; ++s) {
                counts[{g, s, (g + s) % dims.tech}] += 1;
            }
        }
        return counts;
    }
    const auto& pair = std::get<PairCoupled>(structure);
    const auto rational = to_rational(pair.strength, 1000);
    if (!rational) {
        throw Error(ErrorCode::NotRational, "coupling strength has no small rational form");
    }
    const auto [p, q] = *rational;
    const AxisId third =
        static_cast<AxisId>(3 - axis_index(pair.first) - axis_index(pair.second));
    const std::uint32_t a_card = cardinality_of(pair.first, dims);
    const std::uint32_t b_card = cardinality_of(pair.second, dims);
    const std::uint32_t t_card = cardinality_of(third, dims);
    // P(b | a) = strength * [b == a mod B] + (1 - strength) / B, scaled by
    // q * B to integers: diagonal q - p + p * B, elsewhere q - p.
    const Count off = q - p;
    const Count diag = q - p + p * static_cast<Count>(b_card);
    Count divisor = diag;
    if (off > 0) {
        divisor = std::gcd(diag, off);
    }
    for (std::uint32_t a = 0; a < a_card; ++a) {
        for (std::uint32_t b = 0; b < b_card; ++b) {
            const Count n = (b == a % b_card) ? diag : off;
            if (n == 0) {
                continue;
            }
            for (std::uint32_t t = 0; t < t_card; ++t) {
                CellIndex index{};
                index[axis_index(pair.first)] = a;
                index[axis_index(pair.second)] = b;
                index[axis_index(third)] = t;
                counts[index] = n / divisor;
            }
        }
    }
    return counts;
}

// Dense per-cell probabilities for sampling, local index ((g*S)+s)*D+d.
std::vector<double> component_densities(const ComponentStructure& structure, const Dims& dims) {
    const std::size_t n =
        static_cast<std::size_t>(dims.geo) * dims.size * dims.tech;
    std::vector<double> densities(n, 0.0);
    auto at = [&](std::uint32_t g, std::uint32_t s, std::uint32_t d) -> double& {
        return densities[(static_cast<std::size_t>(g) * dims.size + s) * dims.tech + d];
    };
    if (std::holds_alternative<Independent>(structure)) {
        std::fill(densities.begin(), densities.end(), 1.0 / static_cast<double>(n));
        return densities;
    }
    if (std::holds_alternative<ParityCoupled>(structure)) {
        const double p = 1.0 / (static_cast<double>(dims.geo) * dims.size);
        for (std::uint32_t g = 0; g < dims.geo; ++g) {
            for (std::uint32_t s = 0; s < dims.size; ++s) {
                at(g, s, (g + s) % dims.tech) += p;
            }
        }
        return densities;
    }
    const auto& pair = std::get<PairCoupled>(structure);
    const AxisId third =
        static_cast<AxisId>(3 - axis_index(pair.first) - axis_index(pair.second));
    const std::uint32_t a_card = cardinality_of(pair.first, dims);
    const std::uint32_t b_card = cardinality_of(pair.second, dims);
    const std::uint32_t t_card = cardinality_of(third, dims);
    for (std::uint32_t a = 0; a < a_card; ++a) {
        for (std::uint32_t b = 0; b < b_card; ++b) {
            const double p_b = pair.strength * (b == a % b_card ? 1.0 : 0.0) +
                               (1.0 - pair.strength) / static_cast<double>(b_card);
            for (std::uint32_t t = 0; t < t_card; ++t) {
                CellIndex index{};
                index[axis_index(pair.first)] = a;
                index[axis_index(pair.second)] = b;
                index[axis_index(third)] = t;
                at(index[0], index[1], index[2]) =
                    p_b / (static_cast<double>(a_card) * t_card);
            }
        }
    }
    return densities;
}

// Global exact counts keyed by (global geo cell, size class, division).
std::map<CellIndex, Count> exact_global_counts(const SynthSpec& spec) {
    const auto parts = flatten(spec.structure);
    const auto weights = component_weights(spec.structure);
    const Dims dims{spec.geo_cells, spec.size_classes, spec.divisions};

    std::vector<std::map<CellIndex, Count>> component_counts;
    std::vector<Count> component_totals;
    for (const auto& part : parts) {
        auto counts = exact_component_counts(part, dims);
        Count total = 0;
        for (const auto& [index, count] : counts) {
            total += count;
        }
        component_counts.push_back(std::move(counts));
        component_totals.push_back(total);
    }

    // Component multipliers: the smallest global total N with w_i * N an
    // integer multiple of every component's own total.
    std::uint64_t q = 1;
    std::vector<std::uint64_t> numerators(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto rational = to_rational(weights[i], 1000);
        if (!rational) {
            throw Error(ErrorCode::NotRational, "component weight has no small rational form");
        }
        q = std::lcm(q, rational->second);
        if (q > 1000000) {
            throw Error(ErrorCode::NotRational, "component weights need too large a denominator");
        }
    }
    std::uint64_t numerator_sum = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        numerators[i] =
            static_cast<std::uint64_t>(std::llround(weights[i] * static_cast<double>(q)));
        numerator_sum += numerators[i];
    }
    if (numerator_sum != q) {
        throw Error(ErrorCode::NotRational, "component weights do not sum to 1 exactly");
    }
    std::uint64_t scale = 1;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        scale = std::lcm(scale, component_totals[i] / std::gcd(numerators[i],
                                                               component_totals[i]));
        if (scale > 1000000000ull) {
            throw Error(ErrorCode::NotRational, "exact tensor grows too large");
        }
    }

    std::map<CellIndex, Count> global;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::uint64_t multiplier = numerators[i] * scale / component_totals[i];
        const std::uint32_t offset = static_cast<std::uint32_t>(i) * spec.geo_cells;
        for (const auto& [index, count] : component_counts[i]) {
            global[{index[0] + offset, index[1], index[2]}] = count * multiplier;
        }
    }
    Count divisor = 0;
    for (const auto& [index, count] : global) {
        divisor = std::gcd(divisor, count);
    }
    if (divisor > 1) {
        for (auto& [index, count] : global) {
            count /= divisor;
        }
    }
    return global;
}

std::string zip_of(std::uint32_t global_cell) {
    char buffer[8];
    std::snprintf(buffer, sizeof buffer, "%04u", 1000 + global_cell);
    return buffer;
}

std::string division_label(std::uint32_t division) {
    char buffer[4];
    std::snprintf(buffer, sizeof buffer, "%02u", division + 1);
    return buffer;
}

FirmRecord make_record(std::uint64_t serial, std::uint32_t global_cell, std::uint32_t size_class,
                       std::uint32_t division, const SynthSpec& spec) {
    char id[16];
    std::snprintf(id, sizeof id, "F%08llu", static_cast<unsigned long long>(serial));
    FirmRecord record;
    record.firm_id = id;
    record.location_code = zip_of(global_cell);
    record.employees = kClassEmployees[size_class];
    record.nace = division_label(division);
    record.year = spec.year;
    return record;
}

} // namespace

std::vector<FirmRecord> generate(const SynthSpec& spec) {
    validate(spec);
    std::vector<FirmRecord> records;

    if (spec.mode == SynthMode::Exact) {
        const auto counts = exact_global_counts(spec);
        Count total = 0;
        for (const auto& [index, count] : counts) {
            total += count;
        }
        const std::uint64_t copies = std::max<std::uint64_t>(1, spec.n_records / total);
        records.reserve(total * copies);
        std::uint64_t serial = 0;
        for (const auto& [index, count] : counts) {
            for (Count i = 0; i < count * copies; ++i) {
                records.push_back(make_record(++serial, index[0], index[1], index[2], spec));
            }
        }
        return records;
    }

    const auto parts = flatten(spec.structure);
    const auto weights = component_weights(spec.structure);
    const Dims dims{spec.geo_cells, spec.size_classes, spec.divisions};
    const std::size_t per_component =
        static_cast<std::size_t>(dims.geo) * dims.size * dims.tech;

    std::vector<double> cumulative;
    cumulative.reserve(parts.size() * per_component);
    double running = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto densities = component_densities(parts[i], dims);
        for (const double p : densities) {
            running += weights[i] * p;
            cumulative.push_back(running);
        }
    }
    cumulative.back() = 1.0;

    std::mt19937_64 rng(spec.seed);
    records.reserve(spec.n_records);
    for (std::uint64_t serial = 1; serial <= spec.n_records; ++serial) {
        // Top 53 bits -> uniform double in [0, 1); bit-stable across runs.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t flat = std::min<std::size_t>(it - cumulative.begin(),
                                                       cumulative.size() - 1);
        const std::uint32_t component = static_cast<std::uint32_t>(flat / per_component);
        const std::size_t local = flat % per_component;
        const std::uint32_t g = static_cast<std::uint32_t>(local / (dims.size * dims.tech));
        const std::uint32_t s =
            static_cast<std::uint32_t>(local / dims.tech % dims.size);
        const std::uint32_t d = static_cast<std::uint32_t>(local % dims.tech);
        records.push_back(
            make_record(serial, component * spec.geo_cells + g, s, d, spec));
    }
    return records;
}

ContingencyTensor exact_counts_mode(const SynthSpec& spec) {
    validate(spec);
    const auto counts = exact_global_counts(spec);

    std::set<std::uint32_t> geo_seen;
    std::set<std::uint32_t> size_seen;
    std::set<std::uint32_t> div_seen;
    for (const auto& [index, count] : counts) {
        geo_seen.insert(index[0]);
        size_seen.insert(index[1]);
        div_seen.insert(index[2]);
    }
    auto index_map = [](const std::set<std::uint32_t>& seen) {
        std::map<std::uint32_t, std::uint32_t> packed;
        for (const std::uint32_t value : seen) {
            const auto next = static_cast<std::uint32_t>(packed.size());
            packed.emplace(value, next);
        }
        return packed;
    };
    const auto geo_index = index_map(geo_seen);
    const auto size_index = index_map(size_seen);
    const auto div_index = index_map(div_seen);

    const SizeBins bins = SizeBins::default_bins();
    std::vector<std::string> geo_labels;
    for (const std::uint32_t cell : geo_seen) {
        geo_labels.push_back(zip_of(cell));
    }
    std::vector<std::string> size_labels;
    for (const std::uint32_t size_class : size_seen) {
        size_labels.push_back(bins.label(size_class));
    }
    std::vector<std::string> div_labels;
    for (const std::uint32_t division : div_seen) {
        div_labels.push_back(division_label(division));
    }
    std::array<CategoryAxis, 3> axes{CategoryAxis(AxisId::Geography, std::move(geo_labels)),
                                     CategoryAxis(AxisId::Size, std::move(size_labels)),
                                     CategoryAxis(AxisId::Technology, std::move(div_labels))};

    std::map<CellIndex, Count> cells;
    for (const auto& [index, count] : counts) {
        cells[{geo_index.at(index[0]), size_index.at(index[1]), div_index.at(index[2])}] =
            count;
    }
    return ContingencyTensor::from_cells(std::move(axes), cells);
}

std::string hierarchy_file_text(const SynthSpec& spec) {
    validate(spec);
    const auto parts = flatten(spec.structure);
    const std::uint32_t components = static_cast<std::uint32_t>(parts.size());
    const std::uint32_t per_component = spec.layout.subjects / components;

    std::ostringstream out;
    out << "# synthetic region hierarchy\n";
    out << "#levels\tsubject\tdistrict\tnation\n";
    for (std::uint32_t cell = 0; cell < components * spec.geo_cells; ++cell) {
        const std::uint32_t component = cell / spec.geo_cells;
        const std::uint32_t local = cell % spec.geo_cells;
        const std::uint32_t subject = component * per_component + local % per_component;
        const std::uint32_t district = static_cast<std::uint32_t>(
            static_cast<std::uint64_t>(subject) * spec.layout.districts /
            spec.layout.subjects);
        char subject_id[8];
        char district_id[8];
        std::snprintf(subject_id, sizeof subject_id, "S%03u", subject + 1);
        std::snprintf(district_id, sizeof district_id, "D%03u", district + 1);
        out << zip_of(cell) << '\t' << subject_id << '\t' << district_id << "\tN\n";
    }
    return out.str();
}

void write_records_csv(const std::vector<FirmRecord>& records, bool with_year,
                       std::ostream& out) {
    out << "firm_id,zip,employees,nace";
    if (with_year) {
        out << ",year";
    }
    out << '\n';
    for (const FirmRecord& record : records) {
        out << record.firm_id << ',' << record.location_code << ',' << record.employees << ','
            << record.nace;
        if (with_year) {
            out << ',';
            if (record.year) {
                out << *record.year;
            }
        }
        out << '\n';
    }
}

namespace {

AxisId axis_from_string(const std::string& name, const std::string& origin) {
    if (name == "geography") {
        return AxisId::Geography;
    }
    if (name == "size") {
        return AxisId::Size;
    }
    if (name == "technology") {
        return AxisId::Technology;
    }
    throw Error(ErrorCode::BadSpec, origin + ": unknown axis '" + name + "'");
}

ComponentStructure component_from_json(const nlohmann::json& node, const std::string& origin) {
    const std::string kind = node.value("kind", "independent");
    if (kind == "independent") {
        return Independent{};
    }
    if (kind == "parity") {
        return ParityCoupled{};
    }
    if (kind == "pair") {
        PairCoupled pair;
        pair.first = axis_from_string(node.value("first", "geography"), origin);
        pair.second = axis_from_string(node.value("second", "size"), origin);
        pair.strength = node.value("strength", 1.0);
        return pair;
    }
    throw Error(ErrorCode::BadSpec, origin + ": unknown structure kind '" + kind + "'");
}

Structure structure_from_json(const nlohmann::json& node, const std::string& origin) {
    const std::string kind = node.value("kind", "independent");
    if (kind == "mixture") {
        Mixture mixture;
        if (!node.contains("components") || !node["components"].is_array()) {
            throw Error(ErrorCode::BadSpec, origin + ": mixture needs a components array");
        }
        for (const auto& entry : node["components"]) {
            Mixture::Component component;
            component.weight = entry.value("weight", 0.0);
            component.structure =
                component_from_json(entry.value("structure", nlohmann::json::object()), origin);
            mixture.components.push_back(std::move(component));
        }
        return mixture;
    }
    return std::visit([](auto&& s) -> Structure { return s; },
                      component_from_json(node, origin));
}

} // namespace

SynthSpec SynthSpec::from_json(const std::string& text, const std::string& origin) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadSpec, origin + ": " + e.what());
    }
    try {
        SynthSpec spec;
        spec.seed = root.value("seed", std::uint64_t{0});
        spec.n_records = root.value("n_records", std::uint64_t{0});
        spec.geo_cells = root.value("geo_cells", std::uint32_t{2});
        spec.size_classes = root.value("size_classes", std::uint32_t{2});
        spec.divisions = root.value("divisions", std::uint32_t{2});
        if (root.contains("layout")) {
            spec.layout.subjects = root["layout"].value("subjects", std::uint32_t{1});
            spec.layout.districts = root["layout"].value("districts", std::uint32_t{1});
        }
        const std::string mode = root.value("mode", "sampled");
        if (mode == "exact") {
            spec.mode = SynthMode::Exact;
        } else if (mode == "sampled") {
            spec.mode = SynthMode::Sampled;
        } else {
            throw Error(ErrorCode::BadSpec, origin + ": unknown mode '" + mode + "'");
        }
        if (root.contains("year") && !root["year"].is_null()) {
            spec.year = root["year"].get<int>();
        }
        if (root.contains("structure")) {
            spec.structure = structure_from_json(root["structure"], origin);
        }
        validate(spec);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadSpec, origin + ": " + e.what());
    }
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open spec file " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str(), path);
}

} // namespace synergy
