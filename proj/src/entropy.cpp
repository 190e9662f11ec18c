#include "synergy/entropy.hpp"

#include <cmath>

namespace synergy {

namespace {

// Shared kernel: H = -sum p log2 p over positive counts, counts visited in
// the caller's (sorted) order.
template <typename Range>
Mbits entropy_kernel(const Range& counts, Count total) {
    if (total == 0) {
        throw Error(ErrorCode::AllZero, "entropy of an all-zero distribution");
    }
    const double n = static_cast<double>(total);
    double h_bits = 0.0;
    for (const Count c : counts) {
        if (c == 0) {
            continue;
        }
        const double p = static_cast<double>(c) / n;
        h_bits -= p * std::log2(p);
    }
    return Mbits::from_bits(h_bits);
}

struct MapValues {
    const std::map<CellIndex, Count>& map;
    struct Iter {
        std::map<CellIndex, Count>::const_iterator it;
        Count operator*() const { return it->second; }
        Iter& operator++() { ++it; return *this; }
        bool operator!=(const Iter& o) const { return it != o.it; }
    };
    Iter begin() const { return {map.begin()}; }
    Iter end() const { return {map.end()}; }
};

} // namespace

Mbits entropy(std::span<const Count> counts) {
    Count total = 0;
    for (const Count c : counts) {
        total += c;
    }
    return entropy_kernel(counts, total);
}

Mbits entropy(std::initializer_list<Count> counts) {
    return entropy(std::span<const Count>(counts.begin(), counts.size()));
}

std::map<CellIndex, Count> marginalize(const ContingencyTensor& tensor,
                                       std::span<const AxisId> keep) {
    if (keep.empty()) {
        throw Error(ErrorCode::EmptySubset, "marginalization must keep at least one axis");
    }
    std::array<bool, 3> kept{false, false, false};
    for (const AxisId id : keep) {
        kept[axis_index(id)] = true;
    }
    std::map<CellIndex, Count> out;
    for (const auto& [packed, count] : tensor.cells()) {
        CellIndex index = tensor.unpack(packed);
        for (int a = 0; a < 3; ++a) {
            if (!kept[a]) {
                index[a] = 0;
            }
        }
        out[index] += count;
    }
    return out;
}

std::map<CellIndex, Count> marginalize(const ContingencyTensor& tensor,
                                       std::initializer_list<AxisId> keep) {
    return marginalize(tensor, std::span<const AxisId>(keep.begin(), keep.size()));
}

Mbits entropy_of(const std::map<CellIndex, Count>& marginal, Count total) {
    return entropy_kernel(MapValues{marginal}, total);
}

Mbits transmission2(const ContingencyTensor& tensor, AxisId first, AxisId second) {
    const Count n = tensor.total();
    const Mbits h_a = entropy_of(marginalize(tensor, {first}), n);
    const Mbits h_b = entropy_of(marginalize(tensor, {second}), n);
    const Mbits h_ab = entropy_of(marginalize(tensor, {first, second}), n);
    return h_a + h_b - h_ab;
}

Mbits transmission3(const ContingencyTensor& tensor) {
    const Count n = tensor.total();
    const Mbits h_x = entropy_of(marginalize(tensor, {AxisId::Geography}), n);
    const Mbits h_y = entropy_of(marginalize(tensor, {AxisId::Size}), n);
    const Mbits h_z = entropy_of(marginalize(tensor, {AxisId::Technology}), n);
    const Mbits h_xy = entropy_of(marginalize(tensor, {AxisId::Geography, AxisId::Size}), n);
    const Mbits h_xz = entropy_of(marginalize(tensor, {AxisId::Geography, AxisId::Technology}), n);
    const Mbits h_yz = entropy_of(marginalize(tensor, {AxisId::Size, AxisId::Technology}), n);
    const Mbits h_xyz =
        entropy_of(marginalize(tensor, {AxisId::Geography, AxisId::Size, AxisId::Technology}), n);
    // Grouped so that a degenerate geography axis cancels term by term:
    // a group pinned to one region yields exactly zero, not rounding dust.
    return h_x + (h_y - h_xy) + (h_z - h_xz) + (h_xyz - h_yz);
}

} // namespace synergy
