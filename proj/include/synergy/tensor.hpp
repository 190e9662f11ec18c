#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "synergy/errors.hpp"

namespace synergy {

enum class AxisId : int { Geography = 0, Size = 1, Technology = 2 };

constexpr int axis_index(AxisId id) { return static_cast<int>(id); }
const char* to_string(AxisId id);

// One categorical dimension of the contingency tensor. Labels are opaque
// strings; their order fixes the integer indices used by cells.
class CategoryAxis {
public:
    CategoryAxis() = default;
    CategoryAxis(AxisId id, std::vector<std::string> labels);

    AxisId id() const { return id_; }
    std::uint32_t cardinality() const { return static_cast<std::uint32_t>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::uint32_t index) const { return labels_.at(index); }

    // Index of a label; throws InvalidConfig for unknown labels.
    std::uint32_t index_of(const std::string& label) const;

private:
    AxisId id_ = AxisId::Geography;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

using CellIndex = std::array<std::uint32_t, 3>;
using Count = std::uint64_t;

// Sparse three-way count tensor over (geography, size, technology).
// Zero cells are never stored; stored cells are kept sorted by packed index
// so that every summation over them runs in one fixed order.
class ContingencyTensor {
public:
    using Cell = std::pair<std::uint64_t, Count>; // packed index, count

    ContingencyTensor() = default;

    static ContingencyTensor from_cells(std::array<CategoryAxis, 3> axes,
                                        const std::map<CellIndex, Count>& cells);

    // Partitioned construction: each worker accumulates into its own
    // builder, builders merge commutatively, build() sorts once.
    class Builder {
    public:
        explicit Builder(std::array<CategoryAxis, 3> axes);

        void add(CellIndex index, Count count = 1);
        void merge(const Builder& other);
        ContingencyTensor build() &&;

    private:
        std::array<CategoryAxis, 3> axes_;
        std::array<std::uint64_t, 3> dims_{};
        std::unordered_map<std::uint64_t, Count> cells_;
    };

    const std::array<CategoryAxis, 3>& axes() const { return axes_; }
    const CategoryAxis& axis(AxisId id) const { return axes_[axis_index(id)]; }
    const std::vector<Cell>& cells() const { return cells_; }
    Count total() const { return total_; }
    std::size_t cell_count() const { return cells_.size(); }

    std::uint64_t pack(CellIndex index) const;
    CellIndex unpack(std::uint64_t packed) const;

    Count at(CellIndex index) const; // 0 for absent cells

private:
    std::array<CategoryAxis, 3> axes_;
    std::array<std::uint64_t, 3> dims_{};
    std::vector<Cell> cells_;
    Count total_ = 0;
};

} // namespace synergy
