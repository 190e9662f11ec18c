#include "synergy/tensor.hpp"

#include <algorithm>

namespace synergy {

const char* to_string(AxisId id) {
    switch (id) {
        case AxisId::Geography: return "geography";
        case AxisId::Size: return "size";
        case AxisId::Technology: return "technology";
    }
    return "?";
}

CategoryAxis::CategoryAxis(AxisId id, std::vector<std::string> labels)
    : id_(id), labels_(std::move(labels)) {
    index_.reserve(labels_.size());
    for (std::uint32_t i = 0; i < labels_.size(); ++i) {
        auto [it, inserted] = index_.emplace(labels_[i], i);
        if (!inserted) {
            throw Error(ErrorCode::InvalidConfig,
                        "duplicate label '" + labels_[i] + "' on axis " + to_string(id_));
        }
    }
}

std::uint32_t CategoryAxis::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) {
        throw Error(ErrorCode::InvalidConfig,
                    "unknown label '" + label + "' on axis " + to_string(id_));
    }
    return it->second;
}

namespace {

std::array<std::uint64_t, 3> axis_dims(const std::array<CategoryAxis, 3>& axes) {
    return {axes[0].cardinality(), axes[1].cardinality(), axes[2].cardinality()};
}

std::uint64_t pack_index(const std::array<std::uint64_t, 3>& dims, CellIndex index) {
    return (static_cast<std::uint64_t>(index[0]) * dims[1] + index[1]) * dims[2] + index[2];
}

void check_bounds(const std::array<std::uint64_t, 3>& dims, CellIndex index) {
    for (int a = 0; a < 3; ++a) {
        if (index[a] >= dims[a]) {
            throw Error(ErrorCode::InvalidConfig,
                        "cell index out of range on axis " + std::to_string(a));
        }
    }
}

} // namespace

ContingencyTensor ContingencyTensor::from_cells(std::array<CategoryAxis, 3> axes,
                                                const std::map<CellIndex, Count>& cells) {
    Builder builder(std::move(axes));
    for (const auto& [index, count] : cells) {
        builder.add(index, count);
    }
    return std::move(builder).build();
}

ContingencyTensor::Builder::Builder(std::array<CategoryAxis, 3> axes)
    : axes_(std::move(axes)), dims_(axis_dims(axes_)) {}

void ContingencyTensor::Builder::add(CellIndex index, Count count) {
    if (count == 0) {
        return; // zero cells are never stored
    }
    check_bounds(dims_, index);
    cells_[pack_index(dims_, index)] += count;
}

void ContingencyTensor::Builder::merge(const Builder& other) {
    if (dims_ != other.dims_) {
        throw Error(ErrorCode::InvalidConfig, "merging builders with different axes");
    }
    for (const auto& [packed, count] : other.cells_) {
        cells_[packed] += count;
    }
}

ContingencyTensor ContingencyTensor::Builder::build() && {
    ContingencyTensor tensor;
    tensor.axes_ = std::move(axes_);
    tensor.dims_ = dims_;
    tensor.cells_.assign(cells_.begin(), cells_.end());
    std::sort(tensor.cells_.begin(), tensor.cells_.end());
    tensor.total_ = 0;
    for (const auto& [packed, count] : tensor.cells_) {
        tensor.total_ += count;
    }
    return tensor;
}

std::uint64_t ContingencyTensor::pack(CellIndex index) const {
    return pack_index(dims_, index);
}

CellIndex ContingencyTensor::unpack(std::uint64_t packed) const {
    CellIndex index;
    index[2] = static_cast<std::uint32_t>(packed % dims_[2]);
    packed /= dims_[2];
    index[1] = static_cast<std::uint32_t>(packed % dims_[1]);
    index[0] = static_cast<std::uint32_t>(packed / dims_[1]);
    return index;
}

Count ContingencyTensor::at(CellIndex index) const {
    check_bounds(dims_, index);
    const std::uint64_t packed = pack(index);
    auto it = std::lower_bound(cells_.begin(), cells_.end(), packed,
                               [](const Cell& cell, std::uint64_t key) { return cell.first < key; });
    if (it == cells_.end() || it->first != packed) {
        return 0;
    }
    return it->second;
}

} // namespace synergy
