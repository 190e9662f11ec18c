#include "synergy/decomposition.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

namespace synergy {

namespace {

std::string geo_axis_name(const RegionHierarchy& hierarchy, GeoAxis geo_axis) {
    if (geo_axis.raw_location) {
        return "zip";
    }
    return hierarchy.level_names().at(geo_axis.level);
}

// Partition by region index at `level`; keys ascend, so group ids (which the
// hierarchy keeps sorted) come out in id order.
std::vector<std::pair<std::uint32_t, std::vector<ClassifiedRecord>>>
partition_by_level(std::span<const ClassifiedRecord> records, std::size_t level) {
    std::map<std::uint32_t, std::vector<ClassifiedRecord>> buckets;
    for (const ClassifiedRecord& r : records) {
        buckets[r.chain.at(level)].push_back(r);
    }
    std::vector<std::pair<std::uint32_t, std::vector<ClassifiedRecord>>> groups;
    groups.reserve(buckets.size());
    for (auto& [index, bucket] : buckets) {
        groups.emplace_back(index, std::move(bucket));
    }
    return groups;
}

GroupDecomposition decompose_with_total(std::span<const ClassifiedRecord> records,
                                        const RegionHierarchy& hierarchy, std::size_t level,
                                        GeoAxis geo_axis, const SizeBins& bins, unsigned threads,
                                        Mbits t_total) {
    auto partitions = partition_by_level(records, level);
    if (partitions.empty()) {
        throw Error(ErrorCode::EmptyPartition, "no groups at level " + std::to_string(level));
    }

    const double n_total = static_cast<double>(records.size());
    std::vector<Mbits> t_g(partitions.size());
    auto compute = [&](std::size_t g) {
        t_g[g] = transmission3(
            build_tensor(partitions[g].second, hierarchy, geo_axis, bins, 1));
    };
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(partitions.size())));
    if (workers == 1) {
        for (std::size_t g = 0; g < partitions.size(); ++g) {
            compute(g);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t g = next.fetch_add(1);
                    if (g >= partitions.size()) {
                        return;
                    }
                    compute(g);
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    GroupDecomposition result;
    result.t_total = t_total;
    Mbits in_group_sum;
    std::vector<GroupSynergy> groups;
    groups.reserve(partitions.size());
    for (std::size_t g = 0; g < partitions.size(); ++g) {
        GroupSynergy group;
        group.group_id = hierarchy.region_id(level, partitions[g].first);
        group.n = partitions[g].second.size();
        group.t_g = t_g[g];
        group.delta_t = t_g[g] * (static_cast<double>(group.n) / n_total);
        if (t_total.value() != 0.0) {
            group.share_pct = 100.0 * group.delta_t.value() / t_total.value() + 0.0;
        }
        in_group_sum += group.delta_t;
        groups.push_back(std::move(group));
    }
    result.in_group_sum = in_group_sum;
    result.t0 = t_total - in_group_sum;
    result.groups = std::move(groups);
    return result;
}

} // namespace

GroupDecomposition group_decompose(std::span<const ClassifiedRecord> records,
                                   const RegionHierarchy& hierarchy, std::size_t level,
                                   GeoAxis geo_axis, const SizeBins& bins, unsigned threads) {
    if (records.empty()) {
        throw Error(ErrorCode::EmptyPartition, "no records to partition");
    }
    const Mbits t_total =
        transmission3(build_tensor(records, hierarchy, geo_axis, bins, threads));
    return decompose_with_total(records, hierarchy, level, geo_axis, bins, threads, t_total);
}

std::vector<Mbits> level_increments(std::span<const Mbits> in_group_sums, Mbits t_total) {
    std::vector<Mbits> rows;
    rows.reserve(in_group_sums.size() + 1);
    Mbits previous;
    for (const Mbits sum : in_group_sums) {
        rows.push_back(sum - previous);
        previous = sum;
    }
    rows.push_back(t_total - previous);
    return rows;
}

DecompositionReport multilevel_table(std::span<const ClassifiedRecord> records,
                                     const RegionHierarchy& hierarchy,
                                     std::span<const std::size_t> levels, GeoAxis geo_axis,
                                     const SizeBins& bins, unsigned threads) {
    if (levels.empty()) {
        throw Error(ErrorCode::InvalidConfig, "at least one level required");
    }
    if (levels.back() + 1 != hierarchy.level_count()) {
        throw Error(ErrorCode::InvalidConfig, "levels must end at the coarsest level");
    }
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        if (levels[i] + 1 != levels[i + 1]) {
            throw Error(ErrorCode::InvalidConfig, "levels must be contiguous");
        }
    }
    if (records.empty()) {
        throw Error(ErrorCode::NoValidRecords, "no records to decompose");
    }

    const ContingencyTensor pooled = build_tensor(records, hierarchy, geo_axis, bins, threads);
    const Mbits t_total = transmission3(pooled);

    DecompositionReport report;
    report.t_total = t_total;
    report.n_records = records.size();
    for (const std::size_t level : levels) {
        report.levels.push_back(hierarchy.level_names().at(level));
    }

    std::vector<Mbits> in_group_sums;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        auto decomposition = decompose_with_total(records, hierarchy, levels[i], geo_axis, bins,
                                                  threads, t_total);
        LevelDetail detail;
        detail.level = report.levels[i];
        detail.in_group_sum = decomposition.in_group_sum;
        detail.t0 = decomposition.t0;
        detail.groups = std::move(decomposition.groups);
        for (const GroupSynergy& group : detail.groups) {
            if (group.n < kSmallGroupThreshold) {
                report.small_groups.push_back({detail.level, group.group_id, group.n});
            }
        }
        in_group_sums.push_back(detail.in_group_sum);
        report.grouped.push_back(std::move(detail));
    }

    const std::vector<Mbits> rows = level_increments(in_group_sums, t_total);
    bool has_positive = false;
    bool has_negative = false;
    for (const Mbits row : rows) {
        has_positive = has_positive || row.value() > 0.0;
        has_negative = has_negative || row.value() < 0.0;
    }
    report.shares_suppressed = t_total.value() == 0.0 || (has_positive && has_negative);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        LevelRow row;
        row.level = report.levels[i];
        row.row = rows[i];
        if (!report.shares_suppressed) {
            row.share_pct = share_of_total(rows[i], t_total);
        }
        report.rows.push_back(std::move(row));
    }

    report.metadata.geo_axis = geo_axis_name(hierarchy, geo_axis);
    report.metadata.levels = report.levels;
    for (const CategoryAxis& axis : pooled.axes()) {
        report.metadata.axis_summary.push_back(std::string(to_string(axis.id())) + ": " +
                                               std::to_string(axis.cardinality()) +
                                               " categories");
    }
    return report;
}

double share_of_total(Mbits row, Mbits total) {
    if (total.value() == 0.0) {
        throw Error(ErrorCode::ZeroTotal, "total transmission is zero");
    }
    return 100.0 * row.value() / total.value() + 0.0; // + 0.0 folds away -0.0
}

Mbits sector_normalize(Mbits t_sector, std::uint64_t n_sector, std::uint64_t n_total) {
    if (n_total == 0 || n_sector > n_total) {
        throw Error(ErrorCode::BadCounts, "sector count exceeds total or total is zero");
    }
    return t_sector * (static_cast<double>(n_sector) / static_cast<double>(n_total));
}

std::vector<GroupSynergy> rank_regions(std::vector<GroupSynergy> groups,
                                       double min_share_of_records, std::uint64_t n_total) {
    if (n_total == 0) {
        throw Error(ErrorCode::BadCounts, "record total is zero");
    }
    std::erase_if(groups, [&](const GroupSynergy& g) {
        return 100.0 * static_cast<double>(g.n) / static_cast<double>(n_total) <
               min_share_of_records;
    });
    std::sort(groups.begin(), groups.end(), [](const GroupSynergy& a, const GroupSynergy& b) {
        if (a.delta_t.value() != b.delta_t.value()) {
            return a.delta_t.value() < b.delta_t.value();
        }
        return a.group_id < b.group_id;
    });
    return groups;
}

} // namespace synergy
