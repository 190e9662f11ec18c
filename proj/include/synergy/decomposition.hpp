#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synergy/entropy.hpp"
#include "synergy/ingest.hpp"
#include "synergy/mbits.hpp"

namespace synergy {

// Group-wise synergy decomposition: T = T0 + sum_G (n_G/N) * T_G, where T
// is the pooled three-way transmission, T_G the within-group transmission,
// and T0 the between-group residual ("dividedness"). Negative values are
// synergy; signs are reported, never flipped.

struct GroupSynergy {
    std::string group_id;
    std::uint64_t n = 0;
    Mbits t_g;
    Mbits delta_t; // (n/N) * T_G
    std::optional<double> share_pct; // 100 * delta_t / T_total, absent when T_total == 0
};

struct GroupDecomposition {
    Mbits t_total;
    Mbits t0;
    Mbits in_group_sum; // sum_G (n_G/N) * T_G
    std::vector<GroupSynergy> groups; // sorted by group id
};

// Decompose at one hierarchy level. Every record must carry a chain; the
// tensors (pooled and per group) share the geography axis choice. Groups
// with a single record get T_G = 0. Throws EmptyPartition when the
// partition has no groups.
GroupDecomposition group_decompose(std::span<const ClassifiedRecord> records,
                                   const RegionHierarchy& hierarchy, std::size_t level,
                                   GeoAxis geo_axis, const SizeBins& bins,
                                   unsigned threads = 1);

struct LevelRow {
    std::string level;
    Mbits row; // this level's increment of the in-group sums
    std::optional<double> share_pct;
};

struct LevelDetail {
    std::string level;
    Mbits in_group_sum;
    Mbits t0; // T_total - in_group_sum at this partition
    std::vector<GroupSynergy> groups;
};

struct NormalizedNationally {
    Mbits value; // T_sector * n_sector / N_all
    std::uint64_t n_sector = 0;
    std::uint64_t n_all = 0;
    std::optional<double> share_pct; // against the all-sector total, when known
};

struct ReportMetadata {
    std::string dataset_hash;
    std::string filter_description;
    std::string geo_axis;                  // level name or "zip"
    std::vector<std::string> levels;       // decomposed levels, finest -> coarsest
    std::vector<std::string> axis_summary; // one line per tensor axis
};

struct SmallGroupWarning {
    std::string level;
    std::string group_id;
    std::uint64_t n = 0;
};

struct DecompositionReport {
    std::vector<std::string> levels; // finest -> coarsest (last = pooled total level)
    Mbits t_total;
    std::uint64_t n_records = 0;
    std::vector<LevelDetail> grouped;  // one per level except the coarsest
    std::vector<LevelRow> rows;        // level increments; sum to t_total
    bool shares_suppressed = false;    // zero total or mixed row signs
    std::optional<NormalizedNationally> normalized;
    std::vector<SmallGroupWarning> small_groups; // n_G below the fragility threshold
    ReportMetadata metadata;
};

// Row arithmetic shared by multilevel_table: increments of the weighted
// in-group sums, finest first, closed by T_total minus the coarsest sum.
std::vector<Mbits> level_increments(std::span<const Mbits> in_group_sums, Mbits t_total);

// Levels must be a contiguous suffix of the hierarchy's levels; the
// coarsest one is reported as the pooled total row, the rest are grouped.
DecompositionReport multilevel_table(std::span<const ClassifiedRecord> records,
                                     const RegionHierarchy& hierarchy,
                                     std::span<const std::size_t> levels, GeoAxis geo_axis,
                                     const SizeBins& bins, unsigned threads = 1);

// 100 * row / total; throws ZeroTotal.
double share_of_total(Mbits row, Mbits total);

// Footnote-style national normalization: T_sector * n_sector / N.
// Throws BadCounts unless 0 <= n_sector <= N and N > 0.
Mbits sector_normalize(Mbits t_sector, std::uint64_t n_sector, std::uint64_t n_total);

// Groups holding at least min_share_of_records percent of the records,
// most synergetic first (ascending delta_t, ties by id).
std::vector<GroupSynergy> rank_regions(std::vector<GroupSynergy> groups,
                                       double min_share_of_records, std::uint64_t n_total);

// Groups with fewer records than this get a fragility warning.
constexpr std::uint64_t kSmallGroupThreshold = 30;

} // namespace synergy
