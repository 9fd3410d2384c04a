#ifndef RISKTRACE_GRID_MAP_HPP
#define RISKTRACE_GRID_MAP_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "risktrace/risk_model.hpp"

namespace risktrace {

/// Integer address of one grid cell. Spatial indices are signed 32-bit
/// (covers planetary extents at 1 m); the time index is signed 64-bit.
/// Ordering is lexicographic by (k, i, j), matching the on-disk entry order.
struct CellIndex {
    std::int32_t i = 0;
    std::int32_t j = 0;
    std::int64_t k = 0;

    friend auto operator<=>(const CellIndex& a, const CellIndex& b) {
        if (auto c = a.k <=> b.k; c != 0) return c;
        if (auto c = a.i <=> b.i; c != 0) return c;
        return a.j <=> b.j;
    }
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Geometry of the spatio-temporal grid: an origin plus cell sizes. The
/// index of a continuous coordinate is floor((coord - origin) / cell_size);
/// a cell's representative point is its spatial center and its time tick.
struct GridSpec {
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::int64_t origin_t = 0;
    double cell_size_xy = 1.0;
    double cell_size_t = 1.0;

    void validate() const;

    /// Index of the cell containing (x, y, t). Throws DiscretizationError
    /// if a spatial index would overflow 32 bits.
    CellIndex index_of(double x, double y, double t) const;

    /// Representative point of a cell: spatial center (index + 0.5) and the
    /// tick time origin_t + k * cell_size_t.
    PresenceCell cell_point(const CellIndex& idx) const;

    /// True when the cell's coordinates coincide with a grid cell's
    /// representative point (within a small alignment tolerance).
    bool on_grid(const PresenceCell& cell) const;

    bool operator==(const GridSpec&) const = default;
};

/// One stored map cell: the accumulated log survival probability
/// log prod_i (1 - P_i), always negative for stored cells.
struct MapEntry {
    CellIndex index;
    double log_q = 0.0;

    bool operator==(const MapEntry&) const = default;
};

/// Sparse per-cell infection-risk map: the downloadable artifact.
///
/// Entries are kept sorted by (k, i, j) and store log_q rather than
/// probability so that merging two maps is plain addition. Maps built by
/// build_risk_map contain only cells whose aggregate risk reaches
/// truncation_eps; looking up an absent cell yields risk 0. The map carries
/// no person identifiers, orderings, or per-patient attribution.
class RiskMap {
public:
    /// Takes ownership of entries, which must be sorted by (k, i, j) with no
    /// duplicates and strictly negative finite log_q.
    RiskMap(GridSpec spec, RiskParams params, double truncation_eps,
            std::vector<MapEntry> entries);

    const GridSpec& spec() const { return spec_; }
    const RiskParams& params() const { return params_; }
    double truncation_eps() const { return truncation_eps_; }
    std::span<const MapEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Stored log_q for the cell, or 0 (empty survival product) if absent.
    double lookup_log_q(const CellIndex& idx) const;

    bool operator==(const RiskMap&) const = default;

private:
    GridSpec spec_;
    RiskParams params_;
    double truncation_eps_ = 0.0;
    std::vector<MapEntry> entries_;
};

/// One continuous location sample of a recorded path.
struct PathSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Build the sparse risk map for the aggregate of all patient presence
/// cells. A contribution from one patient cell is kept when its pairwise
/// risk reaches truncation_eps, which bounds each patient cell's footprint
/// to a finite spatio-temporal neighborhood; every stored cell therefore
/// has aggregate risk >= truncation_eps. Patient trajectories must be
/// aligned to the grid (see discretize).
RiskMap build_risk_map(std::span<const Trajectory> patients,
                       const RiskParams& params, const GridSpec& spec,
                       double truncation_eps);

/// Risk of one cell under the map: 1 - exp(log_q), or 0 if absent.
double lookup_cell(const RiskMap& map, const PresenceCell& cell);

/// Trajectory risk evaluated against the map:
/// 1 - prod_j (1 - lookup_cell(cell_j)). Matches the direct double-product
/// risk up to truncation loss. Trajectory cells must lie on the map's grid.
double evaluate_trajectory(const RiskMap& map, const Trajectory& user);

/// Resample a continuous path onto the grid: one presence cell per time
/// tick spanned by the path, with the position linearly interpolated to the
/// tick and floored to its cell. Samples must be strictly time-ordered.
Trajectory discretize(std::span<const PathSample> path, const GridSpec& spec);

/// Combine two maps built over the same grid, parameters, and truncation
/// threshold: log_q values add where cells coincide. Equivalent to building
/// one map from the union of the patient sets.
RiskMap merge_risk_maps(const RiskMap& a, const RiskMap& b);

} // namespace risktrace

#endif
