#include "risktrace/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "risktrace/errors.hpp"

namespace risktrace {

namespace {

// Alignment tolerance for deciding whether a coordinate sits on a grid
// point, as a fraction of the cell size.
constexpr double kGridTolerance = 1e-6;

std::int64_t checked_index(double value, double origin, double cell_size,
                           double limit, const char* axis) {
    const double idx = std::floor((value - origin) / cell_size);
    if (!(idx >= -limit && idx <= limit)) {
        throw DiscretizationError(std::string("grid index overflow on axis ") + axis);
    }
    return static_cast<std::int64_t>(idx);
}

struct IndexHash {
    std::size_t operator()(const CellIndex& c) const {
        std::uint64_t h = static_cast<std::uint32_t>(c.i);
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(c.j);
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(c.k);
        h ^= h >> 29;
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

std::vector<MapEntry> sorted_entries(std::unordered_map<CellIndex, double, IndexHash>&& acc) {
    std::vector<MapEntry> entries;
    entries.reserve(acc.size());
    for (const auto& [idx, log_q] : acc) {
        entries.push_back({idx, log_q});
    }
    std::sort(entries.begin(), entries.end(),
              [](const MapEntry& a, const MapEntry& b) { return a.index < b.index; });
    return entries;
}

} // namespace

void GridSpec::validate() const {
    if (!(cell_size_xy > 0.0) || !(cell_size_t > 0.0)) {
        throw DomainError("GridSpec: cell sizes must be positive");
    }
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y) ||
        !std::isfinite(cell_size_xy) || !std::isfinite(cell_size_t)) {
        throw DomainError("GridSpec: fields must be finite");
    }
}

CellIndex GridSpec::index_of(double x, double y, double t) const {
    const double i32_max = static_cast<double>(std::numeric_limits<std::int32_t>::max());
    // 2^53: past this, consecutive int64 time indices are no longer exact.
    const double k_max = 9007199254740992.0;
    CellIndex idx;
    idx.i = static_cast<std::int32_t>(checked_index(x, origin_x, cell_size_xy, i32_max, "x"));
    idx.j = static_cast<std::int32_t>(checked_index(y, origin_y, cell_size_xy, i32_max, "y"));
    idx.k = checked_index(t, static_cast<double>(origin_t), cell_size_t, k_max, "t");
    return idx;
}

PresenceCell GridSpec::cell_point(const CellIndex& idx) const {
    PresenceCell cell;
    cell.x = origin_x + (static_cast<double>(idx.i) + 0.5) * cell_size_xy;
    cell.y = origin_y + (static_cast<double>(idx.j) + 0.5) * cell_size_xy;
    cell.t = static_cast<double>(origin_t) + static_cast<double>(idx.k) * cell_size_t;
    return cell;
}

bool GridSpec::on_grid(const PresenceCell& cell) const {
    CellIndex idx;
    try {
        idx = index_of(cell.x, cell.y, cell.t);
    } catch (const DiscretizationError&) {
        return false;
    }
    const PresenceCell p = cell_point(idx);
    const double tol_xy = kGridTolerance * cell_size_xy;
    const double tol_t = kGridTolerance * cell_size_t;
    return std::abs(p.x - cell.x) <= tol_xy && std::abs(p.y - cell.y) <= tol_xy &&
           std::abs(p.t - cell.t) <= tol_t;
}

RiskMap::RiskMap(GridSpec spec, RiskParams params, double truncation_eps,
                 std::vector<MapEntry> entries)
    : spec_(spec), params_(params), truncation_eps_(truncation_eps),
      entries_(std::move(entries)) {
    spec_.validate();
    params_.validate();
    if (!(truncation_eps_ > 0.0) || !(truncation_eps_ < 1.0)) {
        throw DomainError("RiskMap: truncation_eps must lie in (0, 1)");
    }
    for (std::size_t n = 0; n < entries_.size(); ++n) {
        if (!(entries_[n].log_q < 0.0) || !std::isfinite(entries_[n].log_q)) {
            throw DomainError("RiskMap: log_q entries must be negative and finite");
        }
        if (n > 0 && !(entries_[n - 1].index < entries_[n].index)) {
            throw DomainError("RiskMap: entries must be strictly sorted by (k, i, j)");
        }
    }
}

double RiskMap::lookup_log_q(const CellIndex& idx) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                               [](const MapEntry& e, const CellIndex& v) { return e.index < v; });
    if (it == entries_.end() || !(it->index == idx)) return 0.0;
    return it->log_q;
}

RiskMap build_risk_map(std::span<const Trajectory> patients,
                       const RiskParams& params, const GridSpec& spec,
                       double truncation_eps) {
    spec.validate();
    params.validate();
    if (!(truncation_eps > 0.0) || !(truncation_eps < 1.0)) {
        throw DomainError("build_risk_map: truncation_eps must lie in (0, 1)");
    }

    // Per-axis footprint of one patient cell: offsets where the axis factor
    // alone keeps p0 * exp(-(d/sigma)^2) at or above eps. Outside the box no
    // contribution can reach eps.
    const double ln_ratio = std::log(params.p0 / truncation_eps);
    std::int64_t ri = -1, rj = -1, rk = -1;
    if (ln_ratio >= 0.0) {
        const double reach = std::sqrt(ln_ratio);
        ri = static_cast<std::int64_t>(std::floor(reach * params.sigma_x / spec.cell_size_xy));
        rj = static_cast<std::int64_t>(std::floor(reach * params.sigma_y / spec.cell_size_xy));
        rk = static_cast<std::int64_t>(std::floor(reach * params.sigma_t / spec.cell_size_t));
    }

    std::unordered_map<CellIndex, double, IndexHash> acc;
    if (ri >= 0) {
        // Separable kernel: tabulate each axis once.
        std::vector<double> ex(2 * ri + 1), ey(2 * rj + 1), et(rk + 1);
        for (std::int64_t d = -ri; d <= ri; ++d) {
            const double u = static_cast<double>(d) * spec.cell_size_xy / params.sigma_x;
            ex[d + ri] = std::exp(-u * u);
        }
        for (std::int64_t d = -rj; d <= rj; ++d) {
            const double u = static_cast<double>(d) * spec.cell_size_xy / params.sigma_y;
            ey[d + rj] = std::exp(-u * u);
        }
        for (std::int64_t d = 0; d <= rk; ++d) {
            const double u = static_cast<double>(d) * spec.cell_size_t / params.sigma_t;
            et[d] = std::exp(-u * u);
        }

        for (const Trajectory& patient : patients) {
            patient.validate();
            for (const PresenceCell& cell : patient.cells) {
                if (!spec.on_grid(cell)) {
                    throw DiscretizationError(
                        "build_risk_map: patient cell not aligned to the grid");
                }
                const CellIndex base = spec.index_of(cell.x, cell.y, cell.t);
                const std::int64_t i32_max = std::numeric_limits<std::int32_t>::max();
                if (std::abs(static_cast<std::int64_t>(base.i)) + ri >= i32_max ||
                    std::abs(static_cast<std::int64_t>(base.j)) + rj >= i32_max) {
                    throw DiscretizationError(
                        "build_risk_map: truncation neighborhood overflows the index range");
                }
                for (std::int64_t dk = 0; dk <= rk; ++dk) {
                    const double pt = params.p0 * et[dk];
                    if (pt < truncation_eps) break;
                    for (std::int64_t di = -ri; di <= ri; ++di) {
                        const double pxt = pt * ex[di + ri];
                        if (pxt < truncation_eps) continue;
                        for (std::int64_t dj = -rj; dj <= rj; ++dj) {
                            const double p = pxt * ey[dj + rj];
                            if (p < truncation_eps) continue;
                            CellIndex target{static_cast<std::int32_t>(base.i + di),
                                             static_cast<std::int32_t>(base.j + dj),
                                             base.k + dk};
                            acc[target] += log1m_clamped(p);
                        }
                    }
                }
            }
        }
    }

    return RiskMap(spec, params, truncation_eps, sorted_entries(std::move(acc)));
}

double lookup_cell(const RiskMap& map, const PresenceCell& cell) {
    const CellIndex idx = map.spec().index_of(cell.x, cell.y, cell.t);
    return -std::expm1(map.lookup_log_q(idx));
}

double evaluate_trajectory(const RiskMap& map, const Trajectory& user) {
    user.validate();
    double log_q = 0.0;
    for (const PresenceCell& cell : user.cells) {
        if (!map.spec().on_grid(cell)) {
            throw DiscretizationError(
                "evaluate_trajectory: trajectory cell not aligned to the map grid");
        }
        log_q += map.lookup_log_q(map.spec().index_of(cell.x, cell.y, cell.t));
    }
    return -std::expm1(log_q);
}

Trajectory discretize(std::span<const PathSample> path, const GridSpec& spec) {
    spec.validate();
    Trajectory out;
    if (path.empty()) return out;
    for (std::size_t n = 1; n < path.size(); ++n) {
        if (!(path[n].t > path[n - 1].t)) {
            throw OrderingError("discretize: path samples must be strictly time-ordered");
        }
    }

    const double ot = static_cast<double>(spec.origin_t);
    const std::int64_t k_first =
        static_cast<std::int64_t>(std::ceil((path.front().t - ot) / spec.cell_size_t));
    const std::int64_t k_last =
        static_cast<std::int64_t>(std::floor((path.back().t - ot) / spec.cell_size_t));
    if (k_last < k_first) return out;

    out.cells.reserve(static_cast<std::size_t>(k_last - k_first + 1));
    std::size_t seg = 0;
    for (std::int64_t k = k_first; k <= k_last; ++k) {
        const double tick = ot + static_cast<double>(k) * spec.cell_size_t;
        double x, y;
        if (path.size() == 1) {
            x = path[0].x;
            y = path[0].y;
        } else {
            while (seg + 2 < path.size() && path[seg + 1].t < tick) ++seg;
            const PathSample& a = path[seg];
            const PathSample& b = path[seg + 1];
            // Endpoint-weighted form: exact at both ends, and divides without
            // error when the samples land on round coordinates.
            const double span = b.t - a.t;
            x = (a.x * (b.t - tick) + b.x * (tick - a.t)) / span;
            y = (a.y * (b.t - tick) + b.y * (tick - a.t)) / span;
        }
        CellIndex idx = spec.index_of(x, y, tick);
        idx.k = k;
        out.cells.push_back(spec.cell_point(idx));
    }
    return out;
}

RiskMap merge_risk_maps(const RiskMap& a, const RiskMap& b) {
    if (!(a.spec() == b.spec()) || !(a.params() == b.params()) ||
        a.truncation_eps() != b.truncation_eps()) {
        throw DomainError("merge_risk_maps: maps disagree on grid, parameters, or eps");
    }
    std::vector<MapEntry> merged;
    merged.reserve(a.size() + b.size());
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() && ib != b.entries().end()) {
        if (ia->index < ib->index) {
            merged.push_back(*ia++);
        } else if (ib->index < ia->index) {
            merged.push_back(*ib++);
        } else {
            merged.push_back({ia->index, ia->log_q + ib->log_q});
            ++ia;
            ++ib;
        }
    }
    merged.insert(merged.end(), ia, a.entries().end());
    merged.insert(merged.end(), ib, b.entries().end());
    return RiskMap(a.spec(), a.params(), a.truncation_eps(), std::move(merged));
}

} // namespace risktrace
