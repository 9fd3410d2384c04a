#ifndef RISKTRACE_SIMULATION_HPP
#define RISKTRACE_SIMULATION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "risktrace/grid_map.hpp"
#include "risktrace/rng.hpp"

namespace risktrace {

/// Square-area crossing scenario: one patient walks west to east through
/// the middle; healthy walkers enter from random sides and cross straight.
struct ScenarioConfig {
    double area_side = 100.0;   // meters
    double horizon = 350.0;     // seconds
    double patient_speed = 1.0; // m/s
    double walker_entry_min = 0.0;
    double walker_entry_max = 200.0; // entry time window, seconds
    double walker_speed_min = 0.75;  // m/s
    double walker_speed_max = 1.25;
    std::size_t n_trials = 20000;
    std::uint64_t rng_seed = 0;
    double map_truncation_eps = 1e-12; // for the scoring map path

    void validate() const;
};

enum class EntrySide : std::uint8_t { west = 0, north = 1, east = 2, south = 3 };

std::string to_string(EntrySide side);

struct WalkerMeta {
    EntrySide entry_side = EntrySide::west;
    double entry_time = 0.0;
    double speed = 0.0;
};

struct TrialRecord {
    std::size_t trial_index = 0;
    WalkerMeta meta;
    double risk_score = 0.0;   // via the published-map code path
    double min_distance = 0.0; // +inf when never co-present with the patient
    bool infected = false;     // sampled ground truth
};

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // strictest threshold first
};

enum class ScoreKind { risk, proximity };

/// The scenario's grid: 1 m x 1 m x 1 s cells anchored at the area corner.
inline GridSpec scenario_grid() { return GridSpec{}; }

/// Patient crossing: west-side midpoint, eastbound at patient_speed,
/// entering at t = 0; one cell per tick while inside the area.
Trajectory generate_patient(const ScenarioConfig& config);

/// Deterministic walker path: enter the area on `side` at `offset` meters
/// from the side's low corner, at `entry_time`, crossing perpendicular at
/// `speed`; truncated at area exit or horizon.
Trajectory walker_path(const ScenarioConfig& config, EntrySide side, double entry_time,
                       double offset, double speed);

/// Random walker: side, entry time, entry point (middle half of the side),
/// and speed drawn in that order, then walker_path.
Trajectory generate_walker(const ScenarioConfig& config, RngStream& rng,
                           WalkerMeta* meta = nullptr);

/// Bernoulli draw at the walker's true trajectory risk.
bool sample_ground_truth(const Trajectory& walker, std::span<const PresenceCell> patients,
                         const RiskParams& true_params, RngStream& rng);

/// Minimum cell-center distance over ticks where both are present;
/// +infinity if they never share a tick.
double min_distance(const Trajectory& walker, const Trajectory& patient);

/// Larger-is-riskier proximity metric exp(-min_distance); the +inf sentinel
/// maps to 0.
double proximity_score(double min_dist);

/// Full study: builds the patient map once, then per-trial walkers with
/// independent substreams of (rng_seed, trial_index). Deterministic given
/// the seed; records are ordered by trial index.
std::vector<TrialRecord> run_experiment(const ScenarioConfig& config,
                                        const RiskParams& params);

/// Threshold sweep over all distinct scores, strictest first; predictions
/// are score >= threshold. Throws DegenerateLabelsError unless both classes
/// are present.
RocCurve roc(std::span<const TrialRecord> records, ScoreKind kind);

/// Trapezoid area under the curve, anchored at (0,0).
double roc_auc(const RocCurve& curve);

/// Bootstrap standard error of AUC(risk) - AUC(proximity); single-class
/// resamples are redrawn.
double bootstrap_auc_diff_se(std::span<const TrialRecord> records, std::size_t n_boot,
                             std::uint64_t seed);

} // namespace risktrace

#endif
