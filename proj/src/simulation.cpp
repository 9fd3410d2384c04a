#include "risktrace/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "risktrace/errors.hpp"
#include "risktrace/stats.hpp"

namespace risktrace {

namespace {

// Drop discretized cells outside the open area [0, side) x [0, side): a
// walker is present only while strictly inside, so the exit-boundary tick
// is already "gone".
void clip_to_area(Trajectory& traj, double area_side) {
    std::erase_if(traj.cells, [area_side](const PresenceCell& c) {
        return c.x < 0.0 || c.x >= area_side || c.y < 0.0 || c.y >= area_side;
    });
}

struct Heading {
    double x0, y0, dx, dy;
};

// Entry point on the chosen side at the given offset from its low corner,
// heading perpendicular into the area.
Heading heading_for(EntrySide side, double offset, double area_side) {
    switch (side) {
    case EntrySide::west:
        return {0.0, offset, 1.0, 0.0};
    case EntrySide::north:
        return {offset, area_side, 0.0, -1.0};
    case EntrySide::east:
        return {area_side, offset, -1.0, 0.0};
    case EntrySide::south:
        return {offset, 0.0, 0.0, 1.0};
    }
    throw DomainError("unknown entry side");
}

} // namespace

void ScenarioConfig::validate() const {
    if (!(area_side > 0.0) || !(horizon > 0.0) || !(patient_speed > 0.0)) {
        throw DomainError("scenario: extents and speeds must be positive");
    }
    if (!(walker_speed_min > 0.0) || walker_speed_min > walker_speed_max) {
        throw DomainError("scenario: walker speed range must be positive and ordered");
    }
    if (walker_entry_min < 0.0 || walker_entry_min > walker_entry_max ||
        walker_entry_max > horizon) {
        throw DomainError("scenario: entry window must be ordered and within the horizon");
    }
    if (!(map_truncation_eps > 0.0) || !(map_truncation_eps < 1.0)) {
        throw DomainError("scenario: map truncation eps must lie in (0, 1)");
    }
}

std::string to_string(EntrySide side) {
    switch (side) {
    case EntrySide::west:
        return "west";
    case EntrySide::north:
        return "north";
    case EntrySide::east:
        return "east";
    case EntrySide::south:
        return "south";
    }
    return "unknown";
}

Trajectory generate_patient(const ScenarioConfig& config) {
    config.validate();
    const double mid = config.area_side / 2.0;
    const double duration = std::min(config.area_side / config.patient_speed, config.horizon);
    std::vector<PathSample> path{{0.0, 0.0, mid},
                                 {duration, config.patient_speed * duration, mid}};
    Trajectory traj = discretize(path, scenario_grid());
    clip_to_area(traj, config.area_side);
    return traj;
}

Trajectory walker_path(const ScenarioConfig& config, EntrySide side, double entry_time,
                       double offset, double speed) {
    config.validate();
    if (!(speed > 0.0) || offset < 0.0 || offset > config.area_side || entry_time < 0.0) {
        throw DomainError("walker_path: entry parameters outside the scenario");
    }
    const Heading h = heading_for(side, offset, config.area_side);
    const double exit_time = entry_time + config.area_side / speed;
    const double end_time = std::min(exit_time, config.horizon);
    const double travel = speed * (end_time - entry_time);
    std::vector<PathSample> path{{entry_time, h.x0, h.y0},
                                 {end_time, h.x0 + h.dx * travel, h.y0 + h.dy * travel}};
    Trajectory traj = discretize(path, scenario_grid());
    clip_to_area(traj, config.area_side);
    return traj;
}

Trajectory generate_walker(const ScenarioConfig& config, RngStream& rng, WalkerMeta* meta) {
    config.validate();
    // Draw order is part of the reproducibility contract:
    // side, entry time, entry point, speed.
    const auto side = static_cast<EntrySide>(rng.uniform_int(0, 3));
    const double entry_time = rng.uniform(config.walker_entry_min, config.walker_entry_max);
    const double offset = rng.uniform(config.area_side / 4.0, 3.0 * config.area_side / 4.0);
    const double speed = rng.uniform(config.walker_speed_min, config.walker_speed_max);
    if (meta) {
        meta->entry_side = side;
        meta->entry_time = entry_time;
        meta->speed = speed;
    }
    return walker_path(config, side, entry_time, offset, speed);
}

bool sample_ground_truth(const Trajectory& walker, std::span<const PresenceCell> patients,
                         const RiskParams& true_params, RngStream& rng) {
    return rng.bernoulli(trajectory_risk(walker, patients, true_params));
}

double min_distance(const Trajectory& walker, const Trajectory& patient) {
    double best = std::numeric_limits<double>::infinity();
    // Both trajectories carry strictly increasing tick times, so co-present
    // ticks fall out of a two-pointer walk.
    std::size_t a = 0, b = 0;
    while (a < walker.cells.size() && b < patient.cells.size()) {
        const double ta = walker.cells[a].t;
        const double tb = patient.cells[b].t;
        if (ta < tb) {
            ++a;
        } else if (tb < ta) {
            ++b;
        } else {
            const double dx = walker.cells[a].x - patient.cells[b].x;
            const double dy = walker.cells[a].y - patient.cells[b].y;
            best = std::min(best, std::hypot(dx, dy));
            ++a;
            ++b;
        }
    }
    return best;
}

double proximity_score(double min_dist) { return std::exp(-min_dist); }

std::vector<TrialRecord> run_experiment(const ScenarioConfig& config,
                                        const RiskParams& params) {
    config.validate();
    params.validate();
    const Trajectory patient = generate_patient(config);
    const RiskMap map = build_risk_map(std::span<const Trajectory>(&patient, 1), params,
                                       scenario_grid(), config.map_truncation_eps);

    std::vector<TrialRecord> records;
    records.reserve(config.n_trials);
    for (std::size_t trial = 0; trial < config.n_trials; ++trial) {
        RngStream rng = RngStream::substream(config.rng_seed, trial);
        TrialRecord rec;
        rec.trial_index = trial;
        const Trajectory walker = generate_walker(config, rng, &rec.meta);
        rec.risk_score = evaluate_trajectory(map, walker);
        rec.infected = sample_ground_truth(walker, patient.cells, params, rng);
        rec.min_distance = min_distance(walker, patient);
        records.push_back(rec);
    }
    return records;
}

namespace {

double score_of(const TrialRecord& rec, ScoreKind kind) {
    return kind == ScoreKind::risk ? rec.risk_score : proximity_score(rec.min_distance);
}

RocCurve roc_from_scores(std::span<const double> scores, const std::vector<bool>& labels) {
    const std::size_t n = scores.size();
    std::size_t total_pos = 0;
    for (bool l : labels) total_pos += l ? 1 : 0;
    const std::size_t total_neg = n - total_pos;
    if (total_pos == 0 || total_neg == 0) {
        throw DegenerateLabelsError("roc: need both infected and uninfected records");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        const double threshold = scores[order[i]];
        // Consume the whole tie group: predictions flip together.
        while (i < n && scores[order[i]] == threshold) {
            if (labels[order[i]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.points.push_back({threshold,
                                static_cast<double>(fp) / static_cast<double>(total_neg),
                                static_cast<double>(tp) / static_cast<double>(total_pos)});
    }
    return curve;
}

} // namespace

RocCurve roc(std::span<const TrialRecord> records, ScoreKind kind) {
    std::vector<double> scores;
    std::vector<bool> labels;
    scores.reserve(records.size());
    labels.reserve(records.size());
    for (const TrialRecord& rec : records) {
        scores.push_back(score_of(rec, kind));
        labels.push_back(rec.infected);
    }
    return roc_from_scores(scores, labels);
}

double roc_auc(const RocCurve& curve) {
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    for (const RocPoint& p : curve.points) {
        auc += (p.fpr - prev_fpr) * (p.tpr + prev_tpr) / 2.0;
        prev_fpr = p.fpr;
        prev_tpr = p.tpr;
    }
    return auc;
}

double bootstrap_auc_diff_se(std::span<const TrialRecord> records, std::size_t n_boot,
                             std::uint64_t seed) {
    if (records.size() < 2 || n_boot < 2) {
        throw DomainError("bootstrap: need at least 2 records and 2 replicates");
    }
    std::vector<double> diffs;
    diffs.reserve(n_boot);
    std::vector<TrialRecord> resample(records.size());
    for (std::size_t rep = 0; rep < n_boot; ++rep) {
        RngStream rng = RngStream::substream(seed, rep);
        for (;;) {
            bool any_pos = false, any_neg = false;
            for (std::size_t i = 0; i < records.size(); ++i) {
                resample[i] = records[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(records.size()) - 1))];
                (resample[i].infected ? any_pos : any_neg) = true;
            }
            if (any_pos && any_neg) break; // redraw single-class resamples
        }
        diffs.push_back(roc_auc(roc(resample, ScoreKind::risk)) -
                        roc_auc(roc(resample, ScoreKind::proximity)));
    }
    return sample_sd(diffs);
}

} // namespace risktrace
