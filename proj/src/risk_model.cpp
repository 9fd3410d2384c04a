#include "risktrace/risk_model.hpp"

#include <cmath>
#include <numbers>

#include "risktrace/errors.hpp"

namespace risktrace {

RiskParams RiskParams::from_scales(double p0, double sigma_x, double sigma_y,
                                   double sigma_t) {
    RiskParams params{p0, sigma_x, sigma_y, sigma_t};
    params.validate();
    return params;
}

RiskParams RiskParams::from_precisions(double p0, double tau, double tau_t) {
    if (!(tau > 0.0) || !(tau_t > 0.0)) {
        throw DomainError("RiskParams: precisions must be positive");
    }
    return from_scales(p0, 1.0 / std::sqrt(tau), 1.0 / std::sqrt(tau),
                       1.0 / std::sqrt(tau_t));
}

double RiskParams::default_p0() {
    return 0.01 / std::sqrt(2.0 * std::numbers::pi);
}

void RiskParams::validate() const {
    if (!(p0 > 0.0) || !(p0 < 1.0)) {
        throw DomainError("RiskParams: p0 must lie in (0, 1)");
    }
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !(sigma_t > 0.0)) {
        throw DomainError("RiskParams: decay scales must be positive");
    }
    if (!std::isfinite(p0) || !std::isfinite(sigma_x) ||
        !std::isfinite(sigma_y) || !std::isfinite(sigma_t)) {
        throw DomainError("RiskParams: parameters must be finite");
    }
}

void Trajectory::validate(double max_speed) const {
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const PresenceCell& prev = cells[i - 1];
        const PresenceCell& cur = cells[i];
        if (!(cur.t > prev.t)) {
            throw OrderingError("Trajectory: cell times must be strictly increasing");
        }
        if (max_speed > 0.0) {
            const double dist = std::hypot(cur.x - prev.x, cur.y - prev.y);
            if (dist > max_speed * (cur.t - prev.t)) {
                throw OrderingError("Trajectory: consecutive cells exceed max speed");
            }
        }
    }
}

double log1m_clamped(double p) {
    if (p <= 0.0) return 0.0;
    if (p > 1.0 - 1e-15) p = 1.0 - 1e-15;
    return std::log1p(-p);
}

namespace {

double pairwise_risk_unchecked(const PresenceCell& user, const PresenceCell& patient,
                               const RiskParams& params) {
    if (user.t < patient.t) return 0.0;
    const double dx = (user.x - patient.x) / params.sigma_x;
    const double dy = (user.y - patient.y) / params.sigma_y;
    const double dt = (user.t - patient.t) / params.sigma_t;
    return params.p0 * std::exp(-dx * dx - dy * dy - dt * dt);
}

double cell_log_complement_unchecked(const PresenceCell& user,
                                     std::span<const PresenceCell> patients,
                                     const RiskParams& params) {
    double log_q = 0.0;
    for (const PresenceCell& patient : patients) {
        log_q += log1m_clamped(pairwise_risk_unchecked(user, patient, params));
    }
    return log_q;
}

} // namespace

double pairwise_risk(const PresenceCell& user, const PresenceCell& patient,
                     const RiskParams& params) {
    params.validate();
    return pairwise_risk_unchecked(user, patient, params);
}

double cell_log_complement(const PresenceCell& user,
                           std::span<const PresenceCell> patients,
                           const RiskParams& params) {
    params.validate();
    return cell_log_complement_unchecked(user, patients, params);
}

double cell_risk(const PresenceCell& user,
                 std::span<const PresenceCell> patients,
                 const RiskParams& params) {
    return -std::expm1(cell_log_complement(user, patients, params));
}

double trajectory_log_complement(const Trajectory& user,
                                 std::span<const PresenceCell> patients,
                                 const RiskParams& params) {
    params.validate();
    user.validate();
    double log_q = 0.0;
    for (const PresenceCell& cell : user.cells) {
        log_q += cell_log_complement_unchecked(cell, patients, params);
    }
    return log_q;
}

double trajectory_risk(const Trajectory& user,
                       std::span<const PresenceCell> patients,
                       const RiskParams& params) {
    return -std::expm1(trajectory_log_complement(user, patients, params));
}

} // namespace risktrace
