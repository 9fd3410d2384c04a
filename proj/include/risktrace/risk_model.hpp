#ifndef RISKTRACE_RISK_MODEL_HPP
#define RISKTRACE_RISK_MODEL_HPP

#include <span>
#include <string>
#include <vector>

namespace risktrace {

/// Parameters of the separable Gaussian infection-decay kernel.
///
/// p0 is the infection probability for one second of co-located contact;
/// sigma_x / sigma_y / sigma_t are the spatial (meters) and temporal
/// (seconds) decay scales. The precision view tau = 1/sigma^2 is provided
/// for inference code; the scale and precision views are mutually
/// consistent conversions of the same parameters.
struct RiskParams {
    double p0 = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double sigma_t = 0.0;

    static RiskParams from_scales(double p0, double sigma_x, double sigma_y,
                                  double sigma_t);

    /// Precision parameterization: one shared spatial precision tau for both
    /// axes (sigma_x = sigma_y = 1/sqrt(tau)) and temporal precision tau_t.
    static RiskParams from_precisions(double p0, double tau, double tau_t);

    double tau_x() const { return 1.0 / (sigma_x * sigma_x); }
    double tau_y() const { return 1.0 / (sigma_y * sigma_y); }
    double tau_t() const { return 1.0 / (sigma_t * sigma_t); }

    /// Default base probability, 0.01/sqrt(2*pi).
    static double default_p0();

    /// Throws DomainError unless 0 < p0 < 1 and all scales are positive.
    void validate() const;

    bool operator==(const RiskParams&) const = default;
};

/// One occupied 1m x 1m x 1s spatio-temporal cell. x and y are cell-center
/// coordinates in a planar local frame; t is the cell's tick on the
/// one-second time grid. Used for patients and users alike.
struct PresenceCell {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;

    bool operator==(const PresenceCell&) const = default;
};

/// Ordered sequence of presence cells for one person. The person_id is a
/// purely local handle; nothing in the map-building or serialization path
/// ever reads it.
struct Trajectory {
    std::vector<PresenceCell> cells;
    std::string person_id;

    /// Throws OrderingError unless cell times are strictly increasing.
    /// A positive max_speed additionally bounds the displacement between
    /// consecutive cells (meters/second); zero disables the check.
    void validate(double max_speed = 0.0) const;
};

/// log(1 - p) with p clamped to [0, 1 - 1e-15] so that accumulating many
/// factors never produces -inf from a single saturated term.
double log1m_clamped(double p);

/// Infection probability contributed by one patient cell to one user cell:
/// p0 * exp(-dx^2/sx^2 - dy^2/sy^2 - dt^2/st^2) when user.t >= patient.t,
/// exactly 0 otherwise.
double pairwise_risk(const PresenceCell& user, const PresenceCell& patient,
                     const RiskParams& params);

/// log of the survival product over all patient cells for one user cell:
/// sum of log(1 - pairwise_risk). Empty patient list gives 0.
double cell_log_complement(const PresenceCell& user,
                           std::span<const PresenceCell> patients,
                           const RiskParams& params);

/// Per-cell aggregate infection probability, 1 - prod(1 - p_i). Duplicate
/// patient cells are deliberate independent factors and are not collapsed.
double cell_risk(const PresenceCell& user,
                 std::span<const PresenceCell> patients,
                 const RiskParams& params);

/// log survival product over the whole trajectory (all user cells x all
/// patient cells).
double trajectory_log_complement(const Trajectory& user,
                                 std::span<const PresenceCell> patients,
                                 const RiskParams& params);

/// Overall trajectory infection probability, 1 - prod_j prod_i (1 - p_ij),
/// accumulated in the log-complement domain.
double trajectory_risk(const Trajectory& user,
                       std::span<const PresenceCell> patients,
                       const RiskParams& params);

} // namespace risktrace

#endif
