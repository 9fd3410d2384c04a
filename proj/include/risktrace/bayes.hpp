#ifndef RISKTRACE_BAYES_HPP
#define RISKTRACE_BAYES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "risktrace/grid_map.hpp"
#include "risktrace/risk_model.hpp"

namespace risktrace {

/// Gamma(shape, rate) hyperparameters of the independent priors on the
/// spatial precision tau (1/m^2, shared by both axes) and the temporal
/// precision tau_t (1/s^2).
struct PriorHyperparams {
    double alpha = 0.0;
    double beta = 0.0;
    double alpha_t = 0.0;
    double beta_t = 0.0;

    /// Prior centered on nominal decay scales: shape 2 and rate 2*sigma^2,
    /// so the prior mean is the nominal precision 1/sigma^2 and the prior
    /// sd equals the mean (a deliberately generous spread).
    static PriorHyperparams centered_on(double sigma_xy, double sigma_t);

    void validate() const;
};

/// One tested person: the cells they occupied near the patients, and the
/// test result.
struct TestObservation {
    Trajectory trajectory;
    bool outcome = false; // true = tested positive
};

struct PosteriorSample {
    double tau = 0.0;
    double tau_t = 0.0;
    double log_posterior = 0.0; // unnormalized log density at (tau, tau_t)
};

struct McmcConfig {
    std::size_t iterations = 10000; // total steps, burn-in included
    std::size_t burn_in = 1000;
    std::size_t thinning = 5; // keep every thinning-th post-burn-in step
    double proposal_scale = 0.3; // log-space random-walk sd, both coordinates
    bool adapt = true; // tune the scale during burn-in, then freeze it
    std::size_t max_init_retries = 100; // prior draws tried for a usable start

    void validate() const;
};

struct McmcResult {
    std::vector<PosteriorSample> samples;
    double acceptance_rate = 0.0; // fraction of post-burn-in steps accepted
    double final_proposal_scale = 0.0;
};

/// Infection risk of one trajectory in the precision parameterization:
/// per-pair p0 * exp(-tau*(dx^2 + dy^2) - tau_t*dt^2) when the user cell is
/// at or after the patient cell (0 before), aggregated as one minus the
/// survival product. Equals the scale-parameterized trajectory_risk under
/// tau = 1/sigma_x^2 = 1/sigma_y^2 and tau_t = 1/sigma_t^2.
double precision_trajectory_risk(const Trajectory& user,
                                 std::span<const PresenceCell> patients,
                                 double tau, double tau_t, double p0);

/// Bernoulli probability of one test result given the exposure:
/// risk for a positive outcome, 1 - risk for a negative one.
double likelihood(const TestObservation& obs,
                  std::span<const PresenceCell> patients, double tau,
                  double tau_t, double p0);

/// log of likelihood(); -infinity for a positive test with zero risk.
double log_likelihood(const TestObservation& obs,
                      std::span<const PresenceCell> patients, double tau,
                      double tau_t, double p0);

/// Unnormalized log posterior density at (tau, tau_t): Gamma log-priors
/// plus the per-observation Bernoulli log-likelihoods.
double log_posterior(double tau, double tau_t,
                     std::span<const TestObservation> observations,
                     std::span<const PresenceCell> patients,
                     const PriorHyperparams& prior, double p0);

/// Random-walk Metropolis-Hastings over (log tau, log tau_t), with the
/// change-of-variables correction so the samples target the (tau, tau_t)
/// posterior. The chain starts from a prior draw with positive posterior
/// density; if max_init_retries draws all land on zero density the
/// observations contradict the model and InconsistentObservationError is
/// thrown. Identical seeds and inputs give identical chains.
McmcResult sample_posterior(std::span<const TestObservation> observations,
                            std::span<const PresenceCell> patients,
                            const PriorHyperparams& prior, double p0,
                            const McmcConfig& mcmc, std::uint64_t seed);

/// Posterior-predictive risk map: per-cell arithmetic mean of the maps
/// built at each posterior sample's parameters, truncated at eps like any
/// built map. The map's recorded parameters are the posterior-mean point.
RiskMap refined_risk_map(std::span<const PosteriorSample> posterior,
                         std::span<const Trajectory> patients,
                         const GridSpec& spec, double p0, double eps);

} // namespace risktrace

#endif
