#include "risktrace/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "risktrace/errors.hpp"
#include "risktrace/rng.hpp"

namespace risktrace {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gamma_log_pdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return kNegInf;
    return shape * std::log(rate) - std::lgamma(shape) +
           (shape - 1.0) * std::log(x) - rate * x;
}

void check_precisions(double tau, double tau_t) {
    if (!(tau > 0.0) || !(tau_t > 0.0) || !std::isfinite(tau) ||
        !std::isfinite(tau_t)) {
        throw DomainError("precisions must be positive and finite");
    }
}

void check_p0(double p0) {
    if (!(p0 > 0.0) || !(p0 < 1.0)) {
        throw DomainError("p0 must lie in (0, 1)");
    }
}

/// Exposure geometry of one trajectory against the patient set, compressed
/// to distinct (squared spatial offset, squared time offset) pairs with
/// multiplicities. The log survival product at any (tau, tau_t) is a
/// weighted sum over this table, which keeps long chains affordable.
struct ExposureTable {
    struct Row {
        double d_sp = 0.0;
        double d_t = 0.0;
        double count = 0.0;
    };
    std::vector<Row> rows;
    bool outcome = false;

    static ExposureTable build(const TestObservation& obs,
                               std::span<const PresenceCell> patients) {
        if (obs.trajectory.cells.empty()) {
            throw DomainError("TestObservation: trajectory must be non-empty");
        }
        std::map<std::pair<double, double>, double> grouped;
        for (const PresenceCell& user : obs.trajectory.cells) {
            for (const PresenceCell& patient : patients) {
                const double dt = user.t - patient.t;
                if (dt < 0.0) continue; // no influence before the patient
                const double dx = user.x - patient.x;
                const double dy = user.y - patient.y;
                grouped[{dx * dx + dy * dy, dt * dt}] += 1.0;
            }
        }
        ExposureTable table;
        table.outcome = obs.outcome;
        table.rows.reserve(grouped.size());
        for (const auto& [key, count] : grouped) {
            table.rows.push_back({key.first, key.second, count});
        }
        return table;
    }

    double log_q(double tau, double tau_t, double p0) const {
        double sum = 0.0;
        for (const Row& row : rows) {
            const double p = p0 * std::exp(-tau * row.d_sp - tau_t * row.d_t);
            sum += row.count * log1m_clamped(p);
        }
        return sum;
    }

    double log_lik(double tau, double tau_t, double p0) const {
        const double lq = log_q(tau, tau_t, p0);
        if (!outcome) return lq;
        const double risk = -std::expm1(lq);
        return risk > 0.0 ? std::log(risk) : kNegInf;
    }
};

} // namespace

PriorHyperparams PriorHyperparams::centered_on(double sigma_xy, double sigma_t) {
    if (!(sigma_xy > 0.0) || !(sigma_t > 0.0)) {
        throw DomainError("PriorHyperparams: scales must be positive");
    }
    return {2.0, 2.0 * sigma_xy * sigma_xy, 2.0, 2.0 * sigma_t * sigma_t};
}

void PriorHyperparams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(alpha_t > 0.0) || !(beta_t > 0.0)) {
        throw DomainError("PriorHyperparams: all four hyperparameters must be positive");
    }
}

void McmcConfig::validate() const {
    if (iterations == 0 || burn_in >= iterations) {
        throw DomainError("McmcConfig: need burn_in < iterations");
    }
    if (thinning == 0) {
        throw DomainError("McmcConfig: thinning must be at least 1");
    }
    if (!(proposal_scale > 0.0)) {
        throw DomainError("McmcConfig: proposal_scale must be positive");
    }
    if (max_init_retries == 0) {
        throw DomainError("McmcConfig: need at least one initialization draw");
    }
}

double precision_trajectory_risk(const Trajectory& user,
                                 std::span<const PresenceCell> patients,
                                 double tau, double tau_t, double p0) {
    check_precisions(tau, tau_t);
    check_p0(p0);
    double sum = 0.0;
    for (const PresenceCell& cell : user.cells) {
        for (const PresenceCell& patient : patients) {
            const double dt = cell.t - patient.t;
            if (dt < 0.0) continue;
            const double dx = cell.x - patient.x;
            const double dy = cell.y - patient.y;
            const double p =
                p0 * std::exp(-tau * (dx * dx + dy * dy) - tau_t * dt * dt);
            sum += log1m_clamped(p);
        }
    }
    return -std::expm1(sum);
}

double likelihood(const TestObservation& obs,
                  std::span<const PresenceCell> patients, double tau,
                  double tau_t, double p0) {
    check_precisions(tau, tau_t);
    check_p0(p0);
    const ExposureTable table = ExposureTable::build(obs, patients);
    const double lq = table.log_q(tau, tau_t, p0);
    return obs.outcome ? -std::expm1(lq) : std::exp(lq);
}

double log_likelihood(const TestObservation& obs,
                      std::span<const PresenceCell> patients, double tau,
                      double tau_t, double p0) {
    check_precisions(tau, tau_t);
    check_p0(p0);
    return ExposureTable::build(obs, patients).log_lik(tau, tau_t, p0);
}

double log_posterior(double tau, double tau_t,
                     std::span<const TestObservation> observations,
                     std::span<const PresenceCell> patients,
                     const PriorHyperparams& prior, double p0) {
    check_precisions(tau, tau_t);
    check_p0(p0);
    prior.validate();
    double lp = gamma_log_pdf(tau, prior.alpha, prior.beta) +
                gamma_log_pdf(tau_t, prior.alpha_t, prior.beta_t);
    for (const TestObservation& obs : observations) {
        lp += log_likelihood(obs, patients, tau, tau_t, p0);
        if (lp == kNegInf) break;
    }
    return lp;
}

McmcResult sample_posterior(std::span<const TestObservation> observations,
                            std::span<const PresenceCell> patients,
                            const PriorHyperparams& prior, double p0,
                            const McmcConfig& mcmc, std::uint64_t seed) {
    mcmc.validate();
    prior.validate();
    check_p0(p0);

    std::vector<ExposureTable> tables;
    tables.reserve(observations.size());
    for (const TestObservation& obs : observations) {
        tables.push_back(ExposureTable::build(obs, patients));
    }

    // Log density in precision space; conditionals bail out once the value
    // is pinned at -infinity.
    const auto density = [&](double tau, double tau_t) {
        double lp = gamma_log_pdf(tau, prior.alpha, prior.beta) +
                    gamma_log_pdf(tau_t, prior.alpha_t, prior.beta_t);
        for (const ExposureTable& table : tables) {
            lp += table.log_lik(tau, tau_t, p0);
            if (lp == kNegInf) break;
        }
        return lp;
    };

    RngStream rng(seed);

    double tau = 0.0, tau_t = 0.0, lp = kNegInf;
    for (std::size_t attempt = 0; attempt < mcmc.max_init_retries; ++attempt) {
        tau = sample_gamma(rng, prior.alpha, prior.beta);
        tau_t = sample_gamma(rng, prior.alpha_t, prior.beta_t);
        lp = density(tau, tau_t);
        if (std::isfinite(lp)) break;
    }
    if (!std::isfinite(lp)) {
        throw InconsistentObservationError(
            "sample_posterior: every prior draw has zero posterior density; "
            "the observations contradict the model");
    }

    // The walk lives in (log tau, log tau_t); the target there carries the
    // change-of-variables term u + v.
    double u = std::log(tau);
    double v = std::log(tau_t);
    double target = lp + u + v;

    double scale = mcmc.proposal_scale;
    std::size_t window_steps = 0, window_accepts = 0;
    std::size_t post_steps = 0, post_accepts = 0;

    McmcResult result;
    result.samples.reserve((mcmc.iterations - mcmc.burn_in + mcmc.thinning - 1) /
                           mcmc.thinning);

    for (std::size_t n = 0; n < mcmc.iterations; ++n) {
        const double pu = u + scale * rng.normal();
        const double pv = v + scale * rng.normal();
        const double ptau = std::exp(pu);
        const double ptau_t = std::exp(pv);
        const double plp = density(ptau, ptau_t);
        const double ptarget = plp + pu + pv;

        bool accept = false;
        if (ptarget > kNegInf) {
            const double diff = ptarget - target;
            if (diff >= 0.0) {
                accept = true;
            } else {
                const double w = rng.uniform01();
                accept = w == 0.0 || std::log(w) < diff;
            }
        }
        if (accept) {
            u = pu;
            v = pv;
            tau = ptau;
            tau_t = ptau_t;
            lp = plp;
            target = ptarget;
        }

        if (n < mcmc.burn_in) {
            ++window_steps;
            window_accepts += accept ? 1 : 0;
            if (mcmc.adapt && window_steps == 50) {
                const double rate =
                    static_cast<double>(window_accepts) / static_cast<double>(window_steps);
                if (rate < 0.2) {
                    scale *= 0.8;
                } else if (rate > 0.5) {
                    scale *= 1.25;
                }
                scale = std::clamp(scale, 1e-3, 10.0);
                window_steps = 0;
                window_accepts = 0;
            }
        } else {
            ++post_steps;
            post_accepts += accept ? 1 : 0;
            if ((n - mcmc.burn_in) % mcmc.thinning == 0) {
                result.samples.push_back({tau, tau_t, lp});
            }
        }
    }

    result.acceptance_rate =
        static_cast<double>(post_accepts) / static_cast<double>(post_steps);
    result.final_proposal_scale = scale;
    return result;
}

RiskMap refined_risk_map(std::span<const PosteriorSample> posterior,
                         std::span<const Trajectory> patients,
                         const GridSpec& spec, double p0, double eps) {
    if (posterior.empty()) {
        throw DomainError("refined_risk_map: posterior sample is empty");
    }
    if (posterior.size() == 1) {
        // The predictive mean over one sample is that sample's map itself.
        return build_risk_map(
            patients, RiskParams::from_precisions(p0, posterior[0].tau, posterior[0].tau_t),
            spec, eps);
    }

    std::map<CellIndex, double> risk_sum;
    double tau_sum = 0.0, tau_t_sum = 0.0;
    for (const PosteriorSample& s : posterior) {
        tau_sum += s.tau;
        tau_t_sum += s.tau_t;
        const RiskMap m = build_risk_map(
            patients, RiskParams::from_precisions(p0, s.tau, s.tau_t), spec, eps);
        for (const MapEntry& e : m.entries()) {
            risk_sum[e.index] += -std::expm1(e.log_q);
        }
    }

    const double inv = 1.0 / static_cast<double>(posterior.size());
    std::vector<MapEntry> entries;
    entries.reserve(risk_sum.size());
    for (const auto& [idx, sum] : risk_sum) {
        const double mean_risk = sum * inv;
        if (mean_risk >= eps) {
            entries.push_back({idx, log1m_clamped(mean_risk)});
        }
    }
    return RiskMap(spec,
                   RiskParams::from_precisions(p0, tau_sum * inv, tau_t_sum * inv),
                   eps, std::move(entries));
}

} // namespace risktrace
