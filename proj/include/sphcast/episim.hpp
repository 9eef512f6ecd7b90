/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_EPISIM_HPP
#define SPHCAST_EPISIM_HPP

#include "sphcast/connectivity.hpp"
#include "sphcast/panel.hpp"
#include "sphcast/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sphcast {

struct EpiRegion {
    std::string id;
    std::string name;
    double population = 0.0;
    long seed_day = 0;      // day the initial infections are injected
    double seed_size = 0.0; // persons moved out of S at seed_day
};

/// Parameters of the coupled compartmental system. The cross-region force of
/// infection blends local prevalence with the connectivity-weighted average
/// of the other regions' prevalence; kappa = 0 recovers fully independent
/// SIR/SEIR dynamics per region.
struct EpiParams {
    bool seir = true;       // false: SIR (no exposed compartment)
    double beta = 0.3;      // transmission rate, 1/day
    double gamma = 0.1;     // recovery rate, 1/day
    double sigma = 0.25;    // incubation exit rate, 1/day (SEIR only)
    double hosp_frac = 0.03;
    long hosp_lag = 5;      // days from case to admission
    double kappa = 0.0;     // coupling strength in [0,1]
    double dt = 0.25;       // RK4 step, must divide one day
    std::vector<EpiRegion> regions;
    DirectionalWeights coupling; // required when kappa > 0 and >= 2 regions

    void validate() const {
        if (!(beta > 0.0) || !(gamma > 0.0)) throw ValidationError("epi rates must be positive");
        if (seir && !(sigma > 0.0)) throw ValidationError("sigma must be positive for SEIR");
        if (hosp_frac < 0.0 || hosp_frac > 1.0) throw ValidationError("hosp_frac must be in [0,1]");
        if (hosp_lag < 0) throw ValidationError("hosp_lag must be >= 0");
        if (kappa < 0.0 || kappa > 1.0) throw ValidationError("kappa must be in [0,1]");
        if (!(dt > 0.0) || std::abs(1.0 / dt - std::round(1.0 / dt)) > 1e-9)
            throw ValidationError("dt must evenly divide one day");
        if (regions.empty()) throw ValidationError("need at least one region");
        for (const auto& r : regions) {
            if (!(r.population > 0.0)) throw ValidationError("region '" + r.id + "' needs positive population");
            if (r.seed_size < 0.0 || r.seed_size > r.population)
                throw ValidationError("region '" + r.id + "' has invalid seed size");
        }
        if (kappa > 0.0 && regions.size() > 1 && coupling.n() != regions.size())
            throw ValidationError("coupling weights must match region count when kappa > 0");
    }
};

/// Compartments for every region plus the cumulative case counter feeding the
/// observation model. All values are real persons; S+E+I+R stays constant.
struct EpiState {
    std::vector<double> S, E, I, R;
    std::vector<double> cumulative_cases; // E->I (or S->I) flow, integrated

    static EpiState start(const EpiParams& p) {
        EpiState s;
        const std::size_t n = p.regions.size();
        s.S.resize(n); s.E.assign(n, 0.0); s.I.assign(n, 0.0); s.R.assign(n, 0.0);
        s.cumulative_cases.assign(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) s.S[r] = p.regions[r].population;
        return s;
    }
};

namespace detail {

struct EpiDeriv {
    std::vector<double> dS, dE, dI, dR, dC;
};

inline void epi_derivative(const EpiParams& p, const std::vector<double>& S,
                           const std::vector<double>& E, const std::vector<double>& I,
                           EpiDeriv& d) {
    const std::size_t n = p.regions.size();
    d.dS.assign(n, 0.0); d.dE.assign(n, 0.0); d.dI.assign(n, 0.0); d.dR.assign(n, 0.0);
    d.dC.assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double N = p.regions[r].population;
        double i_eff = (1.0 - p.kappa) * I[r];
        if (p.kappa > 0.0 && n > 1) {
            double imported = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                imported += p.coupling.weights(r, j) * I[j] / p.regions[j].population;
            i_eff += p.kappa * N * imported;
        } else if (p.kappa > 0.0) {
            i_eff += p.kappa * I[r]; // single region: no neighbors to import from
        }
        const double foi = p.beta * i_eff * S[r] / N;
        d.dS[r] = -foi;
        if (p.seir) {
            const double onset = p.sigma * E[r];
            d.dE[r] = foi - onset;
            d.dI[r] = onset - p.gamma * I[r];
            d.dC[r] = onset;
        } else {
            d.dI[r] = foi - p.gamma * I[r];
            d.dC[r] = foi;
        }
        d.dR[r] = p.gamma * I[r];
    }
}

inline void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

} // namespace detail

/// One classical RK4 step of length dt over the full coupled system.
inline void seir_step(EpiState& state, const EpiParams& p, double dt) {
    const std::size_t n = p.regions.size();
    detail::EpiDeriv k1, k2, k3, k4;
    std::vector<double> S = state.S, E = state.E, I = state.I;

    detail::epi_derivative(p, state.S, state.E, state.I, k1);
    S = state.S; E = state.E; I = state.I;
    detail::axpy(S, 0.5 * dt, k1.dS); detail::axpy(E, 0.5 * dt, k1.dE); detail::axpy(I, 0.5 * dt, k1.dI);
    detail::epi_derivative(p, S, E, I, k2);
    S = state.S; E = state.E; I = state.I;
    detail::axpy(S, 0.5 * dt, k2.dS); detail::axpy(E, 0.5 * dt, k2.dE); detail::axpy(I, 0.5 * dt, k2.dI);
    detail::epi_derivative(p, S, E, I, k3);
    S = state.S; E = state.E; I = state.I;
    detail::axpy(S, dt, k3.dS); detail::axpy(E, dt, k3.dE); detail::axpy(I, dt, k3.dI);
    detail::epi_derivative(p, S, E, I, k4);

    const double w = dt / 6.0;
    for (std::size_t r = 0; r < n; ++r) {
        state.S[r] += w * (k1.dS[r] + 2.0 * k2.dS[r] + 2.0 * k3.dS[r] + k4.dS[r]);
        state.E[r] += w * (k1.dE[r] + 2.0 * k2.dE[r] + 2.0 * k3.dE[r] + k4.dE[r]);
        state.I[r] += w * (k1.dI[r] + 2.0 * k2.dI[r] + 2.0 * k3.dI[r] + k4.dI[r]);
        state.R[r] += w * (k1.dR[r] + 2.0 * k2.dR[r] + 2.0 * k3.dR[r] + k4.dR[r]);
        state.cumulative_cases[r] += w * (k1.dC[r] + 2.0 * k2.dC[r] + 2.0 * k3.dC[r] + k4.dC[r]);
        for (double v : {state.S[r], state.E[r], state.I[r], state.R[r]})
            if (v < -1e-9)
                throw RuntimeFailure("integrator produced negative compartment in region '" +
                                     p.regions[r].id + "'");
    }
}

/// Daily state snapshots plus per-day incident cases (the E->I or S->I flow
/// integrated over each day).
struct EpiTrajectory {
    std::vector<EpiState> daily_states;       // days + 1 snapshots, index = day
    Tensor2 daily_cases;                      // [regions x days]
};

inline EpiTrajectory simulate_trajectory(const EpiParams& p, std::size_t days) {
    p.validate();
    const std::size_t n = p.regions.size();
    const std::size_t steps_per_day = static_cast<std::size_t>(std::round(1.0 / p.dt));
    EpiTrajectory traj;
    traj.daily_cases = Tensor2(n, days);
    EpiState state = EpiState::start(p);
    traj.daily_states.reserve(days + 1);
    for (std::size_t day = 0; day < days; ++day) {
        for (std::size_t r = 0; r < n; ++r)
            if (p.regions[r].seed_day == static_cast<long>(day) && p.regions[r].seed_size > 0.0) {
                double s = std::min(p.regions[r].seed_size, state.S[r]);
                state.S[r] -= s;
                if (p.seir) state.E[r] += s;
                else { state.I[r] += s; state.cumulative_cases[r] += s; }
            }
        traj.daily_states.push_back(state);
        std::vector<double> before = state.cumulative_cases;
        for (std::size_t step = 0; step < steps_per_day; ++step) seir_step(state, p, p.dt);
        for (std::size_t r = 0; r < n; ++r) traj.daily_cases(r, day) = state.cumulative_cases[r] - before[r];
    }
    traj.daily_states.push_back(state);
    return traj;
}

/// Observation model on top of the trajectory: daily admissions are a lagged
/// fraction of incident cases. With noise enabled, both observed channels get
/// independent multiplicative log-normal factors (seeded); the latent
/// admissions stay an exact lagged fraction of the latent cases. The returned
/// panel is valid input for the data/pipeline modules.
inline TimePanel simulate_panel(const EpiParams& p, std::size_t days, std::uint64_t seed,
                                Date start_date, double noise_sigma = 0.0) {
    if (days < static_cast<std::size_t>(p.hosp_lag) + 1)
        throw ValidationError("simulation needs days >= hosp_lag + 1");
    EpiTrajectory traj = simulate_trajectory(p, days);
    const std::size_t n = p.regions.size();

    std::vector<Location> locations;
    for (const auto& r : p.regions) {
        double rounded = std::round(r.population);
        if (std::abs(rounded - r.population) > 1e-9 || rounded <= 0.0)
            throw ValidationError("region '" + r.id + "' population must be a positive integer");
        locations.push_back(Location{r.id, r.name.empty() ? r.id : r.name,
                                     static_cast<long long>(rounded)});
    }
    TimePanel panel(locations, start_date, days);

    Tensor2 cases(n, days), hosp(n, days);
    Rng rng(seed);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t d = 0; d < days; ++d) {
            double cv = traj.daily_cases(r, d);
            double hv = 0.0;
            if (static_cast<long>(d) >= p.hosp_lag)
                hv = p.hosp_frac * traj.daily_cases(r, d - static_cast<std::size_t>(p.hosp_lag));
            if (noise_sigma > 0.0) {
                cv *= std::exp(noise_sigma * rng.normal());
                hv *= std::exp(noise_sigma * rng.normal());
            }
            cases(r, d) = cv;
            hosp(r, d) = hv;
        }
    panel.set_channel("cases", std::move(cases));
    panel.set_channel("hospitalizations", std::move(hosp));
    return panel;
}

} // namespace sphcast

#endif
