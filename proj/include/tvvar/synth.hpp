#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "tvvar/dataset.hpp"
#include "tvvar/model.hpp"
#include "tvvar/random.hpp"

namespace tvvar {

enum class SynthKind { planted_var, multiresolution };

struct SynthSpec {
    SynthKind kind = SynthKind::planted_var;
    Eigen::Index N = 10;
    Eigen::Index T = 200;
    Eigen::Index d = 1;
    Eigen::Index R = 3;
    Eigen::Index switch_t = 50;  // first column (0-based) of the fast segment
    double base_freq = 1.0 / 30.0;  // cycles per time step
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
    bool hard_splice = false;  // multiresolution: restart the phase at switch_t
    double spectral_cap = 0.95;
};

void validate(const SynthSpec& spec);

struct PlantedData {
    TimeSeriesMatrix series;
    FactorSet<double> truth;
};

// Planted low-rank time-varying VAR rolled forward from standard normal
// initial values. G is rescaled so max_t rho(A_t) equals spec.spectral_cap
// (rho of the companion form when d > 1).
PlantedData synth_planted_var(const SynthSpec& spec);

// R smooth random spatial patterns oscillating at base_freq before switch_t
// and at twice that rate afterwards.
TimeSeriesMatrix synth_multiresolution(const SynthSpec& spec);

// Spectral radius of A_t (companion form when d > 1).
double coefficient_spectral_radius(const FactorSet<double>& f, Eigen::Index t);

} // namespace tvvar
