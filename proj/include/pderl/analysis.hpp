#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pderl/env.hpp"
#include "pderl/net.hpp"

namespace pderl {

struct VisitationSample {
    std::vector<Vector> states;
    int episode_count = 0;
};

// States visited over `episodes` independently seeded rollouts.
VisitationSample collect_visitation(Environment& env, const Policy& policy, int episodes,
                                    std::uint64_t seed);

/// Isotropic Gaussian kernel density over the first two state dimensions.
struct DensityModel {
    Matrix points;  // 2 x n kernel centers
    double bandwidth = 0.0;

    double density(double x, double y) const;
};

// bandwidth <= 0 selects a Scott's-rule default: pooled std * n^(-1/6),
// floored at 1e-3 so degenerate point clouds stay well defined.
DensityModel fit_kde(const VisitationSample& sample, double bandwidth = 0.0);

struct GridSpec {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    int nx = 64, ny = 64;

    double dx() const { return (x_max - x_min) / nx; }
    double dy() const { return (y_max - y_min) / ny; }
};

// Bounding box of both models' kernel centers, padded by three bandwidths.
GridSpec default_grid(const DensityModel& p, const DensityModel& q, int resolution = 64);

struct KlResult {
    double value = 0.0;
    double p_mass = 0.0;  // quadrature integral of p over the grid
    bool coarse_grid_warning = false;  // p_mass deviates from 1 by more than 5%
};

// Midpoint-rule estimate of KL(p||q); q is floored at 1e-12 to keep the
// integrand finite on disjoint supports.
KlResult kl_divergence(const DensityModel& p, const DensityModel& q, const GridSpec& grid);

// Writes "x y density_p density_q" rows for external contour plotting.
void export_density_grid(const std::string& path, const DensityModel& p, const DensityModel& q,
                         const GridSpec& grid);

struct OffspringRow {
    std::string op;  // operator tag supplied by the caller
    double fitness = 0.0;
    double value = 0.0;  // fitness / parent1 fitness, or raw fitness on fallback
};

struct OffspringReport {
    double parent1_fitness = 0.0;
    double parent2_fitness = 0.0;
    bool absolute_fallback = false;  // parent1 fitness too close to zero for ratios
    std::vector<OffspringRow> rows;
};

OffspringReport normalized_offspring_fitness(double parent1_fitness, double parent2_fitness,
                                             const std::vector<OffspringRow>& children);

}  // namespace pderl
