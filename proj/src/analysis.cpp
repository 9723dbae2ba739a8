#include "pderl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pderl {
namespace {
constexpr double kDensityFloor = 1e-12;
constexpr double kBandwidthFloor = 1e-3;
constexpr double kParentFitnessFloor = 1e-6;
}  // namespace

VisitationSample collect_visitation(Environment& env, const Policy& policy, int episodes,
                                    std::uint64_t seed) {
    if (episodes < 1) {
        throw std::invalid_argument("collect_visitation: episode count must be positive");
    }
    VisitationSample sample;
    sample.episode_count = episodes;
    for (int e = 0; e < episodes; ++e) {
        EpisodeResult episode =
            run_episode(env, policy, derive_seed(seed, {static_cast<std::uint64_t>(e)}));
        for (auto& transition : episode.transitions) {
            sample.states.push_back(std::move(transition.state));
        }
    }
    return sample;
}

double DensityModel::density(double x, double y) const {
    const double h2 = bandwidth * bandwidth;
    const double norm = 1.0 / (2.0 * M_PI * h2 * points.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        const double dx = x - points(0, i);
        const double dy = y - points(1, i);
        total += std::exp(-(dx * dx + dy * dy) / (2.0 * h2));
    }
    return norm * total;
}

DensityModel fit_kde(const VisitationSample& sample, double bandwidth) {
    if (sample.states.size() < 2) {
        throw std::invalid_argument("fit_kde: need at least two states");
    }
    DensityModel model;
    const auto n = static_cast<Eigen::Index>(sample.states.size());
    model.points.resize(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector& state = sample.states[static_cast<std::size_t>(i)];
        if (state.size() < 2) {
            throw std::invalid_argument("fit_kde: states must have at least two dimensions");
        }
        model.points(0, i) = state[0];
        model.points(1, i) = state[1];
    }
    if (bandwidth > 0.0) {
        model.bandwidth = bandwidth;
    } else {
        // Scott's rule in two dimensions with a pooled per-axis spread.
        const Vector means = model.points.rowwise().mean();
        const double var_x = (model.points.row(0).array() - means[0]).square().mean();
        const double var_y = (model.points.row(1).array() - means[1]).square().mean();
        const double pooled = std::sqrt((var_x + var_y) / 2.0);
        model.bandwidth = std::max(kBandwidthFloor,
                                   pooled * std::pow(static_cast<double>(n), -1.0 / 6.0));
    }
    return model;
}

GridSpec default_grid(const DensityModel& p, const DensityModel& q, int resolution) {
    GridSpec grid;
    grid.nx = resolution;
    grid.ny = resolution;
    const double pad = 3.0 * std::max(p.bandwidth, q.bandwidth);
    grid.x_min = std::min(p.points.row(0).minCoeff(), q.points.row(0).minCoeff()) - pad;
    grid.x_max = std::max(p.points.row(0).maxCoeff(), q.points.row(0).maxCoeff()) + pad;
    grid.y_min = std::min(p.points.row(1).minCoeff(), q.points.row(1).minCoeff()) - pad;
    grid.y_max = std::max(p.points.row(1).maxCoeff(), q.points.row(1).maxCoeff()) + pad;
    return grid;
}

KlResult kl_divergence(const DensityModel& p, const DensityModel& q, const GridSpec& grid) {
    if (grid.nx < 2 || grid.ny < 2 || grid.x_max <= grid.x_min || grid.y_max <= grid.y_min) {
        throw std::invalid_argument("kl_divergence: degenerate grid");
    }
    KlResult result;
    const double cell = grid.dx() * grid.dy();
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = grid.x_min + (ix + 0.5) * grid.dx();
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double y = grid.y_min + (iy + 0.5) * grid.dy();
            const double pd = p.density(x, y);
            if (pd <= 0.0) {
                continue;
            }
            const double qd = std::max(q.density(x, y), kDensityFloor);
            result.value += pd * std::log(pd / qd) * cell;
            result.p_mass += pd * cell;
        }
    }
    result.coarse_grid_warning = std::abs(result.p_mass - 1.0) > 0.05;
    return result;
}

void export_density_grid(const std::string& path, const DensityModel& p, const DensityModel& q,
                         const GridSpec& grid) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << "x\ty\tdensity_p\tdensity_q\n";
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = grid.x_min + (ix + 0.5) * grid.dx();
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double y = grid.y_min + (iy + 0.5) * grid.dy();
            out << x << '\t' << y << '\t' << p.density(x, y) << '\t' << q.density(x, y) << '\n';
        }
    }
}

OffspringReport normalized_offspring_fitness(double parent1_fitness, double parent2_fitness,
                                             const std::vector<OffspringRow>& children) {
    OffspringReport report;
    report.parent1_fitness = parent1_fitness;
    report.parent2_fitness = parent2_fitness;
    report.absolute_fallback = std::abs(parent1_fitness) < kParentFitnessFloor;
    report.rows = children;
    for (OffspringRow& row : report.rows) {
        row.value = report.absolute_fallback ? row.fitness : row.fitness / parent1_fitness;
    }
    return report;
}

}  // namespace pderl
