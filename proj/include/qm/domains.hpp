#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qm/exec.hpp"
#include "qm/model.hpp"

namespace qm {

/// One discretized coordinate. Periodic axes place n cell centers at
/// lo + (i + 1/2) w with w = (hi - lo) / n; bounded axes place n grid points
/// on [lo, hi] inclusive.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;
    bool periodic = false;

    double width() const;
    double center(std::size_t i) const;
    /// Wraps into [lo, hi) on periodic axes.
    double wrap(double v) const;
    /// Cell whose center is closest to v (lowest index on ties).
    std::size_t nearest(double v) const;
};

struct DiscreteGaussian {
    std::vector<double> probs;  // one entry per cell, sums to 1
    /// No cell center within the numerical support; all mass went to the
    /// nearest cell.
    bool clamped = false;
};

inline constexpr double kPruneThreshold = 1e-12;

/// Gaussian density at cell centers (summing images within +-3 periods on
/// periodic axes), entries below 1e-12 zeroed, renormalized.
DiscreteGaussian discretize_gaussian(double mu, double sigma, const Axis& axis);

/// A built model plus the coordinates of each state's cell center.
struct GridDomain {
    MdpModel model;
    std::size_t coord_dim = 0;
    std::vector<double> coords;  // num_states * coord_dim
    StateId start = 0;
    StateId goal = 0;

    std::span<const double> coord(StateId x) const { return {coords.data() + x * coord_dim, coord_dim}; }
};

// --- probabilistic maze ---------------------------------------------------

enum class Direction : std::uint8_t { east, west, south, north };

struct Door {
    std::size_t x = 0, y = 0;
    Direction dir = Direction::east;
    double p = 1.0;  // 0 = solid wall
};

/// Grid maze. Edges default to open (p = 1); each Door entry sets the
/// success probability of crossing the edge between a cell and its
/// neighbor, in both directions. The outer boundary is solid.
struct MazeSpec {
    std::size_t width = 1, height = 1;
    std::vector<Door> doors;
    std::size_t start_x = 0, start_y = 0;
    std::size_t goal_x = 0, goal_y = 0;
};

/// Action order of maze models.
enum MazeAction : ActionId { kStay = 0, kEast = 1, kWest = 2, kSouth = 3, kNorth = 4 };

GridDomain build_maze(const MazeSpec& spec);

/// Every interior edge is a door with probability drawn uniformly in
/// [p_min, p_max]; a `wall_fraction` of edges become solid walls.
MazeSpec random_maze(std::size_t width, std::size_t height, std::uint64_t seed, double p_min = 0.1,
                     double p_max = 1.0, double wall_fraction = 0.0);

// --- small reference systems ---------------------------------------------

/// Five states A..E, goal E. `unit_costs` replaces every positive cost by 1.
MdpModel build_example_a(bool unit_costs = false);

/// Four states A..D with prison C and goal D.
MdpModel build_example_b(double epsilon, double omega);

// --- under-actuated pendulum ---------------------------------------------

struct PendulumParams {
    std::size_t n_theta = 51;
    std::size_t n_thetadot = 51;
    std::size_t n_actions = 21;
    double u_max = 0.5;
    double sigma_x = 0.2;
    double sigma_y = 0.2;
    double dt = 0.3;
    double thetadot_range = 3.0;
};

void check_pendulum(const PendulumParams& p);

/// State (theta, thetadot) with id = i_theta * n_thetadot + i_thetadot.
/// Start is the cell nearest theta = pi, thetadot = 0; goal is (0, 0).
GridDomain build_pendulum(const PendulumParams& params, Exec exec = Exec::parallel);

// --- Dubins car -------------------------------------------------------------

struct DubinsParams {
    std::size_t n_x = 51, n_y = 51, n_theta = 51;
    std::size_t n_actions = 11;
    double extent = 5.0;  // x, y in [-extent, extent]
    double u_l = 1.0;
    double sigma_x = 0.05, sigma_y = 0.05, sigma_theta = 0.05;
    double dt = 0.25;
};

void check_dubins(const DubinsParams& p);

/// State (x, y, theta) with id = (i_x * n_y + i_y) * n_theta + i_theta.
/// Start and goal are both the cell at the origin.
GridDomain build_dubins(const DubinsParams& params, Exec exec = Exec::parallel);

/// Dubins state index of the mirror image (x, -y, -theta).
StateId dubins_mirror(const DubinsParams& params, StateId s);

}  // namespace qm
