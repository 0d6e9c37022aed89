#include "qm/domains.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "qm/policy.hpp"

namespace qm {

double Axis::width() const {
    return periodic ? (hi - lo) / static_cast<double>(n) : (hi - lo) / static_cast<double>(n - 1);
}

double Axis::center(std::size_t i) const {
    // Written around the midpoint so symmetric axes have exactly antisymmetric centers.
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    const auto k = static_cast<double>(i), m = static_cast<double>(n);
    return periodic ? mid + half * (2.0 * k + 1.0 - m) / m : mid + half * (2.0 * k - (m - 1.0)) / (m - 1.0);
}

double Axis::wrap(double v) const {
    if (!periodic) return v;
    const double span = hi - lo;
    double r = std::fmod(v - lo, span);
    if (r < 0.0) r += span;
    if (r >= span) r = 0.0;
    return lo + r;
}

std::size_t Axis::nearest(double v) const {
    const double w = width();
    if (periodic) {
        // Centers sit at lo + (i + 1/2) w; ceil resolves ties downward.
        const double t = (wrap(v) - lo) / w - 1.0;
        auto i = static_cast<long long>(std::ceil(t));
        if (i < 0) i = 0;
        return static_cast<std::size_t>(i) % n;
    }
    const double t = (v - lo) / w - 0.5;
    const double i = std::ceil(t);
    if (i <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(i), n - 1);
}

namespace {

using Sparse = std::vector<std::pair<std::uint32_t, double>>;

// Shared kernel for the dense and sparse forms.
Sparse gaussian_cells(double mu, double sigma, const Axis& axis, bool* clamped) {
    const std::size_t n = axis.n;
    std::vector<double> raw(n, 0.0);
    double peak = 0.0;
    if (axis.periodic) {
        mu = axis.wrap(mu);
        const double span = axis.hi - axis.lo;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = -3; k <= 3; ++k) {
                const double z = (axis.center(i) - mu + k * span) / sigma;
                s += std::exp(-0.5 * z * z);
            }
            raw[i] = s;
            peak = std::max(peak, s);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (axis.center(i) - mu) / sigma;
            raw[i] = std::exp(-0.5 * z * z);
            peak = std::max(peak, raw[i]);
        }
    }
    Sparse out;
    if (peak < kPruneThreshold) {
        if (clamped) *clamped = true;
        out.emplace_back(static_cast<std::uint32_t>(axis.nearest(mu)), 1.0);
        return out;
    }
    if (clamped) *clamped = false;
    double total = 0.0;
    for (double r : raw) total += r;
    double kept = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = raw[i] / total;
        if (p < kPruneThreshold) continue;
        out.emplace_back(static_cast<std::uint32_t>(i), p);
        kept += p;
    }
    for (auto& e : out) e.second /= kept;
    return out;
}

void check_axis_sigma(double sigma) {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
}

// Product of independent axis distributions in row-major state order,
// pruned below 1e-12 and renormalized.
template <std::size_t N>
std::vector<Successor> product_row(const std::array<const Sparse*, N>& axes, const std::array<std::size_t, N>& dims) {
    std::vector<Successor> row;
    std::array<std::size_t, N> idx{};
    for (;;) {
        double p = 1.0;
        std::size_t state = 0;
        for (std::size_t a = 0; a < N; ++a) {
            p *= (*axes[a])[idx[a]].second;
            state = state * dims[a] + (*axes[a])[idx[a]].first;
        }
        if (p >= kPruneThreshold) row.push_back({static_cast<StateId>(state), p});
        std::size_t a = N;
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a]->size()) break;
            idx[a] = 0;
            if (a == 0) {
                double total = 0.0;
                for (const auto& s : row) total += s.p;
                for (auto& s : row) s.p /= total;
                return row;
            }
        }
    }
}

template <typename Fn>
void for_states(std::size_t n, Exec exec, Fn&& fn) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t s = 0; s < sn; ++s) fn(static_cast<StateId>(s));
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t s = 0; s < sn; ++s) fn(static_cast<StateId>(s));
    }
}

std::vector<std::vector<double>> uniform_actions(std::size_t n, double lo, double hi) {
    std::vector<std::vector<double>> emb(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<double>(k), m = static_cast<double>(n);
        emb[k] = {n == 1 ? mid : mid + half * (2.0 * kk - (m - 1.0)) / (m - 1.0)};
    }
    return emb;
}

}  // namespace

DiscreteGaussian discretize_gaussian(double mu, double sigma, const Axis& axis) {
    check_axis_sigma(sigma);
    if (axis.n < 2) throw ValidationError("a grid needs at least 2 cells");
    if (!(axis.hi > axis.lo)) throw ValidationError("axis range is empty");
    DiscreteGaussian g;
    g.probs.assign(axis.n, 0.0);
    for (auto [i, p] : gaussian_cells(mu, sigma, axis, &g.clamped)) g.probs[i] = p;
    return g;
}

// --- maze -------------------------------------------------------------------

GridDomain build_maze(const MazeSpec& spec) {
    const std::size_t W = spec.width, H = spec.height;
    if (W == 0 || H == 0) throw ValidationError("maze needs positive width and height");
    if (spec.start_x >= W || spec.start_y >= H) throw ValidationError("maze start out of range");
    if (spec.goal_x >= W || spec.goal_y >= H) throw ValidationError("maze goal out of range");

    // Success probability of moving from a cell in each direction.
    std::vector<std::array<double, 4>> door(W * H);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
            door[y * W + x] = {x + 1 < W ? 1.0 : 0.0, x > 0 ? 1.0 : 0.0, y + 1 < H ? 1.0 : 0.0, y > 0 ? 1.0 : 0.0};
    auto neighbor = [&](std::size_t x, std::size_t y, Direction d) -> std::optional<std::size_t> {
        switch (d) {
        case Direction::east: return x + 1 < W ? std::optional(y * W + x + 1) : std::nullopt;
        case Direction::west: return x > 0 ? std::optional(y * W + x - 1) : std::nullopt;
        case Direction::south: return y + 1 < H ? std::optional((y + 1) * W + x) : std::nullopt;
        case Direction::north: return y > 0 ? std::optional((y - 1) * W + x) : std::nullopt;
        }
        return std::nullopt;
    };
    auto opposite = [](Direction d) {
        switch (d) {
        case Direction::east: return Direction::west;
        case Direction::west: return Direction::east;
        case Direction::south: return Direction::north;
        case Direction::north: return Direction::south;
        }
        return d;
    };
    for (const Door& d : spec.doors) {
        if (d.x >= W || d.y >= H) throw ValidationError("door cell out of range");
        if (!(d.p >= 0.0 && d.p <= 1.0)) throw ValidationError("door probability must lie in [0, 1]");
        auto nb = neighbor(d.x, d.y, d.dir);
        if (!nb) continue;  // outer boundary stays solid
        door[d.y * W + d.x][static_cast<std::size_t>(d.dir)] = d.p;
        door[*nb][static_cast<std::size_t>(opposite(d.dir))] = d.p;
    }

    const std::size_t S = W * H;
    const StateId goal = static_cast<StateId>(spec.goal_y * W + spec.goal_x);
    std::vector<std::vector<Successor>> rows(S * 5);
    std::vector<double> costs(S * 5, 1.0);
    std::vector<std::string> labels(S);
    GridDomain dom;
    dom.coord_dim = 2;
    dom.coords.resize(S * 2);
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
            const auto s = static_cast<StateId>(y * W + x);
            labels[s] = "(" + std::to_string(x) + "," + std::to_string(y) + ")";
            dom.coords[s * 2] = static_cast<double>(x);
            dom.coords[s * 2 + 1] = static_cast<double>(y);
            rows[s * 5 + kStay] = {{s, 1.0}};
            for (std::size_t d = 0; d < 4; ++d) {
                const double p = door[s][d];
                auto& row = rows[s * 5 + 1 + d];
                auto nb = neighbor(x, y, static_cast<Direction>(d));
                if (!nb || p <= 0.0)
                    row = {{s, 1.0}};
                else if (p >= 1.0)
                    row = {{static_cast<StateId>(*nb), 1.0}};
                else if (*nb < s)
                    row = {{static_cast<StateId>(*nb), p}, {s, 1.0 - p}};
                else
                    row = {{s, 1.0 - p}, {static_cast<StateId>(*nb), p}};
            }
        }
    }
    costs[goal * 5 + kStay] = 0.0;
    dom.model = assemble_model(StateSpace{S, std::move(labels)},
                               ActionSpace{5, {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}}, std::move(rows),
                               std::move(costs), {{goal, kStay}});
    dom.start = static_cast<StateId>(spec.start_y * W + spec.start_x);
    dom.goal = goal;
    return dom;
}

MazeSpec random_maze(std::size_t width, std::size_t height, std::uint64_t seed, double p_min, double p_max,
                     double wall_fraction) {
    MazeSpec spec;
    spec.width = width;
    spec.height = height;
    spec.goal_x = width - 1;
    spec.goal_y = height - 1;
    std::mt19937_64 rng(seed);
    auto draw = [&] {
        if (wall_fraction > 0.0 && uniform01(rng) < wall_fraction) return 0.0;
        return p_min + (p_max - p_min) * uniform01(rng);
    };
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            if (x + 1 < width) spec.doors.push_back({x, y, Direction::east, draw()});
            if (y + 1 < height) spec.doors.push_back({x, y, Direction::south, draw()});
        }
    return spec;
}

// --- reference systems ------------------------------------------------------

MdpModel build_example_a(bool unit_costs) {
    enum : StateId { A, B, C, D, E };
    auto c = [&](double g) { return unit_costs ? 1.0 : g; };
    MdpBuilder b(5, 2);
    b.labels({"A", "B", "C", "D", "E"});
    b.transition(A, 0, B, 1.0).cost(A, 0, c(3.0));
    b.transition(A, 1, C, 0.5).transition(A, 1, D, 0.5).cost(A, 1, c(2.0));
    b.transition(B, 0, E, 1.0).cost(B, 0, c(2.0));
    b.transition(C, 0, E, 1.0).cost(C, 0, c(2.5));
    b.transition(D, 0, E, 1.0).cost(D, 0, c(2.5));
    b.transition(E, 0, E, 1.0).cost(E, 0, 0.0).goal_stay(E, 0);
    return b.build();
}

MdpModel build_example_b(double epsilon, double omega) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    enum : StateId { A, B, C, D };
    MdpBuilder b(4, 2);
    b.labels({"A", "B", "C", "D"});
    b.transition(A, 0, B, 1.0).cost(A, 0, 1.0);
    b.transition(A, 1, D, 1.0).cost(A, 1, omega);
    b.transition(B, 0, C, epsilon).transition(B, 0, D, 1.0 - epsilon).cost(B, 0, 1.0);
    b.transition(C, 0, C, 1.0).cost(C, 0, 1.0);
    b.transition(D, 0, D, 1.0).cost(D, 0, 0.0).goal_stay(D, 0);
    return b.build();
}

// --- pendulum ---------------------------------------------------------------

void check_pendulum(const PendulumParams& p) {
    auto odd = [](std::size_t n) { return n >= 3 && n % 2 == 1; };
    if (!odd(p.n_theta) || !odd(p.n_thetadot) || !odd(p.n_actions))
        throw ValidationError("pendulum grid sizes must be odd and at least 3");
    if (!(p.u_max > 0.0 && p.u_max < 1.0)) throw ValidationError("u_max must lie in (0, 1)");
    if (!(p.sigma_x > 0.0 && p.sigma_y > 0.0)) throw ValidationError("pendulum sigmas must be positive");
    if (!(p.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(p.thetadot_range > 0.0)) throw ValidationError("thetadot range must be positive");
}

GridDomain build_pendulum(const PendulumParams& p, Exec exec) {
    check_pendulum(p);
    const double pi = std::numbers::pi;
    const Axis theta{-pi, pi, p.n_theta, true};
    const Axis omega{-p.thetadot_range, p.thetadot_range, p.n_thetadot, false};
    const std::size_t S = p.n_theta * p.n_thetadot, A = p.n_actions;
    const auto emb = uniform_actions(A, -p.u_max, p.u_max);

    std::vector<std::vector<Successor>> rows(S * A);
    for_states(S, exec, [&](StateId s) {
        const double th = theta.center(s / p.n_thetadot);
        const double w = omega.center(s % p.n_thetadot);
        for (ActionId u = 0; u < A; ++u) {
            const double acc = emb[u][0] + std::sin(th);
            const Sparse gx = gaussian_cells(th + p.dt * w + 0.5 * p.dt * p.dt * acc, p.sigma_x, theta, nullptr);
            const Sparse gy = gaussian_cells(w + p.dt * acc, p.sigma_y, omega, nullptr);
            rows[static_cast<std::size_t>(s) * A + u] =
                product_row<2>({&gx, &gy}, {p.n_theta, p.n_thetadot});
        }
    });

    GridDomain dom;
    dom.goal = static_cast<StateId>((p.n_theta / 2) * p.n_thetadot + p.n_thetadot / 2);
    dom.start = static_cast<StateId>(theta.nearest(pi) * p.n_thetadot + p.n_thetadot / 2);
    const ActionId zero_torque = static_cast<ActionId>(A / 2);
    std::vector<double> costs(S * A, 1.0);
    costs[static_cast<std::size_t>(dom.goal) * A + zero_torque] = 0.0;
    dom.coord_dim = 2;
    dom.coords.resize(S * 2);
    for (StateId s = 0; s < S; ++s) {
        dom.coords[s * 2] = theta.center(s / p.n_thetadot);
        dom.coords[s * 2 + 1] = omega.center(s % p.n_thetadot);
    }
    dom.model = assemble_model(StateSpace{S, {}}, ActionSpace{A, emb}, std::move(rows), std::move(costs),
                               {{dom.goal, zero_torque}});
    return dom;
}

// --- Dubins -----------------------------------------------------------------

void check_dubins(const DubinsParams& p) {
    if (p.n_x < 3 || p.n_y < 3 || p.n_theta < 3) throw ValidationError("Dubins grids need at least 3 cells");
    if (p.n_actions < 1) throw ValidationError("Dubins needs at least one action");
    if (!(p.sigma_x > 0.0 && p.sigma_y > 0.0 && p.sigma_theta > 0.0))
        throw ValidationError("Dubins sigmas must be positive");
    if (!(p.u_l > 0.0)) throw ValidationError("linear speed must be positive");
    if (!(p.dt > 0.0) || !(p.extent > 0.0)) throw ValidationError("dt and extent must be positive");
}

GridDomain build_dubins(const DubinsParams& p, Exec exec) {
    check_dubins(p);
    const double pi = std::numbers::pi;
    const Axis ax{-p.extent, p.extent, p.n_x, false};
    const Axis ay{-p.extent, p.extent, p.n_y, false};
    const Axis at{-pi, pi, p.n_theta, true};
    const std::size_t S = p.n_x * p.n_y * p.n_theta, A = p.n_actions;
    const auto emb = uniform_actions(A, -1.0, 1.0);

    // x depends on (x, theta), y on (y, theta), theta on (theta, u).
    std::vector<Sparse> gx(p.n_x * p.n_theta), gy(p.n_y * p.n_theta), gt(p.n_theta * A);
    for (std::size_t i = 0; i < p.n_x; ++i)
        for (std::size_t k = 0; k < p.n_theta; ++k)
            gx[i * p.n_theta + k] =
                gaussian_cells(ax.center(i) + p.u_l * std::cos(at.center(k)) * p.dt, p.sigma_x, ax, nullptr);
    for (std::size_t j = 0; j < p.n_y; ++j)
        for (std::size_t k = 0; k < p.n_theta; ++k)
            gy[j * p.n_theta + k] =
                gaussian_cells(ay.center(j) + p.u_l * std::sin(at.center(k)) * p.dt, p.sigma_y, ay, nullptr);
    for (std::size_t k = 0; k < p.n_theta; ++k)
        for (ActionId u = 0; u < A; ++u)
            gt[k * A + u] = gaussian_cells(at.center(k) + emb[u][0] * p.dt, p.sigma_theta, at, nullptr);

    std::vector<std::vector<Successor>> rows(S * A);
    for_states(S, exec, [&](StateId s) {
        const std::size_t k = s % p.n_theta;
        const std::size_t j = (s / p.n_theta) % p.n_y;
        const std::size_t i = s / (p.n_theta * p.n_y);
        for (ActionId u = 0; u < A; ++u)
            rows[static_cast<std::size_t>(s) * A + u] = product_row<3>(
                {&gx[i * p.n_theta + k], &gy[j * p.n_theta + k], &gt[k * A + u]}, {p.n_x, p.n_y, p.n_theta});
    });

    GridDomain dom;
    dom.coord_dim = 3;
    dom.coords.resize(S * 3);
    for (StateId s = 0; s < S; ++s) {
        dom.coords[s * 3] = ax.center(s / (p.n_theta * p.n_y));
        dom.coords[s * 3 + 1] = ay.center((s / p.n_theta) % p.n_y);
        dom.coords[s * 3 + 2] = at.center(s % p.n_theta);
    }
    const std::size_t oi = ax.nearest(0.0), oj = ay.nearest(0.0), ok = at.nearest(0.0);
    dom.start = dom.goal = static_cast<StateId>((oi * p.n_y + oj) * p.n_theta + ok);
    dom.model = assemble_model(StateSpace{S, {}}, ActionSpace{A, emb}, std::move(rows),
                               std::vector<double>(S * A, p.dt), {});
    return dom;
}

StateId dubins_mirror(const DubinsParams& p, StateId s) {
    const std::size_t k = s % p.n_theta;
    const std::size_t j = (s / p.n_theta) % p.n_y;
    const std::size_t i = s / (p.n_theta * p.n_y);
    return static_cast<StateId>((i * p.n_y + (p.n_y - 1 - j)) * p.n_theta + (p.n_theta - 1 - k));
}

}  // namespace qm
