#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace assure::grid {

// Integer cell coordinate. x indexes columns, y indexes rows, origin (0,0).
struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

// Continuous position or centroid, in cell units.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Per-step displacement in cells. Components may be fractional.
struct Displacement {
    double dx = 0.0;
    double dy = 0.0;
    friend bool operator==(const Displacement&, const Displacement&) = default;
};

inline Displacement operator+(const Displacement& a, const Displacement& b) {
    return {a.dx + b.dx, a.dy + b.dy};
}

// Fraction of each cell's mass that dissipates to its in-bounds 8-neighbours
// per propagation step. The leaked share is split equally among those
// neighbours, so no mass ever leaves the grid.
struct DiffusionParams {
    double leak = 0.0;
    friend bool operator==(const DiffusionParams&, const DiffusionParams&) = default;
};

// Raised when an update leaves zero mass everywhere: the prior and the
// evidence contradict each other and no posterior exists.
class VanishedBelief : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Probability distribution over a width x height grid, stored row-major.
// Densities are non-negative and sum to 1; construction goes through
// normalize()/uniform()/delta() so the invariant always holds.
class GridDistribution {
public:
    GridDistribution() = default;

    static GridDistribution uniform(int width, int height);
    static GridDistribution delta(int width, int height, Cell at);

    int width() const { return width_; }
    int height() const { return height_; }
    int cell_count() const { return width_ * height_; }
    bool empty() const { return density_.empty(); }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }
    bool in_bounds(Cell c) const { return in_bounds(c.x, c.y); }

    double at(int x, int y) const { return density_[index_of(x, y)]; }
    double at(Cell c) const { return at(c.x, c.y); }

    std::span<const double> data() const { return density_; }
    int index_of(int x, int y) const { return y * width_ + x; }
    Cell cell_of(int index) const { return {index % width_, index / width_}; }

    bool same_shape(const GridDistribution& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const GridDistribution&, const GridDistribution&) = default;

    friend GridDistribution normalize(int width, int height, std::vector<double> raw);

private:
    GridDistribution(int width, int height, std::vector<double> density)
        : width_(width), height_(height), density_(std::move(density)) {}

    int width_ = 0;
    int height_ = 0;
    std::vector<double> density_;
};

// Boolean grid marking cells, used for no-fly zones and cloud cover.
class CellMask {
public:
    CellMask() = default;
    CellMask(int width, int height, bool initial = false)
        : width_(width), height_(height),
          cells_(static_cast<std::size_t>(width) * height, initial ? 1 : 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    bool at(Cell c) const { return at(c.x, c.y); }
    void set(int x, int y, bool value) {
        cells_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
    }

    int count_set() const;

    friend bool operator==(const CellMask&, const CellMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
};

// Per-cell conditional distribution: row(q) gives the probability that an
// observation taken at cell q matches each location on the grid.
class MatchKernel {
public:
    MatchKernel() = default;
    MatchKernel(int width, int height, std::vector<GridDistribution> rows);

    static MatchKernel identity(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    const GridDistribution& row(Cell query) const {
        return rows_[static_cast<std::size_t>(query.y) * width_ + query.x];
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<GridDistribution> rows_;
};

// Predicted location distributions, one per step. steps[0] is the belief the
// forecast started from.
struct TrajectoryForecast {
    std::vector<GridDistribution> steps;

    int horizon() const { return static_cast<int>(steps.size()); }

    friend bool operator==(const TrajectoryForecast&, const TrajectoryForecast&) = default;
};

// Rescale a raw non-negative grid to unit mass. Throws std::invalid_argument
// on negative or non-finite cells and VanishedBelief when every cell is zero.
GridDistribution normalize(int width, int height, std::vector<double> raw);

// Bayesian update of a location prior with an observation routed through the
// match kernel: posterior(q) is proportional to
// prior(q) * sum over c of observation(c) * kernel.row(q)(c).
GridDistribution fuse_match(const GridDistribution& prior, const GridDistribution& observation,
                            const MatchKernel& kernel);

// Build a kernel by querying the matcher at every grid cell.
MatchKernel estimate_kernel(int width, int height,
                            const std::function<GridDistribution(Cell)>& matcher);

// Bayesian update with a position fix: likelihood p_fix at the reading and
// (1 - p_fix)/8 at each in-bounds 8-neighbour, zero elsewhere.
GridDistribution fuse_gps(const GridDistribution& prior, Cell reading, double p_fix);

// Shift the belief by `move` (bilinear mass split over the four overlapped
// cells, off-grid mass clamped to the boundary cell it exits through), then
// leak `diffusion.leak` of each cell's mass equally to its in-bounds
// 8-neighbours.
GridDistribution propagate(const GridDistribution& belief, Displacement move,
                           DiffusionParams diffusion);

// Forward-simulate the belief: steps[0] = belief and
// steps[n] = propagate(steps[n-1], plan[n-1] + perturb[n-1], diffusion).
// plan and perturb must each provide at least `horizon` entries.
TrajectoryForecast forecast(const GridDistribution& belief, std::span<const Displacement> plan,
                            std::span<const Displacement> perturb, DiffusionParams diffusion,
                            int horizon);

// Greatest density any forecast step places on a masked cell.
double violation_probability(const TrajectoryForecast& fc, const CellMask& mask);

// Density-weighted centroid.
Vec2 mean_location(const GridDistribution& d);

// Cell with the greatest density; ties resolved row-major (lowest y, then
// lowest x).
Cell argmax_location(const GridDistribution& d);

// Binary 8-bit PGM (P5) heat map, max density mapped to 255.
void write_pgm(const GridDistribution& d, std::ostream& out);
void write_pgm(const GridDistribution& d, const std::string& path);

}  // namespace assure::grid
