#include "assure/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

namespace assure::grid {

namespace {

void require_shape(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("grid dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

std::string cell_str(Cell c) {
    return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
}

}  // namespace

GridDistribution GridDistribution::uniform(int width, int height) {
    require_shape(width, height);
    const auto n = static_cast<std::size_t>(width) * height;
    return {width, height, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

GridDistribution GridDistribution::delta(int width, int height, Cell at) {
    require_shape(width, height);
    if (at.x < 0 || at.x >= width || at.y < 0 || at.y >= height) {
        throw std::invalid_argument("delta cell " + cell_str(at) + " outside " +
                                    std::to_string(width) + "x" + std::to_string(height) + " grid");
    }
    std::vector<double> d(static_cast<std::size_t>(width) * height, 0.0);
    d[static_cast<std::size_t>(at.y) * width + at.x] = 1.0;
    return {width, height, std::move(d)};
}

int CellMask::count_set() const {
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

MatchKernel::MatchKernel(int width, int height, std::vector<GridDistribution> rows)
    : width_(width), height_(height), rows_(std::move(rows)) {
    require_shape(width, height);
    if (rows_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("match kernel needs one row per grid cell");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].width() != width || rows_[i].height() != height) {
            throw std::invalid_argument("match kernel row for cell " +
                                        cell_str({static_cast<int>(i) % width,
                                                  static_cast<int>(i) / width}) +
                                        " has mismatched dimensions");
        }
    }
}

MatchKernel MatchKernel::identity(int width, int height) {
    std::vector<GridDistribution> rows;
    rows.reserve(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            rows.push_back(GridDistribution::delta(width, height, {x, y}));
        }
    }
    return {width, height, std::move(rows)};
}

GridDistribution normalize(int width, int height, std::vector<double> raw) {
    require_shape(width, height);
    if (raw.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("raw grid has " + std::to_string(raw.size()) +
                                    " cells, expected " + std::to_string(width * height));
    }
    double total = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("raw grid cells must be finite and non-negative");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw VanishedBelief("vanished belief: no mass remains after update");
    }
    for (double& v : raw) v /= total;
    return GridDistribution{width, height, std::move(raw)};
}

GridDistribution fuse_match(const GridDistribution& prior, const GridDistribution& observation,
                            const MatchKernel& kernel) {
    if (!prior.same_shape(observation) || prior.width() != kernel.width() ||
        prior.height() != kernel.height()) {
        throw std::invalid_argument("fuse_match requires prior, observation and kernel on the "
                                    "same grid");
    }
    const int n = prior.cell_count();
    std::vector<double> posterior(static_cast<std::size_t>(n), 0.0);
    const auto obs = observation.data();
    for (int i = 0; i < n; ++i) {
        const double p = prior.data()[i];
        if (p == 0.0) continue;
        const auto row = kernel.row(prior.cell_of(i)).data();
        double match = 0.0;
        for (int j = 0; j < n; ++j) match += obs[j] * row[j];
        posterior[i] = p * match;
    }
    return normalize(prior.width(), prior.height(), std::move(posterior));
}

MatchKernel estimate_kernel(int width, int height,
                            const std::function<GridDistribution(Cell)>& matcher) {
    require_shape(width, height);
    std::vector<GridDistribution> rows;
    rows.reserve(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Cell query{x, y};
            GridDistribution row;
            try {
                row = matcher(query);
            } catch (const std::exception& e) {
                throw std::runtime_error("kernel matcher failed at cell " + cell_str(query) +
                                         ": " + e.what());
            }
            if (row.width() != width || row.height() != height) {
                throw std::invalid_argument("kernel matcher returned a " +
                                            std::to_string(row.width()) + "x" +
                                            std::to_string(row.height()) +
                                            " distribution at cell " + cell_str(query) +
                                            ", expected " + std::to_string(width) + "x" +
                                            std::to_string(height));
            }
            rows.push_back(std::move(row));
        }
    }
    return {width, height, std::move(rows)};
}

GridDistribution fuse_gps(const GridDistribution& prior, Cell reading, double p_fix) {
    if (!prior.in_bounds(reading)) {
        throw std::invalid_argument("position fix " + cell_str(reading) + " outside grid");
    }
    if (!(p_fix > 0.0) || p_fix > 1.0) {
        throw std::invalid_argument("fix probability must be in (0, 1]");
    }
    std::vector<double> posterior(static_cast<std::size_t>(prior.cell_count()), 0.0);
    const double neighbour_weight = (1.0 - p_fix) / 8.0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = reading.x + dx;
            const int y = reading.y + dy;
            if (!prior.in_bounds(x, y)) continue;
            const double likelihood = (dx == 0 && dy == 0) ? p_fix : neighbour_weight;
            posterior[prior.index_of(x, y)] = prior.at(x, y) * likelihood;
        }
    }
    return normalize(prior.width(), prior.height(), std::move(posterior));
}

GridDistribution propagate(const GridDistribution& belief, Displacement move,
                           DiffusionParams diffusion) {
    if (!std::isfinite(move.dx) || !std::isfinite(move.dy)) {
        throw std::invalid_argument("displacement components must be finite");
    }
    if (diffusion.leak < 0.0 || diffusion.leak > 1.0) {
        throw std::invalid_argument("diffusion leak must be in [0, 1]");
    }
    if (move.dx == 0.0 && move.dy == 0.0 && diffusion.leak == 0.0) {
        return belief;  // exact identity
    }
    const int w = belief.width();
    const int h = belief.height();
    auto clamp_x = [w](int x) { return std::clamp(x, 0, w - 1); };
    auto clamp_y = [h](int y) { return std::clamp(y, 0, h - 1); };

    std::vector<double> shifted(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = belief.at(x, y);
            if (m == 0.0) continue;
            const double tx = x + move.dx;
            const double ty = y + move.dy;
            const int fx = static_cast<int>(std::floor(tx));
            const int fy = static_cast<int>(std::floor(ty));
            const double wx = tx - fx;
            const double wy = ty - fy;
            shifted[static_cast<std::size_t>(clamp_y(fy)) * w + clamp_x(fx)] +=
                m * (1.0 - wx) * (1.0 - wy);
            shifted[static_cast<std::size_t>(clamp_y(fy)) * w + clamp_x(fx + 1)] +=
                m * wx * (1.0 - wy);
            shifted[static_cast<std::size_t>(clamp_y(fy + 1)) * w + clamp_x(fx)] +=
                m * (1.0 - wx) * wy;
            shifted[static_cast<std::size_t>(clamp_y(fy + 1)) * w + clamp_x(fx + 1)] +=
                m * wx * wy;
        }
    }

    if (diffusion.leak == 0.0) {
        return normalize(w, h, std::move(shifted));
    }

    std::vector<double> diffused(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = shifted[static_cast<std::size_t>(y) * w + x];
            if (m == 0.0) continue;
            int neighbours = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (x + dx >= 0 && x + dx < w && y + dy >= 0 && y + dy < h) ++neighbours;
                }
            }
            if (neighbours == 0) {
                diffused[static_cast<std::size_t>(y) * w + x] += m;
                continue;
            }
            const double leaked = m * diffusion.leak;
            diffused[static_cast<std::size_t>(y) * w + x] += m - leaked;
            const double share = leaked / neighbours;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    diffused[static_cast<std::size_t>(ny) * w + nx] += share;
                }
            }
        }
    }
    return normalize(w, h, std::move(diffused));
}

TrajectoryForecast forecast(const GridDistribution& belief, std::span<const Displacement> plan,
                            std::span<const Displacement> perturb, DiffusionParams diffusion,
                            int horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("forecast horizon must be at least 1");
    }
    if (plan.size() < static_cast<std::size_t>(horizon) ||
        perturb.size() < static_cast<std::size_t>(horizon)) {
        throw std::invalid_argument("plan and perturbation sequences shorter than horizon " +
                                    std::to_string(horizon));
    }
    TrajectoryForecast fc;
    fc.steps.reserve(static_cast<std::size_t>(horizon));
    fc.steps.push_back(belief);
    for (int n = 1; n < horizon; ++n) {
        fc.steps.push_back(propagate(fc.steps.back(), plan[n - 1] + perturb[n - 1], diffusion));
    }
    return fc;
}

double violation_probability(const TrajectoryForecast& fc, const CellMask& mask) {
    double worst = 0.0;
    for (const auto& step : fc.steps) {
        if (step.width() != mask.width() || step.height() != mask.height()) {
            throw std::invalid_argument("mask dimensions do not match forecast grid");
        }
        for (int y = 0; y < step.height(); ++y) {
            for (int x = 0; x < step.width(); ++x) {
                if (mask.at(x, y)) worst = std::max(worst, step.at(x, y));
            }
        }
    }
    return worst;
}

Vec2 mean_location(const GridDistribution& d) {
    Vec2 mean;
    for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
            const double m = d.at(x, y);
            mean.x += m * x;
            mean.y += m * y;
        }
    }
    return mean;
}

Cell argmax_location(const GridDistribution& d) {
    Cell best{0, 0};
    double best_density = -1.0;
    for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
            if (d.at(x, y) > best_density) {
                best_density = d.at(x, y);
                best = {x, y};
            }
        }
    }
    return best;
}

void write_pgm(const GridDistribution& d, std::ostream& out) {
    const double peak = d.at(argmax_location(d));
    out << "P5\n" << d.width() << " " << d.height() << "\n255\n";
    for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
            const double scaled = peak > 0.0 ? d.at(x, y) / peak * 255.0 : 0.0;
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
        }
    }
}

void write_pgm(const GridDistribution& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_pgm(d, out);
}

}  // namespace assure::grid
