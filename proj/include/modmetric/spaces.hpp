#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modmetric/modular.hpp"
#include "modmetric/report.hpp"
#include "modmetric/rng.hpp"

namespace modmetric {

template <class S>
concept PointSpace = requires(const S& s, SplitMix64& rng,
                              const typename S::Point& x,
                              const typename S::Point& y) {
    typename S::Point;
    { s.sample(rng) } -> std::same_as<typename S::Point>;
    { s.equal(x, y) } -> std::same_as<bool>;
    { s.contains(x) } -> std::same_as<bool>;
    { s.point_json(x) } -> std::same_as<json>;
};

template <class S>
concept MetricSpace = PointSpace<S> && requires(const S& s,
                                                const typename S::Point& x,
                                                const typename S::Point& y) {
    { s.distance(x, y) } -> std::same_as<ExtReal>;
    { s.all_distances_finite() } -> std::same_as<bool>;
};

template <class S>
concept EnumerableSpace = PointSpace<S> && requires(const S& s) {
    { s.points() } -> std::convertible_to<const std::vector<typename S::Point>&>;
};

// ---------------------------------------------------------------------------
// Finite metric space: points are indices 0..n-1 over a validated
// distance matrix. Entries may be "inf" (extended metric), which keeps
// multi-component examples expressible as plain tables.
// ---------------------------------------------------------------------------
class FiniteSpace {
public:
    using Point = std::size_t;

    explicit FiniteSpace(std::vector<std::vector<ExtReal>> matrix) {
        n_ = matrix.size();
        if (n_ == 0) throw std::invalid_argument("finite space: empty matrix");
        for (std::size_t i = 0; i < n_; ++i) {
            if (matrix[i].size() != n_) {
                throw std::invalid_argument("finite space: matrix is not square (row " +
                                            std::to_string(i) + " has " +
                                            std::to_string(matrix[i].size()) +
                                            " entries, expected " + std::to_string(n_) + ")");
            }
        }
        validate_metric(matrix);
        d_.reserve(n_ * n_);
        for (const auto& row : matrix)
            for (const ExtReal& v : row) d_.push_back(v);
        for (Point i = 0; i < n_; ++i) pts_.push_back(i);
    }

    static FiniteSpace from_doubles(const std::vector<std::vector<double>>& m) {
        std::vector<std::vector<ExtReal>> rows;
        rows.reserve(m.size());
        for (const auto& r : m) {
            std::vector<ExtReal> row;
            row.reserve(r.size());
            for (double v : r) row.emplace_back(v);
            rows.push_back(std::move(row));
        }
        return FiniteSpace(std::move(rows));
    }

    std::size_t size() const { return n_; }

    Point sample(SplitMix64& rng) const { return rng.index(n_); }
    bool equal(Point a, Point b) const { return a == b; }
    bool contains(Point p) const { return p < n_; }
    const std::vector<Point>& points() const { return pts_; }
    json point_json(Point p) const { return json(p); }

    ExtReal distance(Point a, Point b) const {
        if (a >= n_ || b >= n_) {
            throw std::out_of_range("finite space: point index out of range");
        }
        return d_[a * n_ + b];
    }

    bool all_distances_finite() const {
        for (const ExtReal& v : d_)
            if (v.is_infinite()) return false;
        return true;
    }

private:
    void validate_metric(const std::vector<std::vector<ExtReal>>& m) const {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!(m[i][i] == ExtReal(0.0))) {
                throw std::invalid_argument("finite space: nonzero diagonal at (" +
                                            std::to_string(i) + "," + std::to_string(i) +
                                            "): " + m[i][i].to_string());
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                if (!(m[i][j] == m[j][i])) {
                    throw std::invalid_argument(
                        "finite space: asymmetric at (" + std::to_string(i) + "," +
                        std::to_string(j) + "): " + m[i][j].to_string() + " vs " +
                        m[j][i].to_string());
                }
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                for (std::size_t k = 0; k < n_; ++k) {
                    if (!(m[i][j] <= m[i][k] + m[k][j])) {
                        throw std::invalid_argument(
                            "finite space: triangle violation: d(" + std::to_string(i) +
                            "," + std::to_string(j) + ")=" + m[i][j].to_string() +
                            " > d(" + std::to_string(i) + "," + std::to_string(k) +
                            ")+d(" + std::to_string(k) + "," + std::to_string(j) +
                            ")=" + (m[i][k] + m[k][j]).to_string());
                    }
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<ExtReal> d_;
    std::vector<Point> pts_;
};

/// Loads a distance matrix from a JSON document: either a bare 2-D array
/// or {"matrix": [...]}. Entries are nonnegative numbers or "inf".
inline FiniteSpace finite_space_from_json(const json& doc) {
    const json* mat = &doc;
    if (doc.is_object()) {
        if (!doc.contains("matrix")) {
            throw std::invalid_argument("finite space document: missing \"matrix\"");
        }
        for (const auto& item : doc.items()) {
            if (item.key() != "matrix") {
                throw std::invalid_argument("finite space document: unknown key \"" +
                                            item.key() + "\"");
            }
        }
        mat = &doc.at("matrix");
    }
    if (!mat->is_array()) {
        throw std::invalid_argument("finite space document: matrix must be an array");
    }
    std::vector<std::vector<ExtReal>> rows;
    for (const json& r : *mat) {
        if (!r.is_array()) {
            throw std::invalid_argument("finite space document: matrix rows must be arrays");
        }
        std::vector<ExtReal> row;
        for (const json& v : r) row.push_back(ext_from_json(v));
        rows.push_back(std::move(row));
    }
    return FiniteSpace(std::move(rows));
}

// ---------------------------------------------------------------------------
// Euclidean space R^dim. The carrier is all of R^dim; the box only
// bounds the sampler so witnesses stay readable.
// ---------------------------------------------------------------------------
class EuclideanSpace {
public:
    using Point = std::vector<double>;

    explicit EuclideanSpace(std::size_t dim, double box_lo = -10.0, double box_hi = 10.0)
        : dim_(dim), box_lo_(box_lo), box_hi_(box_hi) {
        if (dim == 0) throw std::invalid_argument("euclidean space: dim must be >= 1");
        if (!(box_lo < box_hi) || !std::isfinite(box_lo) || !std::isfinite(box_hi)) {
            throw std::invalid_argument("euclidean space: sampler box must satisfy lo < hi");
        }
    }

    std::size_t dim() const { return dim_; }
    double box_lo() const { return box_lo_; }
    double box_hi() const { return box_hi_; }

    Point sample(SplitMix64& rng) const {
        Point p(dim_);
        for (double& c : p) c = rng.uniform(box_lo_, box_hi_);
        return p;
    }

    bool equal(const Point& a, const Point& b) const { return a == b; }

    bool contains(const Point& p) const {
        if (p.size() != dim_) return false;
        for (double c : p)
            if (!std::isfinite(c)) return false;
        return true;
    }

    ExtReal distance(const Point& a, const Point& b) const {
        if (a.size() != dim_ || b.size() != dim_) {
            throw std::invalid_argument("euclidean space: point has wrong dimension");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double d = a[i] - b[i];
            s += d * d;
        }
        return ExtReal(std::sqrt(s));
    }

    bool all_distances_finite() const { return true; }

    json point_json(const Point& p) const { return json(p); }

private:
    std::size_t dim_;
    double box_lo_;
    double box_hi_;
};

// ---------------------------------------------------------------------------
// Landmass grid: '#' cells are land, '.' cells are water. Distance is
// the 4-neighbor shortest path over land times the cell size; cells on
// different components are at distance infinity.
// ---------------------------------------------------------------------------
struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

class LandmassSpace {
public:
    using Point = Cell;

    static LandmassSpace parse(std::string_view map_text, double cell_size = 1.0) {
        if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
            throw std::invalid_argument("landmass: cell_size must be positive and finite");
        }
        std::vector<std::string> lines;
        std::string cur;
        for (char c : map_text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) lines.push_back(cur);
        if (lines.empty()) throw std::invalid_argument("landmass: empty map");

        auto grid = std::make_shared<Grid>();
        grid->rows = static_cast<int>(lines.size());
        grid->cols = static_cast<int>(lines[0].size());
        grid->cell_size = cell_size;
        if (grid->cols == 0) throw std::invalid_argument("landmass: empty first row");
        grid->land.assign(static_cast<std::size_t>(grid->rows * grid->cols), 0);
        for (int r = 0; r < grid->rows; ++r) {
            const std::string& line = lines[static_cast<std::size_t>(r)];
            if (static_cast<int>(line.size()) != grid->cols) {
                throw std::invalid_argument("landmass: ragged map: row " + std::to_string(r) +
                                            " has length " + std::to_string(line.size()) +
                                            ", expected " + std::to_string(grid->cols));
            }
            for (int c = 0; c < grid->cols; ++c) {
                char ch = line[static_cast<std::size_t>(c)];
                if (ch == '#') {
                    grid->land[static_cast<std::size_t>(r * grid->cols + c)] = 1;
                } else if (ch != '.') {
                    throw std::invalid_argument(std::string("landmass: illegal character '") +
                                                ch + "' at row " + std::to_string(r) +
                                                ", col " + std::to_string(c));
                }
            }
        }
        for (int r = 0; r < grid->rows; ++r)
            for (int c = 0; c < grid->cols; ++c)
                if (grid->land[static_cast<std::size_t>(r * grid->cols + c)])
                    grid->land_cells.push_back(Cell{r, c});
        if (grid->land_cells.empty()) {
            throw std::invalid_argument("landmass: map contains no land cells");
        }
        label_components(*grid);
        return LandmassSpace(std::move(grid));
    }

    int rows() const { return grid_->rows; }
    int cols() const { return grid_->cols; }
    double cell_size() const { return grid_->cell_size; }
    std::size_t land_count() const { return grid_->land_cells.size(); }
    std::size_t component_count() const { return grid_->n_components; }

    bool is_land(Cell c) const {
        return in_bounds(c) && grid_->land[flat(c)] != 0;
    }

    int component_of(Cell c) const {
        require_land(c);
        return grid_->component[flat(c)];
    }

    Point sample(SplitMix64& rng) const {
        return grid_->land_cells[rng.index(grid_->land_cells.size())];
    }

    bool equal(Cell a, Cell b) const { return a == b; }
    bool contains(Cell c) const { return is_land(c); }
    const std::vector<Cell>& points() const { return grid_->land_cells; }
    json point_json(Cell c) const { return json::array({c.row, c.col}); }

    /// Geodesic distance: cell_size * (minimum 4-neighbor path length
    /// over land); infinity across components.
    ExtReal distance(Cell a, Cell b) const {
        require_land(a);
        require_land(b);
        if (a == b) return ExtReal(0.0);
        if (grid_->component[flat(a)] != grid_->component[flat(b)]) {
            return ExtReal::infinity();
        }
        const std::vector<int>& steps = steps_from(a);
        int s = steps[flat(b)];
        return ExtReal(grid_->cell_size * static_cast<double>(s));
    }

    bool all_distances_finite() const { return grid_->n_components == 1; }

private:
    struct Grid {
        int rows = 0;
        int cols = 0;
        double cell_size = 1.0;
        std::vector<std::uint8_t> land;
        std::vector<Cell> land_cells;
        std::vector<int> component;  // -1 for water
        std::size_t n_components = 0;
    };

    // Per-source BFS results, filled on first query and shared by all
    // copies of the space. Single writer, many readers.
    struct Cache {
        mutable std::shared_mutex mutex;
        std::unordered_map<std::size_t, std::vector<int>> steps_by_source;
    };

    explicit LandmassSpace(std::shared_ptr<Grid> g)
        : grid_(std::move(g)), cache_(std::make_shared<Cache>()) {}

    bool in_bounds(Cell c) const {
        return c.row >= 0 && c.row < grid_->rows && c.col >= 0 && c.col < grid_->cols;
    }

    std::size_t flat(Cell c) const {
        return static_cast<std::size_t>(c.row * grid_->cols + c.col);
    }

    void require_land(Cell c) const {
        if (!in_bounds(c)) {
            throw std::out_of_range("landmass: cell (" + std::to_string(c.row) + "," +
                                    std::to_string(c.col) + ") is out of bounds");
        }
        if (!grid_->land[flat(c)]) {
            throw std::invalid_argument("landmass: cell (" + std::to_string(c.row) + "," +
                                        std::to_string(c.col) + ") is water");
        }
    }

    static void label_components(Grid& g) {
        g.component.assign(g.land.size(), -1);
        int next = 0;
        for (const Cell& start : g.land_cells) {
            std::size_t si = static_cast<std::size_t>(start.row * g.cols + start.col);
            if (g.component[si] != -1) continue;
            std::deque<Cell> queue{start};
            g.component[si] = next;
            while (!queue.empty()) {
                Cell c = queue.front();
                queue.pop_front();
                const Cell nbrs[4] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                                      {c.row, c.col - 1}, {c.row, c.col + 1}};
                for (const Cell& n : nbrs) {
                    if (n.row < 0 || n.row >= g.rows || n.col < 0 || n.col >= g.cols) continue;
                    std::size_t ni = static_cast<std::size_t>(n.row * g.cols + n.col);
                    if (!g.land[ni] || g.component[ni] != -1) continue;
                    g.component[ni] = next;
                    queue.push_back(n);
                }
            }
            ++next;
        }
        g.n_components = static_cast<std::size_t>(next);
    }

    const std::vector<int>& steps_from(Cell source) const {
        std::size_t key = flat(source);
        {
            std::shared_lock lock(cache_->mutex);
            auto it = cache_->steps_by_source.find(key);
            if (it != cache_->steps_by_source.end()) return it->second;
        }
        std::unique_lock lock(cache_->mutex);
        auto it = cache_->steps_by_source.find(key);
        if (it != cache_->steps_by_source.end()) return it->second;

        const Grid& g = *grid_;
        std::vector<int> steps(g.land.size(), -1);
        std::deque<Cell> queue{source};
        steps[key] = 0;
        while (!queue.empty()) {
            Cell c = queue.front();
            queue.pop_front();
            int base = steps[flat(c)];
            const Cell nbrs[4] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                                  {c.row, c.col - 1}, {c.row, c.col + 1}};
            for (const Cell& n : nbrs) {
                if (n.row < 0 || n.row >= g.rows || n.col < 0 || n.col >= g.cols) continue;
                std::size_t ni = static_cast<std::size_t>(n.row * g.cols + n.col);
                if (!g.land[ni] || steps[ni] != -1) continue;
                steps[ni] = base + 1;
                queue.push_back(n);
            }
        }
        return cache_->steps_by_source.emplace(key, std::move(steps)).first->second;
    }

    std::shared_ptr<Grid> grid_;
    std::shared_ptr<Cache> cache_;
};

/// Reads a map file ('#'/'.') plus an optional JSON sidecar
/// "<path>.json" holding {"cell_size": <positive real>}.
inline LandmassSpace load_landmass_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("landmass: cannot open map file: " + path);
    std::ostringstream text;
    text << in.rdbuf();

    double cell_size = 1.0;
    std::filesystem::path sidecar = path + ".json";
    if (std::filesystem::exists(sidecar)) {
        std::ifstream sin(sidecar);
        json doc = json::parse(sin);
        if (!doc.is_object() || !doc.contains("cell_size")) {
            throw std::invalid_argument("landmass sidecar: expected {\"cell_size\": <real>}");
        }
        for (const auto& item : doc.items()) {
            if (item.key() != "cell_size") {
                throw std::invalid_argument("landmass sidecar: unknown key \"" +
                                            item.key() + "\"");
            }
        }
        cell_size = doc.at("cell_size").get<double>();
    }
    return LandmassSpace::parse(text.str(), cell_size);
}

// ---------------------------------------------------------------------------
// Built-in modulars over a base metric.
// ---------------------------------------------------------------------------
enum class BuiltinModular {
    metric_as_modular,  // w_lambda(x,y) = d(x,y)
    average_speed,      // w_lambda(x,y) = d(x,y) / lambda
    step,               // w_lambda(x,y) = inf if lambda < d(x,y), else 0
};

inline std::string builtin_modular_name(BuiltinModular kind) {
    switch (kind) {
        case BuiltinModular::metric_as_modular: return "metric_as_modular";
        case BuiltinModular::average_speed: return "average_speed";
        case BuiltinModular::step: return "step";
    }
    throw std::logic_error("unreachable");
}

template <MetricSpace S>
Modular<typename S::Point> builtin_modular(const S& space, BuiltinModular kind) {
    using P = typename S::Point;
    const bool finite = space.all_distances_finite();
    switch (kind) {
        case BuiltinModular::metric_as_modular:
            return Modular<P>(
                "metric_as_modular",
                [space](double, const P& x, const P& y) { return space.distance(x, y); },
                ModularFlags{.convex = false, .strict = true, .finite = finite});
        case BuiltinModular::average_speed:
            // Evaluates exactly like scaled_modular(metric_as_modular).
            return Modular<P>(
                "average_speed",
                [space](double lambda, const P& x, const P& y) {
                    return scale(1.0 / lambda, space.distance(x, y));
                },
                ModularFlags{.convex = true, .strict = true, .finite = finite});
        case BuiltinModular::step:
            return Modular<P>(
                "step",
                [space](double lambda, const P& x, const P& y) {
                    return space.distance(x, y) <= ExtReal(lambda) ? ExtReal(0.0)
                                                                   : ExtReal::infinity();
                },
                ModularFlags{.convex = true, .strict = false, .finite = false});
    }
    throw std::logic_error("unreachable");
}

}  // namespace modmetric
