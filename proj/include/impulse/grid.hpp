#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace impulse {

using Point = std::array<double, 2>;

/**
 * Uniform rectangular lattice over an axis-aligned box in one or two
 * dimensions.
 *
 * Nodes are numbered row-major with axis 0 varying fastest:
 * node = i0 + m0 * i1. A node is a boundary node iff one of its indices is
 * 0 or m-1. The spacing h is identical on every axis.
 */
class Grid {
public:
    /// Throws std::invalid_argument on mismatched dimensions, lo >= hi,
    /// fewer than 3 nodes on an axis, or unequal spacings.
    static std::shared_ptr<const Grid> build(std::span<const double> lo,
                                             std::span<const double> hi,
                                             std::span<const int> m);

    // Convenience for 1D boxes.
    static std::shared_ptr<const Grid> line(double lo, double hi, int m);
    static std::shared_ptr<const Grid> box(Point lo, Point hi, std::array<int, 2> m);

    int dim() const { return dim_; }
    double h() const { return h_; }
    std::size_t size() const { return size_; }
    int count(int axis) const { return m_[axis]; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }

    /// Euclidean diameter of the box.
    double diameter() const;

    std::size_t node(int i0, int i1 = 0) const {
        return static_cast<std::size_t>(i0) + static_cast<std::size_t>(m_[0]) * static_cast<std::size_t>(i1);
    }
    std::array<int, 2> index(std::size_t node) const {
        return {static_cast<int>(node % m_[0]), static_cast<int>(node / m_[0])};
    }
    Point coords(std::size_t node) const;
    bool is_boundary(std::size_t node) const { return boundary_[node] != 0; }

    /// Node reached by shifting `node` by `delta` index steps, if inside the grid.
    std::optional<std::size_t> offset(std::size_t node, std::array<int, 2> delta) const;

    std::vector<std::size_t> interior_nodes() const;
    std::size_t interior_count() const;

    /// Physical distance between two nodes.
    double distance(std::size_t a, std::size_t b) const;

    /// Node nearest to a physical point (clamped into the box).
    std::size_t nearest_node(Point p) const;

    bool operator==(const Grid& other) const {
        return dim_ == other.dim_ && m_ == other.m_ && lo_ == other.lo_ && hi_ == other.hi_;
    }

private:
    Grid(int dim, Point lo, Point hi, std::array<int, 2> m, double h);

    int dim_;
    Point lo_;
    Point hi_;
    std::array<int, 2> m_;
    double h_;
    std::size_t size_;
    std::vector<unsigned char> boundary_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Same box, 2m-1 nodes per axis. Every coarse node coincides with a fine node.
GridPtr refine(const Grid& g);

/// Throws std::invalid_argument unless both grids describe the same lattice.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Real values on the nodes of a grid. Values must stay finite.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridPtr grid, double fill = 0.0);
    GridFunction(GridPtr grid, std::vector<double> values);

    template <class Fn>
    static GridFunction sample(GridPtr grid, Fn&& fn) {
        GridFunction out(grid);
        for (std::size_t n = 0; n < grid->size(); ++n) out.values_[n] = fn(grid->coords(n));
        out.check_finite();
        return out;
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t n) const { return values_[n]; }
    double& operator[](std::size_t n) { return values_[n]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double max_abs() const;
    double min() const;
    double max() const;

    /// Throws std::domain_error if any value is NaN or infinite.
    void check_finite() const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator+=(double c);
    GridFunction& operator*=(double c);

private:
    GridPtr grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a);
GridFunction operator*(double c, GridFunction a);
GridFunction operator+(GridFunction a, double c);

/// sup-norm of a - b over all nodes.
double sup_distance(const GridFunction& a, const GridFunction& b);

/// A set of grid nodes, stored sorted and without duplicates.
class NodeSet {
public:
    NodeSet() = default;
    NodeSet(GridPtr grid, std::vector<std::size_t> nodes);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<std::size_t>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    bool contains(std::size_t n) const;

    auto begin() const { return nodes_.begin(); }
    auto end() const { return nodes_.end(); }

private:
    GridPtr grid_;
    std::vector<std::size_t> nodes_;
};

struct NearestField {
    GridFunction distance;
    std::vector<std::size_t> nearest;  ///< nearest node of the set, per node
};

/// Exact Euclidean node-to-node distance (and nearest member) to a non-empty
/// node set. Separable squared-distance transform, O(N) per axis pass.
NearestField nearest_in_set(const NodeSet& s);

/// Distance component of nearest_in_set. Throws on an empty set.
GridFunction distance_to_set(const NodeSet& s);

/// CSV with header `x[,y],value`, one row per node in node order, 17
/// significant digits.
void write_csv(std::ostream& os, const GridFunction& u);
void write_csv(const std::string& path, const GridFunction& u);

/// Reads a CSV written by write_csv and checks that the coordinates match
/// `grid` (to 1e-9 relative to h).
GridFunction read_csv(std::istream& is, GridPtr grid);
GridFunction read_csv(const std::string& path, GridPtr grid);

}  // namespace impulse
