#include "impulse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace impulse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (q - p)^2 + f(p) over positions with finite f.
// Writes squared distances into `d` and the minimizing position into `arg`.
void envelope_1d(std::span<const double> f, std::span<double> d, std::span<long> arg) {
    const long n = static_cast<long>(f.size());
    std::vector<long> v(n);
    std::vector<double> z(n + 1);
    long k = -1;
    for (long q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        double s = 0.0;
        while (k >= 0) {
            const double fq = f[q] + static_cast<double>(q) * q;
            const double fv = f[v[k]] + static_cast<double>(v[k]) * v[k];
            s = (fq - fv) / (2.0 * (q - v[k]));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
        } else {
            ++k;
            v[k] = q;
            z[k] = s;
        }
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
        std::fill(arg.begin(), arg.end(), -1L);
        return;
    }
    long j = 0;
    for (long q = 0; q < n; ++q) {
        while (z[j + 1] < static_cast<double>(q)) ++j;
        const double diff = static_cast<double>(q - v[j]);
        d[q] = diff * diff + f[v[j]];
        arg[q] = v[j];
    }
}

}  // namespace

Grid::Grid(int dim, Point lo, Point hi, std::array<int, 2> m, double h)
    : dim_(dim), lo_(lo), hi_(hi), m_(m), h_(h) {
    size_ = static_cast<std::size_t>(m_[0]) * static_cast<std::size_t>(m_[1]);
    boundary_.assign(size_, 0);
    for (std::size_t n = 0; n < size_; ++n) {
        const auto [i0, i1] = index(n);
        bool b = i0 == 0 || i0 == m_[0] - 1;
        if (dim_ == 2) b = b || i1 == 0 || i1 == m_[1] - 1;
        boundary_[n] = b ? 1 : 0;
    }
}

std::shared_ptr<const Grid> Grid::build(std::span<const double> lo, std::span<const double> hi,
                                        std::span<const int> m) {
    const std::size_t dim = lo.size();
    if (dim != hi.size() || dim != m.size()) {
        throw std::invalid_argument("grid: lo, hi and m must have the same length");
    }
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dimension must be 1 or 2");

    Point plo{0.0, 0.0}, phi{0.0, 0.0};
    std::array<int, 2> pm{1, 1};
    double h = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        if (!(lo[a] < hi[a])) throw std::invalid_argument("grid: lo must be < hi on every axis");
        if (m[a] < 3) throw std::invalid_argument("grid: at least 3 nodes per axis are required");
        const double ha = (hi[a] - lo[a]) / (m[a] - 1);
        if (a == 0) {
            h = ha;
        } else if (std::abs(ha - h) > 1e-12 * std::max(h, ha)) {
            std::ostringstream msg;
            msg << "grid: spacing must be equal on all axes (" << h << " vs " << ha << ")";
            throw std::invalid_argument(msg.str());
        }
        plo[a] = lo[a];
        phi[a] = hi[a];
        pm[a] = m[a];
    }
    return std::shared_ptr<const Grid>(new Grid(static_cast<int>(dim), plo, phi, pm, h));
}

std::shared_ptr<const Grid> Grid::line(double lo, double hi, int m) {
    const double l[] = {lo};
    const double u[] = {hi};
    const int c[] = {m};
    return build(l, u, c);
}

std::shared_ptr<const Grid> Grid::box(Point lo, Point hi, std::array<int, 2> m) {
    return build(lo, hi, m);
}

double Grid::diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += (hi_[a] - lo_[a]) * (hi_[a] - lo_[a]);
    return std::sqrt(s);
}

Point Grid::coords(std::size_t node) const {
    const auto idx = index(node);
    Point p{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
        // Pin the last node to hi exactly.
        p[a] = idx[a] == m_[a] - 1 ? hi_[a] : lo_[a] + idx[a] * h_;
    }
    return p;
}

std::optional<std::size_t> Grid::offset(std::size_t node, std::array<int, 2> delta) const {
    const auto idx = index(node);
    const int j0 = idx[0] + delta[0];
    const int j1 = idx[1] + delta[1];
    if (j0 < 0 || j0 >= m_[0] || j1 < 0 || j1 >= m_[1]) return std::nullopt;
    return this->node(j0, j1);
}

std::vector<std::size_t> Grid::interior_nodes() const {
    std::vector<std::size_t> out;
    out.reserve(interior_count());
    for (std::size_t n = 0; n < size_; ++n)
        if (!boundary_[n]) out.push_back(n);
    return out;
}

std::size_t Grid::interior_count() const {
    std::size_t c = static_cast<std::size_t>(m_[0] - 2);
    if (dim_ == 2) c *= static_cast<std::size_t>(m_[1] - 2);
    return c;
}

double Grid::distance(std::size_t a, std::size_t b) const {
    const auto ia = index(a);
    const auto ib = index(b);
    const double d0 = ia[0] - ib[0];
    const double d1 = ia[1] - ib[1];
    return h_ * std::sqrt(d0 * d0 + d1 * d1);
}

std::size_t Grid::nearest_node(Point p) const {
    std::array<int, 2> idx{0, 0};
    for (int a = 0; a < dim_; ++a) {
        const long i = std::lround((p[a] - lo_[a]) / h_);
        idx[a] = static_cast<int>(std::clamp<long>(i, 0, m_[a] - 1));
    }
    return node(idx[0], idx[1]);
}

GridPtr refine(const Grid& g) {
    std::vector<double> lo, hi;
    std::vector<int> m;
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.lo(a));
        hi.push_back(g.hi(a));
        m.push_back(2 * g.count(a) - 1);
    }
    return Grid::build(lo, hi, m);
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// ---------------------------------------------------------------- GridFunction

GridFunction::GridFunction(GridPtr grid, double fill) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("GridFunction: null grid");
    values_.assign(grid_->size(), fill);
    if (!std::isfinite(fill)) throw std::domain_error("GridFunction: non-finite fill value");
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("GridFunction: null grid");
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("GridFunction: value count does not match node count");
    }
    check_finite();
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

void GridFunction::check_finite() const {
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            throw std::domain_error("GridFunction: non-finite value at node " + std::to_string(n));
        }
    }
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_grid(*grid_, o.grid(), "GridFunction +=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_grid(*grid_, o.grid(), "GridFunction -=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
    return *this;
}

GridFunction& GridFunction::operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
}

GridFunction& GridFunction::operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator-(GridFunction a) { return a *= -1.0; }
GridFunction operator*(double c, GridFunction a) { return a *= c; }
GridFunction operator+(GridFunction a, double c) { return a += c; }

double sup_distance(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid(), b.grid(), "sup_distance");
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

// --------------------------------------------------------------------- NodeSet

NodeSet::NodeSet(GridPtr grid, std::vector<std::size_t> nodes)
    : grid_(std::move(grid)), nodes_(std::move(nodes)) {
    if (!grid_) throw std::invalid_argument("NodeSet: null grid");
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    if (!nodes_.empty() && nodes_.back() >= grid_->size()) {
        throw std::invalid_argument("NodeSet: node index out of range");
    }
}

bool NodeSet::contains(std::size_t n) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

NearestField nearest_in_set(const NodeSet& s) {
    if (s.empty()) throw std::invalid_argument("distance_to_set: empty node set");
    const Grid& g = s.grid();
    const int m0 = g.count(0);
    const int m1 = g.count(1);

    // Pass along axis 0: nearest set node within each row.
    std::vector<double> d2(g.size(), kInf);
    std::vector<long> near(g.size(), -1);
    {
        std::vector<double> f(m0), d(m0);
        std::vector<long> arg(m0);
        for (int i1 = 0; i1 < m1; ++i1) {
            for (int i0 = 0; i0 < m0; ++i0) f[i0] = s.contains(g.node(i0, i1)) ? 0.0 : kInf;
            envelope_1d(f, d, arg);
            for (int i0 = 0; i0 < m0; ++i0) {
                d2[g.node(i0, i1)] = d[i0];
                near[g.node(i0, i1)] = arg[i0] < 0 ? -1 : static_cast<long>(g.node(arg[i0], i1));
            }
        }
    }
    if (g.dim() == 2) {
        std::vector<double> f(m1), d(m1);
        std::vector<long> arg(m1);
        std::vector<long> col_near(m1);
        for (int i0 = 0; i0 < m0; ++i0) {
            for (int i1 = 0; i1 < m1; ++i1) {
                f[i1] = d2[g.node(i0, i1)];
                col_near[i1] = near[g.node(i0, i1)];
            }
            envelope_1d(f, d, arg);
            for (int i1 = 0; i1 < m1; ++i1) {
                d2[g.node(i0, i1)] = d[i1];
                near[g.node(i0, i1)] = col_near[arg[i1]];
            }
        }
    }

    NearestField out{GridFunction(s.grid_ptr()), std::vector<std::size_t>(g.size())};
    for (std::size_t n = 0; n < g.size(); ++n) {
        out.distance[n] = g.h() * std::sqrt(d2[n]);
        out.nearest[n] = static_cast<std::size_t>(near[n]);
    }
    return out;
}

GridFunction distance_to_set(const NodeSet& s) { return nearest_in_set(s).distance; }

// ------------------------------------------------------------------------- CSV

void write_csv(std::ostream& os, const GridFunction& u) {
    const Grid& g = u.grid();
    os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
    char buf[128];
    for (std::size_t n = 0; n < g.size(); ++n) {
        const Point p = g.coords(n);
        if (g.dim() == 1) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p[0], u[n]);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0], p[1], u[n]);
        }
        os << buf;
    }
}

void write_csv(const std::string& path, const GridFunction& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(os, u);
    if (!os) throw std::runtime_error("write failed: " + path);
}

GridFunction read_csv(std::istream& is, GridPtr grid) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
    const std::string expected = grid->dim() == 1 ? "x,value" : "x,y,value";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw std::runtime_error("csv: expected header '" + expected + "', got '" + line + "'");

    GridFunction out(grid);
    std::size_t n = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (n >= grid->size()) throw std::runtime_error("csv: more rows than grid nodes");
        std::istringstream row(line);
        std::array<double, 3> cols{};
        const int ncols = grid->dim() + 1;
        for (int c = 0; c < ncols; ++c) {
            std::string cell;
            if (!std::getline(row, cell, ',')) throw std::runtime_error("csv: short row " + std::to_string(n + 2));
            try {
                cols[c] = std::stod(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("csv: bad number '" + cell + "' on row " + std::to_string(n + 2));
            }
        }
        const Point p = grid->coords(n);
        for (int a = 0; a < grid->dim(); ++a) {
            if (std::abs(cols[a] - p[a]) > 1e-9 * grid->h()) {
                throw std::runtime_error("csv: coordinates on row " + std::to_string(n + 2) + " do not match the grid");
            }
        }
        out[n] = cols[grid->dim()];
        ++n;
    }
    if (n != grid->size()) throw std::runtime_error("csv: fewer rows than grid nodes");
    out.check_finite();
    return out;
}

GridFunction read_csv(const std::string& path, GridPtr grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_csv(is, std::move(grid));
}

}  // namespace impulse
