#include "sphlab/neighbors.hpp"

#include <algorithm>
#include <cmath>

namespace sphlab {

namespace {

struct CellGrid {
    Vec2 lo;
    Scalar cell = 0.0;
    Index nx = 0, ny = 0;
    std::vector<Index> cell_start; // counting-sorted particle ids per cell
    std::vector<Index> order;

    Index cell_of(const Vec2& p) const {
        Index cx = static_cast<Index>(std::floor((p.x() - lo.x()) / cell));
        Index cy = static_cast<Index>(std::floor((p.y() - lo.y()) / cell));
        cx = std::clamp<Index>(cx, 0, nx - 1);
        cy = std::clamp<Index>(cy, 0, ny - 1);
        return cy * nx + cx;
    }
};

CellGrid bin_particles(const Mat2X& pos, Scalar cell) {
    CellGrid g;
    g.cell = cell;
    Vec2 lo = pos.rowwise().minCoeff();
    Vec2 hi = pos.rowwise().maxCoeff();
    g.lo = lo - Vec2::Constant(0.5 * cell);
    g.nx = std::max<Index>(1, static_cast<Index>(std::ceil((hi.x() - g.lo.x()) / cell)) + 1);
    g.ny = std::max<Index>(1, static_cast<Index>(std::ceil((hi.y() - g.lo.y()) / cell)) + 1);

    const Index n = pos.cols();
    const Index ncell = g.nx * g.ny;
    std::vector<Index> count(static_cast<std::size_t>(ncell) + 1, 0);
    std::vector<Index> cell_id(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        cell_id[static_cast<std::size_t>(i)] = g.cell_of(pos.col(i));
        ++count[static_cast<std::size_t>(cell_id[static_cast<std::size_t>(i)]) + 1];
    }
    for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
    g.cell_start = count;
    g.order.resize(static_cast<std::size_t>(n));
    std::vector<Index> cursor(count.begin(), count.end() - 1);
    for (Index i = 0; i < n; ++i) {
        const Index c = cell_id[static_cast<std::size_t>(i)];
        g.order[static_cast<std::size_t>(cursor[static_cast<std::size_t>(c)]++)] = i;
    }
    return g;
}

} // namespace

NeighborTable neighbor_search(const ParticleSet& ps, Scalar cutoff, Index n_dest, Scalar skin) {
    NeighborTable t;
    t.n_dest = n_dest < 0 ? ps.n_local : n_dest;
    t.cutoff = cutoff;
    t.cutoff_build = cutoff + skin;
    const Scalar rb = t.cutoff_build;
    const Scalar rb2 = rb * rb;

    const CellGrid grid = bin_particles(ps.pos, rb);
    const Mat2X& pos = ps.pos;

    t.offsets.assign(static_cast<std::size_t>(t.n_dest) + 1, 0);
    std::vector<Index> row;
    row.reserve(64);
    // two passes: count then fill, rows sorted ascending
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(t.n_dest));
    for (Index i = 0; i < t.n_dest; ++i) {
        const Vec2 pi = pos.col(i);
        row.clear();
        const Index ci = grid.cell_of(pi);
        const Index cx = ci % grid.nx, cy = ci / grid.nx;
        for (Index dy = -1; dy <= 1; ++dy) {
            const Index yy = cy + dy;
            if (yy < 0 || yy >= grid.ny) continue;
            for (Index dx = -1; dx <= 1; ++dx) {
                const Index xx = cx + dx;
                if (xx < 0 || xx >= grid.nx) continue;
                const Index c = yy * grid.nx + xx;
                const Index b = grid.cell_start[static_cast<std::size_t>(c)];
                const Index e = grid.cell_start[static_cast<std::size_t>(c) + 1];
                for (Index s = b; s < e; ++s) {
                    const Index j = grid.order[static_cast<std::size_t>(s)];
                    if (j == i) continue;
                    if ((pos.col(j) - pi).squaredNorm() < rb2) row.push_back(j);
                }
            }
        }
        std::sort(row.begin(), row.end());
        rows[static_cast<std::size_t>(i)] = row;
        t.offsets[static_cast<std::size_t>(i) + 1] =
            t.offsets[static_cast<std::size_t>(i)] + static_cast<Index>(row.size());
    }
    t.indices.resize(static_cast<std::size_t>(t.offsets.back()));
    for (Index i = 0; i < t.n_dest; ++i) {
        std::copy(rows[static_cast<std::size_t>(i)].begin(), rows[static_cast<std::size_t>(i)].end(),
                  t.indices.begin() + t.offsets[static_cast<std::size_t>(i)]);
    }

    // half edges: i < j with i a destination
    t.edge_i.clear();
    t.edge_j.clear();
    for (Index i = 0; i < t.n_dest; ++i) {
        for (Index s = t.begin(i); s < t.end(i); ++s) {
            const Index j = t.neighbor(s);
            if (j > i) {
                t.edge_i.push_back(i);
                t.edge_j.push_back(j);
            }
        }
    }
    return t;
}

} // namespace sphlab
