#include "convexify/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"

namespace convexify {

EllipticOperator::EllipticOperator(const CoefficientSet& coeffs, const BoxGrid& grid)
    : coeffs_(coeffs), ops_(grid), n_(coeffs.n_space), space_size_(coeffs.space.size()) {
    require(grid.dims() >= n_, ErrorKind::precondition, "operator grid has fewer axes than space dimensions");
    for (int k = 0; k < n_; ++k)
        require(grid.axis(k).count == coeffs.space.axis(k).count, ErrorKind::precondition,
                "operator grid does not match coefficient grid");
}

std::vector<double> EllipticOperator::apply_L0(std::span<const double> w) const {
    require_size(w, grid().size(), "elliptic operator input");
    std::vector<double> out(w.size(), 0.0);
    for (int i = 0; i < n_; ++i) {
        const auto wii = ops_.second(i, w);
        const auto& aii = coeffs_.a_at(i, i);
        for (std::size_t f = 0; f < out.size(); ++f) out[f] += coef(aii, f) * wii[f];
        for (int j = i + 1; j < n_; ++j) {
            const auto wij = ops_.first(i, ops_.first(j, w));
            const auto& aij = coeffs_.a_at(i, j);
            const auto& aji = coeffs_.a_at(j, i);
            for (std::size_t f = 0; f < out.size(); ++f) out[f] += (coef(aij, f) + coef(aji, f)) * wij[f];
        }
    }
    return out;
}

std::vector<double> EllipticOperator::apply_Lc(std::span<const double> w) const {
    auto out = apply_L0(w);
    for (int j = 0; j < n_; ++j) {
        const auto& bj = coeffs_.b[static_cast<std::size_t>(j)];
        if (std::all_of(bj.begin(), bj.end(), [](double v) { return v == 0.0; })) continue;
        const auto wj = ops_.first(j, w);
        for (std::size_t f = 0; f < out.size(); ++f) out[f] += coef(bj, f) * wj[f];
    }
    return out;
}

std::vector<double> EllipticOperator::apply_L(std::span<const double> w) const {
    auto out = apply_Lc(w);
    for (std::size_t f = 0; f < out.size(); ++f) out[f] += coef(coeffs_.c_true, f) * w[f];
    return out;
}

std::vector<double> EllipticOperator::apply_L0_transpose(std::span<const double> y) const {
    require_size(y, grid().size(), "elliptic operator input");
    std::vector<double> out(y.size(), 0.0);
    std::vector<double> scaled(y.size());
    for (int i = 0; i < n_; ++i) {
        const auto& aii = coeffs_.a_at(i, i);
        for (std::size_t f = 0; f < y.size(); ++f) scaled[f] = coef(aii, f) * y[f];
        const auto t = ops_.second_t(i, scaled);
        for (std::size_t f = 0; f < y.size(); ++f) out[f] += t[f];
        for (int j = i + 1; j < n_; ++j) {
            const auto& aij = coeffs_.a_at(i, j);
            const auto& aji = coeffs_.a_at(j, i);
            for (std::size_t f = 0; f < y.size(); ++f) scaled[f] = (coef(aij, f) + coef(aji, f)) * y[f];
            const auto tij = ops_.first_t(j, ops_.first_t(i, scaled));
            for (std::size_t f = 0; f < y.size(); ++f) out[f] += tij[f];
        }
    }
    return out;
}

std::vector<double> EllipticOperator::apply_Lc_transpose(std::span<const double> y) const {
    auto out = apply_L0_transpose(y);
    std::vector<double> scaled(y.size());
    for (int j = 0; j < n_; ++j) {
        const auto& bj = coeffs_.b[static_cast<std::size_t>(j)];
        if (std::all_of(bj.begin(), bj.end(), [](double v) { return v == 0.0; })) continue;
        for (std::size_t f = 0; f < y.size(); ++f) scaled[f] = coef(bj, f) * y[f];
        const auto t = ops_.first_t(j, scaled);
        for (std::size_t f = 0; f < y.size(); ++f) out[f] += t[f];
    }
    return out;
}

EllipticOperator assemble_elliptic(const CoefficientSet& coeffs, const BoxGrid& grid) {
    return EllipticOperator(coeffs, grid);
}

std::size_t GeneratorGrid::generator_node(const BoxGrid& inversion_space, std::size_t space_node) const {
    std::size_t g = 0;
    for (int k = 0; k < inversion_space.dims(); ++k) {
        const int i = inversion_space.index_along(space_node, k);
        g += space.stride(k) * static_cast<std::size_t>(offset[static_cast<std::size_t>(k)] + fine_factor * i);
    }
    return g;
}

GeneratorGrid make_generator_grid(const DomainGrid& grid, int fine_factor, double margin) {
    require(fine_factor >= 1, ErrorKind::configuration, "fine_factor must be >= 1");
    require(margin >= 0.0, ErrorKind::configuration, "generator margin must be >= 0");
    GeneratorGrid gen;
    gen.fine_factor = fine_factor;
    std::vector<Axis> axes;
    for (int k = 0; k < grid.n_space(); ++k) {
        const Axis& inv = grid.space().axis(k);
        Axis ax;
        ax.spacing = inv.spacing / fine_factor;
        const int extra = margin > 0.0 ? static_cast<int>(std::ceil(margin / ax.spacing - 1e-9)) : 0;
        ax.count = (inv.count - 1) * fine_factor + 1 + 2 * extra;
        ax.anchor = extra + fine_factor * inv.anchor;
        ax.anchor_value = inv.anchor_value;
        axes.push_back(ax);
        gen.offset.push_back(extra);
    }
    gen.space = BoxGrid(axes);
    return gen;
}

GeneratedField evolve_two_sided(const ExactSolution& solution, const DomainGrid& grid, double b_lower) {
    const BoxGrid& space = solution.space();
    std::vector<Axis> axes = space.axes();
    axes.push_back(grid.spacetime().axis(grid.time_axis()));
    GeneratedField out{BoxGrid(axes), {}};
    out.u.resize(out.spacetime.size());
    const Axis& taxis = grid.spacetime().axis(grid.time_axis());
    const GridSpec& spec = grid.spec();
    double worst = std::numeric_limits<double>::infinity();
    for (int it = 0; it < taxis.count; ++it) {
        const double t = taxis.node(it);
        for (std::size_t s = 0; s < space.size(); ++s) {
            const double u = solution.u(s, t);
            out.u[static_cast<std::size_t>(it) * space.size() + s] = u;
            SpaceTimePoint p;
            for (int k = 0; k < space.dims(); ++k) p.x[k] = space.coordinate(s, k);
            p.t = t;
            if (p.x[0] >= 0.0 && psi_value(p, spec) <= spec.d) worst = std::min(worst, u);
        }
    }
    if (!(worst > b_lower)) {
        std::ostringstream os;
        os << "positivity violation: min u on the closure of G is " << worst << ", need u >= b = " << b_lower
           << " > 0 (initial data f >= 2b and small enough T)";
        fail(ErrorKind::positivity, os.str());
    }
    return out;
}

CauchyTraces extract_traces(const GeneratedField& u, const GeneratorGrid& gen, const DomainGrid& grid) {
    const BoxGrid& gspace = gen.space;
    const Axis& gx1 = gspace.axis(0);
    require(gx1.count - gen.offset[0] >= 3, ErrorKind::precondition, "trace extraction needs three x1 layers");
    const int i0 = gen.offset[0];
    const bool centred = i0 >= 1;
    const double h = gx1.spacing;
    const std::size_t sx = gspace.stride(0);
    const std::size_t gsize = gspace.size();

    CauchyTraces tr;
    tr.face = grid.face();
    tr.grid_hash = grid.hash();
    tr.g1.resize(tr.face.size());
    tr.g2.resize(tr.face.size());
    const int n_space = grid.n_space();
    for (std::size_t fn = 0; fn < tr.face.size(); ++fn) {
        std::size_t g = static_cast<std::size_t>(i0);
        for (int k = 1; k < n_space; ++k) {
            const int i = tr.face.index_along(fn, k - 1);
            g += gspace.stride(k) * static_cast<std::size_t>(gen.offset[static_cast<std::size_t>(k)] + gen.fine_factor * i);
        }
        const std::size_t it = static_cast<std::size_t>(tr.face.index_along(fn, n_space - 1));
        const std::size_t base = it * gsize + g;
        tr.g1[fn] = u.u[base];
        if (centred)
            tr.g2[fn] = (u.u[base + sx] - u.u[base - sx]) / (2.0 * h);
        else
            tr.g2[fn] = (-3.0 * u.u[base] + 4.0 * u.u[base + sx] - u.u[base + 2 * sx]) / (2.0 * h);
    }
    return tr;
}

CauchyTraces add_noise(const CauchyTraces& traces, double delta, std::uint64_t seed) {
    require(delta >= 0.0, ErrorKind::configuration, "noise.delta must be >= 0");
    CauchyTraces out = traces;
    out.delta = delta;
    out.seed = seed;
    if (delta == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> eta(-1.0, 1.0);
    for (std::size_t i = 0; i < out.g1.size(); ++i) {
        out.g1[i] *= 1.0 + delta * eta(rng);
        out.g2[i] *= 1.0 + delta * eta(rng);
        if (!(out.g1[i] > 0.0))
            fail(ErrorKind::positivity, "noisy g1 is not positive; noise level delta is too large");
    }
    return out;
}

void write_traces_csv(std::ostream& os, const CauchyTraces& traces, int n_space) {
    os << "# delta=" << format_double(traces.delta) << ",seed=" << traces.seed
       << ",grid_hash=" << hex64(traces.grid_hash) << "\n";
    static const char* names[] = {"x2", "x3"};
    for (int k = 1; k < n_space; ++k) os << names[k - 1] << ",";
    os << "t,g1,g2\n";
    for (std::size_t i = 0; i < traces.g1.size(); ++i) {
        for (int k = 0; k < traces.face.dims(); ++k) os << format_double(traces.face.coordinate(i, k)) << ",";
        os << format_double(traces.g1[i]) << "," << format_double(traces.g2[i]) << "\n";
    }
}

SyntheticProblem generate_problem(const GridSpec& spec, const CoefficientModel& model, const GeneratorConfig& gen,
                                  double delta, std::uint64_t seed) {
    DomainGrid grid(spec);
    require(model.n_space == spec.n_space, ErrorKind::configuration, "model and domain disagree on n_space");
    const double margin = gen.kind == GeneratorKind::eigenmode ? gen.margin : 0.0;
    const GeneratorGrid ggrid = make_generator_grid(grid, spec.fine_factor, margin);

    ExactSolution solution;
    if (gen.kind == GeneratorKind::separable) {
        solution = oracle_separable(model, gen.mu, ggrid.space);
    } else {
        EigenmodeOptions opt = gen.eigen;
        opt.t_max = grid.spacetime().axis(grid.time_axis()).hi();
        solution = oracle_eigenmode(model, ggrid.space, opt);
    }

    CoefficientSet coeffs = model.sample(grid.space());
    for (std::size_t s = 0; s < grid.space_size(); ++s) {
        const std::size_t g = ggrid.generator_node(grid.space(), s);
        coeffs.f[s] = solution.u(g, 0.0);
        coeffs.c_true[s] = solution.c_true()[g];
    }
    const double min_f = *std::min_element(coeffs.f.begin(), coeffs.f.end());
    if (!(min_f > 0.0)) fail(ErrorKind::positivity, "initial data f must be positive on the inversion box");
    coeffs.b_lower = model.b_lower > 0.0 ? model.b_lower : 0.25 * min_f;
    validate_coefficients(coeffs);

    const GeneratedField field = evolve_two_sided(solution, grid, coeffs.b_lower);
    CauchyTraces traces = add_noise(extract_traces(field, ggrid, grid), delta, seed);

    std::vector<double> u_true(grid.size()), w_true(grid.size());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const std::size_t g = ggrid.generator_node(grid.space(), grid.space_index(node));
        const double t = grid.point(node).t;
        u_true[node] = solution.u(g, t);
        w_true[node] = solution.log_rate(g, t);
    }
    return SyntheticProblem{std::move(grid), std::move(coeffs), std::move(solution), std::move(traces),
                            std::move(u_true), std::move(w_true)};
}

}  // namespace convexify
