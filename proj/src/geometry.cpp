#include "convexify/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"

namespace convexify {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void GridSpec::validate() const {
    require(n_space >= 1 && n_space <= 3, ErrorKind::configuration, "domain.n_space must be 1, 2 or 3");
    require(a < d, ErrorKind::configuration, "empty domain: need a < d");
    require(a > 0.0 && d < 1.0, ErrorKind::configuration, "need 0 < a < d < 1");
    require(T > 0.0, ErrorKind::configuration, "domain.T must be positive");
    require(epsilon >= 0.0 && eps() < d - a, ErrorKind::configuration, "domain.epsilon must lie in (0, d-a)");
    require(n_x1 >= 5 && n_t >= 5 && (n_space == 1 || n_xbar >= 5), ErrorKind::configuration,
            "degenerate box: every axis needs at least 5 nodes");
    require(n_t % 2 == 1, ErrorKind::configuration, "grid.n_t must be odd so that t = 0 is a node");
    require(fine_factor >= 1, ErrorKind::configuration, "grid.fine_factor must be >= 1");
}

std::string GridSpec::canonical() const {
    std::ostringstream os;
    os << "n_space=" << n_space << ";a=" << format_double(a) << ";d=" << format_double(d)
       << ";T=" << format_double(T) << ";epsilon=" << format_double(eps()) << ";n_x1=" << n_x1
       << ";n_xbar=" << n_xbar << ";n_t=" << n_t << ";fine_factor=" << fine_factor;
    return os.str();
}

double psi_value(const SpaceTimePoint& p, const GridSpec& spec) {
    double s = p.x[0] + p.t * p.t / (spec.T * spec.T) + spec.a;
    for (int k = 1; k < spec.n_space; ++k) s += p.x[k] * p.x[k];
    return s;
}

Normalization parse_normalization(const std::string& text) {
    if (text == "paper") return Normalization::paper;
    if (text == "max") return Normalization::max;
    fail(ErrorKind::configuration, "carleman.normalization must be 'paper' or 'max', got '" + text + "'");
}

const char* to_string(Normalization n) { return n == Normalization::paper ? "paper" : "max"; }

void CarlemanParams::validate() const {
    require(lambda >= 0.0, ErrorKind::configuration, "carleman.lambda must be >= 0");
    require(nu >= 1.0, ErrorKind::configuration, "carleman.nu must be >= 1");
}

double CarlemanParams::exponent_shift(const GridSpec& spec) const {
    if (normalization == Normalization::paper) return -3.0 * lambda * std::pow(spec.d, -nu);
    return -2.0 * lambda * std::pow(spec.a, -nu);
}

double carleman_weight_sq(const SpaceTimePoint& p, const CarlemanParams& params, const GridSpec& spec) {
    const double psi = psi_value(p, spec);
    const double e = 2.0 * params.lambda * std::pow(psi, -params.nu) + params.exponent_shift(spec);
    if (e > 700.0) {
        std::ostringstream os;
        os << "Carleman weight exponent " << e << " exceeds 700 for lambda=" << params.lambda
           << ", nu=" << params.nu << ", a=" << spec.a << "; use max normalization or smaller lambda";
        fail(ErrorKind::overflow, os.str());
    }
    return std::exp(e);
}

DomainGrid::DomainGrid(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    const double r = std::sqrt(spec_.d - spec_.a);
    std::vector<Axis> axes;
    axes.push_back(Axis::span(0.0, spec_.d - spec_.a, spec_.n_x1));
    for (int k = 1; k < spec_.n_space; ++k) axes.push_back(Axis::span(-r, r, spec_.n_xbar));
    axes.push_back(Axis::span(-spec_.T * r, spec_.T * r, spec_.n_t));
    spacetime_ = BoxGrid(axes);
    space_ = spacetime_.leading(spec_.n_space);
    face_ = BoxGrid(std::vector<Axis>(axes.begin() + 1, axes.end()));

    const std::size_t n = spacetime_.size();
    const double d = spec_.d;
    const double d_eps = d - spec_.eps();
    psi_.resize(n);
    inside_G_.assign(n, 0);
    inside_G_eps_.assign(n, 0);
    on_gamma_.assign(n, 0);
    near_xi_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double psi = psi_value(point(i), spec_);
        psi_[i] = psi;
        const bool on_face = x1_index(i) == 0;
        inside_G_[i] = !on_face && psi < d;
        inside_G_eps_[i] = !on_face && psi < d_eps;
        on_gamma_[i] = on_face && psi < d;
    }

    // Cells whose corners straddle the level surface psi = d.
    const int dims = spacetime_.dims();
    const int corners = 1 << dims;
    for (std::size_t i = 0; i < n; ++i) {
        bool lower = true;
        for (int k = 0; k < dims; ++k) lower = lower && spacetime_.index_along(i, k) < spacetime_.axis(k).count - 1;
        if (!lower) continue;
        int in = 0;
        for (int c = 0; c < corners; ++c) {
            std::size_t f = i;
            for (int k = 0; k < dims; ++k)
                if (c & (1 << k)) f += spacetime_.stride(k);
            in += psi_[f] < d;
        }
        if (in == 0 || in == corners) continue;
        for (int c = 0; c < corners; ++c) {
            std::size_t f = i;
            for (int k = 0; k < dims; ++k)
                if (c & (1 << k)) f += spacetime_.stride(k);
            near_xi_[f] = 1;
        }
    }

    // Cell-fraction quadrature: each cell contributes vol/2^D per corner inside the region,
    // which is the box trapezoid rule multiplied by the node mask.
    quad_box_ = spacetime_.trapezoid_weights();
    quad_G_.resize(n);
    quad_G_eps_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        quad_G_[i] = inside_G_[i] ? quad_box_[i] : 0.0;
        quad_G_eps_[i] = inside_G_eps_[i] ? quad_box_[i] : 0.0;
    }
}

SpaceTimePoint DomainGrid::point(std::size_t node) const {
    SpaceTimePoint p;
    for (int k = 0; k < spec_.n_space; ++k) p.x[k] = spacetime_.coordinate(node, k);
    p.t = spacetime_.coordinate(node, time_axis());
    return p;
}

SpaceTimePoint DomainGrid::space_point(std::size_t space_node) const {
    SpaceTimePoint p;
    for (int k = 0; k < spec_.n_space; ++k) p.x[k] = space_.coordinate(space_node, k);
    return p;
}

std::size_t DomainGrid::node_from_face(std::size_t face_node, int x1_idx) const {
    return face_node * spacetime_.stride(1) + static_cast<std::size_t>(x1_idx);
}

std::uint64_t DomainGrid::hash() const { return fnv1a(spec_.canonical()); }

DomainGrid build_domain(const GridSpec& spec) { return DomainGrid(spec); }

std::vector<double> carleman_weight_field(const DomainGrid& grid, const CarlemanParams& params) {
    params.validate();
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = carleman_weight_sq(grid.point(i), params, grid.spec());
    return w;
}

void write_grid_csv(std::ostream& os, const DomainGrid& grid, const CarlemanParams& params) {
    const auto weight = carleman_weight_field(grid, params);
    os << "# grid_hash=" << hex64(grid.hash()) << "\n";
    static const char* names[] = {"x1", "x2", "x3"};
    for (int k = 0; k < grid.n_space(); ++k) os << names[k] << ",";
    os << "t,psi,weight,in_G,in_G_eps,on_gamma\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto p = grid.point(i);
        for (int k = 0; k < grid.n_space(); ++k) os << format_double(p.x[k]) << ",";
        os << format_double(p.t) << "," << format_double(grid.psi()[i]) << "," << format_double(weight[i]) << ","
           << int(grid.inside_G()[i]) << "," << int(grid.inside_G_eps()[i]) << "," << int(grid.on_gamma()[i])
           << "\n";
    }
}

}  // namespace convexify
