#include "pfscale/netmodel/generator.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "pfscale/common/rng.hpp"

namespace pfscale::net {

double PhaseMix::mean_phases() const { return 3.0 * three + 2.0 * two + one; }

double PhaseMix::expected_equivalent_p() const {
    return (9.0 * three + 4.0 * two + one) / mean_phases();
}

std::int32_t buses_for_nodes(std::int32_t nodes, const PhaseMix& mix) {
    // source and trunk are three-phase
    const double rest = std::max(0.0, static_cast<double>(nodes) - 6.0);
    return 2 + static_cast<std::int32_t>(std::lround(rest / mix.mean_phases()));
}

namespace {

// Gauss-Jordan inverse of a small dense complex matrix.
CMatrix invert(CMatrix a) {
    const int n = a.dim;
    CMatrix inv(n);
    for (int i = 0; i < n; ++i) {
        inv(i, i) = 1.0;
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) {
                piv = r;
            }
        }
        if (std::abs(a(piv, c)) == 0.0) {
            throw NetworkError("singular branch impedance matrix");
        }
        for (int k = 0; k < n; ++k) {
            std::swap(a(c, k), a(piv, k));
            std::swap(inv(c, k), inv(piv, k));
        }
        const Complex d = a(c, c);
        for (int k = 0; k < n; ++k) {
            a(c, k) /= d;
            inv(c, k) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const Complex f = a(r, c);
            for (int k = 0; k < n; ++k) {
                a(r, k) -= f * a(c, k);
                inv(r, k) -= f * inv(c, k);
            }
        }
    }
    return inv;
}

CMatrix two_port(CMatrix ys) {
    const int q = ys.dim;
    // the inverse of a symmetric matrix is symmetric up to rounding
    for (int r = 0; r < q; ++r) {
        for (int c = r + 1; c < q; ++c) {
            const Complex avg = 0.5 * (ys(r, c) + ys(c, r));
            ys(r, c) = avg;
            ys(c, r) = avg;
        }
    }
    CMatrix y(2 * q);
    for (int r = 0; r < q; ++r) {
        for (int c = 0; c < q; ++c) {
            y(r, c) = ys(r, c);
            y(q + r, q + c) = ys(r, c);
            y(r, q + c) = -ys(r, c);
            y(q + r, c) = -ys(r, c);
        }
    }
    return y;
}

constexpr std::array<std::uint8_t, 3> kTwoPhase{0b011, 0b110, 0b101};

}  // namespace

Network generate_radial(const GeneratorSpec& spec) {
    if (spec.m < 2) {
        throw NetworkError("generator: need at least two buses");
    }
    const PhaseMix& mix = spec.phase_mix;
    if (spec.uniform_phases && spec.uniform_phases->empty()) {
        throw NetworkError("generator: uniform phase set is empty");
    }
    if (!spec.uniform_phases && (mix.three < 0 || mix.two < 0 || mix.one < 0 ||
        std::abs(mix.three + mix.two + mix.one - 1.0) > 1e-9)) {
        throw NetworkError(fmt::format(
            "generator: phase mix fractions must be non-negative and sum to 1 (got {}, {}, {})",
            mix.three, mix.two, mix.one));
    }
    const ImpedanceProfile& zp = spec.impedance;
    if (!(zp.z_min_pu > 0.0) || zp.z_max_pu < zp.z_min_pu || !(zp.rating_factor > 0.0)) {
        throw NetworkError("generator: invalid impedance profile");
    }
    const LoadDensity& ld = spec.load_density;
    if (ld.base_kva < 0 || ld.fraction < 0 || ld.power_factor <= 0 || ld.power_factor > 1) {
        throw NetworkError("generator: invalid load density");
    }

    Rng rng(spec.seed);
    const auto m = static_cast<std::size_t>(spec.m);
    std::vector<PhaseSet> phases(m);
    std::vector<std::int32_t> parent(m, -1);
    // candidates[mask]: buses whose phases cover mask
    std::array<std::vector<std::int32_t>, 8> candidates;

    const PhaseSet root = spec.uniform_phases.value_or(PhaseSet::abc());
    phases[0] = root;
    phases[1] = root;
    parent[1] = 0;
    for (std::uint8_t mask = 1; mask < 8; ++mask) {
        candidates[mask].push_back(1);
    }
    for (std::size_t b = 2; b < m; ++b) {
        const double u = rng.uniform();
        PhaseSet ps;
        if (spec.uniform_phases) {
            ps = root;
        } else if (u < mix.three) {
            ps = PhaseSet::abc();
        } else if (u < mix.three + mix.two) {
            ps = PhaseSet(kTwoPhase[rng.below(3)]);
        } else {
            ps = PhaseSet(static_cast<std::uint8_t>(1u << rng.below(3)));
        }
        const auto& pool = candidates[ps.bits()];
        parent[b] = pool[rng.below(pool.size())];
        phases[b] = ps;
        for (std::uint8_t mask = 1; mask < 8; ++mask) {
            if (ps.covers(PhaseSet(mask))) {
                candidates[mask].push_back(static_cast<std::int32_t>(b));
            }
        }
    }

    // nominal load carried by the branch into each bus
    std::vector<double> downstream_kva(m, 0.0);
    for (std::size_t b = m - 1; b >= 1; --b) {
        downstream_kva[b] += ld.base_kva * phases[b].size();
        if (parent[b] > 0) {
            downstream_kva[parent[b]] += downstream_kva[b];
        }
    }

    std::vector<Bus> buses;
    buses.reserve(m);
    for (std::size_t b = 0; b < m; ++b) {
        buses.push_back({fmt::format("b{}", b), phases[b], spec.nominal_kv});
    }

    std::vector<Branch> branches;
    branches.reserve(m - 1);
    const double v_base = spec.nominal_kv * 1e3;
    for (std::size_t b = 1; b < m; ++b) {
        const int q = phases[b].size();
        const double z_pu = zp.z_min_pu * std::pow(zp.z_max_pu / zp.z_min_pu, rng.uniform());
        const double xr = q > 1 ? zp.xr_multi_phase : zp.xr_single_phase;
        const double rating_va = 1e3 * std::max(zp.rating_factor * downstream_kva[b] / q, 1.0);
        const double z_base = v_base * v_base / rating_va;
        const Complex z_self = z_pu * z_base * Complex(1.0, xr) / std::hypot(1.0, xr);
        CMatrix z(q);
        for (int r = 0; r < q; ++r) {
            for (int c = 0; c < q; ++c) {
                z(r, c) = r == c ? z_self : zp.mutual_ratio * z_self;
            }
        }
        branches.push_back({buses[parent[b]].id, buses[b].id, phases[b], two_port(invert(z))});
    }

    std::vector<Load> loads;
    const Complex s_per_node =
        ld.fraction * ld.base_kva *
        Complex(ld.power_factor, std::sqrt(1.0 - ld.power_factor * ld.power_factor));
    for (std::size_t b = 1; b < m; ++b) {
        for (const Phase p : phases[b].phases()) {
            loads.push_back({buses[b].id, p, LoadKind::ConstantPower, s_per_node});
        }
    }

    SourceSpec source{buses[0].id, balanced_source(root)};
    return Network(std::move(buses), std::move(branches), std::move(loads), std::move(source),
                   true);
}

}  // namespace pfscale::net
