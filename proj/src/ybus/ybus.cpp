#include "pfscale/ybus/ybus.hpp"

#include <numeric>

#include <fmt/format.h>

namespace pfscale::ybus {

YbusSystem assemble(const net::Network& net, double s_base_kva) {
    if (!(s_base_kva > 0.0)) {
        throw net::NetworkError("assemble: s_base_kva must be positive");
    }
    const double s_base = s_base_kva * 1e3;
    const Index n = net.node_count();
    const Index n_src = net.source_node_count();
    const Index n_load = n - n_src;

    std::vector<double> v_base(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        v_base[k] = net.buses()[net.nodes()[k].bus].nominal_kv * 1e3;
    }

    std::vector<sparse::Triplet<Complex>> trip;
    for (const net::Branch& br : net.branches()) {
        const Index f = net.bus_index(br.from_bus);
        const Index t = net.bus_index(br.to_bus);
        const auto ph = br.phases.phases();
        const int q = static_cast<int>(ph.size());
        std::vector<Index> idx(2 * q);
        for (int k = 0; k < q; ++k) {
            try {
                idx[k] = net.node_index(f, ph[k]);
                idx[q + k] = net.node_index(t, ph[k]);
            } catch (const net::NetworkError& e) {
                throw net::NetworkError(
                    fmt::format("branch {} -> {}: {}", br.from_bus, br.to_bus, e.what()));
            }
        }
        for (int r = 0; r < 2 * q; ++r) {
            for (int c = 0; c < 2 * q; ++c) {
                const double scale = v_base[idx[r]] * v_base[idx[c]] / s_base;
                const Complex y = br.primitive_y(r, c) * scale;
                trip.push_back({idx[r], idx[c], y});
            }
        }
    }

    YbusSystem sys;
    sys.s_base_va = s_base;
    sys.s_load.assign(n_load, Complex{});
    sys.y_load.assign(n_load, Complex{});
    for (const net::Load& load : net.loads()) {
        const Index k = net.node_index(net.bus_index(load.bus), load.phase);
        const Complex s_pu = load.s_nominal * 1e3 / s_base;
        if (load.kind == net::LoadKind::ConstantPower) {
            sys.s_load[k] += s_pu;
        } else {
            sys.y_load[k] += std::conj(s_pu);
            trip.push_back({k, k, std::conj(s_pu)});
        }
    }

    sys.y_full = CMatrix::from_triplets(n, n, trip);
    sys.y_ll = sys.y_full.block(0, n_load, 0, n_load);
    sys.y_ls = sys.y_full.block(0, n_load, n_load, n);
    sys.load_nodes.resize(n_load);
    std::iota(sys.load_nodes.begin(), sys.load_nodes.end(), 0);
    sys.source_nodes.resize(n_src);
    std::iota(sys.source_nodes.begin(), sys.source_nodes.end(), n_load);
    sys.v_source = net.source().voltage_per_phase;
    return sys;
}

std::vector<Complex> source_current(const YbusSystem& sys) {
    return sys.y_ls.multiply(sys.v_source);
}

}  // namespace pfscale::ybus
