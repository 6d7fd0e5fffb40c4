#pragma once

#include <cstdint>
#include <optional>

#include "pfscale/netmodel/network.hpp"

namespace pfscale::net {

/// Fractions of non-trunk buses carrying three, two and one phase.
struct PhaseMix {
    double three = 0.5;
    double two = 0.1;
    double one = 0.4;

    /// E[q^2] / E[q]: the equivalent p a large radial network with this mix
    /// and dense primitive blocks tends to. Mixes with a value in
    /// [1.35, 3.00] form the documented envelope.
    double expected_equivalent_p() const;
    double mean_phases() const;
};

/// Branch series impedances are drawn log-uniform in [z_min_pu, z_max_pu]
/// on a per-branch base: the branch rating is rating_factor times the
/// nominal (100 %) load downstream of it, shared over its phases.
struct ImpedanceProfile {
    double z_min_pu = 0.01;
    double z_max_pu = 0.1;
    double xr_multi_phase = 2.0;
    double xr_single_phase = 1.0;
    double mutual_ratio = 0.3;
    double rating_factor = 6.0;
};

/// One constant-power load per non-source node.
struct LoadDensity {
    double base_kva = 10.0;
    double fraction = 0.6;
    double power_factor = 0.95;
};

struct GeneratorSpec {
    std::int32_t m = 2;  // buses, including the source
    PhaseMix phase_mix;
    std::uint64_t seed = 1;
    ImpedanceProfile impedance;
    LoadDensity load_density;
    double nominal_kv = 2.4;  // line-to-ground
    /// When set, every bus (source included) carries exactly these phases
    /// and phase_mix is ignored.
    std::optional<PhaseSet> uniform_phases;
};

/// Random-attachment radial feeder: bus 0 is the three-phase source, bus 1
/// a three-phase trunk bus fed from it, and every later bus attaches to a
/// uniformly chosen earlier non-source bus whose phases cover its own.
/// Deterministic in the spec.
Network generate_radial(const GeneratorSpec& spec);

/// Bus count whose expected node count is close to `nodes` for this mix.
std::int32_t buses_for_nodes(std::int32_t nodes, const PhaseMix& mix);

}  // namespace pfscale::net
