#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pfscale::net {

using Complex = std::complex<double>;

class NetworkError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Phase : std::uint8_t { A = 0, B = 1, C = 2 };

/// Subset of {a, b, c} as a bit mask.
class PhaseSet {
  public:
    constexpr PhaseSet() = default;
    constexpr explicit PhaseSet(std::uint8_t bits) : bits_(bits & 0x7) {}
    static constexpr PhaseSet abc() { return PhaseSet(0x7); }
    static PhaseSet parse(std::string_view text);  // "abc", "ac", "b", ...

    constexpr bool contains(Phase p) const { return bits_ & (1u << static_cast<unsigned>(p)); }
    constexpr bool covers(PhaseSet other) const { return (bits_ & other.bits_) == other.bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    int size() const;
    std::vector<Phase> phases() const;  // ascending a, b, c
    /// Position of p among this set's phases.
    int position(Phase p) const;
    std::string to_string() const;
    constexpr std::uint8_t bits() const { return bits_; }

    bool operator==(const PhaseSet&) const = default;

  private:
    std::uint8_t bits_ = 0;
};

char phase_char(Phase p);
Phase parse_phase(std::string_view text);

/// Dense row-major complex matrix, used for branch primitive admittances.
struct CMatrix {
    int dim = 0;
    std::vector<Complex> data;

    CMatrix() = default;
    explicit CMatrix(int d) : dim(d), data(static_cast<std::size_t>(d) * d) {}
    Complex& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * dim + c]; }
    Complex operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * dim + c]; }
    bool operator==(const CMatrix&) const = default;
};

struct Bus {
    std::string id;
    PhaseSet phases;
    double nominal_kv = 0.0;  // line-to-ground

    bool operator==(const Bus&) const = default;
};

/// Two-port series element. primitive_y is 2q x 2q in siemens, rows and
/// columns ordered [from-bus phases, to-bus phases].
struct Branch {
    std::string from_bus;
    std::string to_bus;
    PhaseSet phases;
    CMatrix primitive_y;

    bool operator==(const Branch&) const = default;
};

enum class LoadKind { ConstantPower, ConstantImpedance };

struct Load {
    std::string bus;
    Phase phase = Phase::A;
    LoadKind kind = LoadKind::ConstantPower;
    Complex s_nominal;  // kVA consumed at nominal voltage; wye connected

    bool operator==(const Load&) const = default;
};

struct SourceSpec {
    std::string bus;
    std::vector<Complex> voltage_per_phase;  // per unit, one per source-bus phase

    bool operator==(const SourceSpec&) const = default;
};

/// Balanced 1 pu phasors at 0, -120 and +120 degrees for the phases present.
std::vector<Complex> balanced_source(PhaseSet phases);

/// (bus, phase) pair; a node of the admittance matrix.
struct NodeRef {
    std::int32_t bus;  // index into Network::buses()
    Phase phase;
};

/// Multi-phase feeder model. Construction validates every invariant and
/// builds the node numbering: non-source buses in declaration order with
/// phases a, b, c, then the source bus nodes last.
class Network {
  public:
    Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Load> loads,
            SourceSpec source, bool radial);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<Load>& loads() const { return loads_; }
    const SourceSpec& source() const { return source_; }
    bool radial() const { return radial_; }

    std::int32_t bus_count() const { return static_cast<std::int32_t>(buses_.size()); }
    std::int32_t node_count() const { return static_cast<std::int32_t>(nodes_.size()); }
    std::int32_t source_node_count() const;
    std::int32_t bus_index(std::string_view id) const;
    std::int32_t source_bus_index() const { return source_index_; }

    /// Node ordinal of (bus, phase); throws if the bus lacks the phase.
    std::int32_t node_index(std::int32_t bus, Phase phase) const;
    const std::vector<NodeRef>& nodes() const { return nodes_; }

    /// Copy with every load's s_nominal multiplied by factor (factor >= 0).
    Network scale_loads(double factor) const;

    bool operator==(const Network& other) const;

  private:
    void validate();
    void number_nodes();

    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<Load> loads_;
    SourceSpec source_;
    bool radial_ = true;

    std::unordered_map<std::string, std::int32_t> bus_lookup_;
    std::int32_t source_index_ = -1;
    std::vector<NodeRef> nodes_;
    std::vector<std::int32_t> first_node_;  // per bus, node ordinal of its first phase
};

inline Network scale_loads(const Network& net, double factor) {
    return net.scale_loads(factor);
}

}  // namespace pfscale::net
