#include "pfscale/netmodel/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace pfscale::net {

PhaseSet PhaseSet::parse(std::string_view text) {
    std::uint8_t bits = 0;
    for (const char c : text) {
        const Phase p = parse_phase(std::string_view(&c, 1));
        const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
        if (bits & bit) {
            throw NetworkError(fmt::format("phase '{}' repeated in '{}'", c, text));
        }
        bits |= bit;
    }
    if (bits == 0) {
        throw NetworkError("empty phase set");
    }
    return PhaseSet(bits);
}

int PhaseSet::size() const { return std::popcount(static_cast<unsigned>(bits_)); }

std::vector<Phase> PhaseSet::phases() const {
    std::vector<Phase> out;
    for (const Phase p : {Phase::A, Phase::B, Phase::C}) {
        if (contains(p)) {
            out.push_back(p);
        }
    }
    return out;
}

int PhaseSet::position(Phase p) const {
    if (!contains(p)) {
        return -1;
    }
    const unsigned below = (1u << static_cast<unsigned>(p)) - 1u;
    return std::popcount(static_cast<unsigned>(bits_) & below);
}

std::string PhaseSet::to_string() const {
    std::string s;
    for (const Phase p : phases()) {
        s += phase_char(p);
    }
    return s;
}

char phase_char(Phase p) { return static_cast<char>('a' + static_cast<int>(p)); }

Phase parse_phase(std::string_view text) {
    if (text.size() == 1) {
        switch (text[0]) {
            case 'a':
            case 'A':
                return Phase::A;
            case 'b':
            case 'B':
                return Phase::B;
            case 'c':
            case 'C':
                return Phase::C;
            default:
                break;
        }
    }
    throw NetworkError(fmt::format("unknown phase '{}'", text));
}

std::vector<Complex> balanced_source(PhaseSet phases) {
    std::vector<Complex> v;
    for (const Phase p : phases.phases()) {
        const double angle = -2.0 * std::numbers::pi / 3.0 * static_cast<int>(p);
        v.push_back(std::polar(1.0, angle));
    }
    return v;
}

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Load> loads,
                 SourceSpec source, bool radial)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      loads_(std::move(loads)),
      source_(std::move(source)),
      radial_(radial) {
    validate();
    number_nodes();
}

namespace {

std::int32_t find_root(std::vector<std::int32_t>& parent, std::int32_t v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

void Network::validate() {
    if (buses_.empty()) {
        throw NetworkError("network has no buses");
    }
    bus_lookup_.reserve(buses_.size());
    for (std::size_t b = 0; b < buses_.size(); ++b) {
        const Bus& bus = buses_[b];
        if (bus.phases.empty()) {
            throw NetworkError(fmt::format("buses[{}] '{}': no phases", b, bus.id));
        }
        if (!(bus.nominal_kv > 0.0) || !std::isfinite(bus.nominal_kv)) {
            throw NetworkError(fmt::format("buses[{}] '{}': nominal_kv must be positive", b, bus.id));
        }
        if (!bus_lookup_.emplace(bus.id, static_cast<std::int32_t>(b)).second) {
            throw NetworkError(fmt::format("buses[{}]: duplicate bus id '{}'", b, bus.id));
        }
    }

    const auto lookup = [&](const std::string& id, std::string_view where) {
        const auto it = bus_lookup_.find(id);
        if (it == bus_lookup_.end()) {
            throw NetworkError(fmt::format("{}: undeclared bus '{}'", where, id));
        }
        return it->second;
    };

    source_index_ = lookup(source_.bus, "source");
    const Bus& src = buses_[source_index_];
    if (source_.voltage_per_phase.size() != static_cast<std::size_t>(src.phases.size())) {
        throw NetworkError(fmt::format("source: {} voltages given for {} phases of bus '{}'",
                                       source_.voltage_per_phase.size(), src.phases.size(),
                                       src.id));
    }
    for (const Complex& v : source_.voltage_per_phase) {
        if (!(std::abs(v) > 0.0) || !std::isfinite(std::abs(v))) {
            throw NetworkError("source: voltage magnitudes must be nonzero and finite");
        }
    }

    std::vector<std::int32_t> parent(buses_.size());
    std::iota(parent.begin(), parent.end(), 0);
    bool cyclic = false;
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const Branch& br = branches_[k];
        const std::string where = fmt::format("branches[{}]", k);
        const auto f = lookup(br.from_bus, where);
        const auto t = lookup(br.to_bus, where);
        if (f == t) {
            throw NetworkError(fmt::format("{}: branch connects bus '{}' to itself", where,
                                           br.from_bus));
        }
        if (br.phases.empty()) {
            throw NetworkError(fmt::format("{}: no phases", where));
        }
        if (!buses_[f].phases.covers(br.phases) || !buses_[t].phases.covers(br.phases)) {
            throw NetworkError(fmt::format("{}: phases '{}' not present at both '{}' ({}) and '{}' ({})",
                                           where, br.phases.to_string(), br.from_bus,
                                           buses_[f].phases.to_string(), br.to_bus,
                                           buses_[t].phases.to_string()));
        }
        const int dim = 2 * br.phases.size();
        if (br.primitive_y.dim != dim ||
            br.primitive_y.data.size() != static_cast<std::size_t>(dim) * dim) {
            throw NetworkError(fmt::format("{}: primitive_y must be {}x{}", where, dim, dim));
        }
        double scale = 0.0;
        for (const Complex& y : br.primitive_y.data) {
            if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) {
                throw NetworkError(fmt::format("{}: primitive_y has non-finite entries", where));
            }
            scale = std::max(scale, std::abs(y));
        }
        for (int r = 0; r < dim; ++r) {
            for (int c = r + 1; c < dim; ++c) {
                if (std::abs(br.primitive_y(r, c) - br.primitive_y(c, r)) > 1e-12 * scale) {
                    throw NetworkError(fmt::format("{}: primitive_y is not symmetric", where));
                }
            }
        }
        const auto a = find_root(parent, f);
        const auto b = find_root(parent, t);
        if (a == b) {
            cyclic = true;
        } else {
            parent[a] = b;
        }
    }
    const auto root = find_root(parent, 0);
    for (std::size_t b = 1; b < buses_.size(); ++b) {
        if (find_root(parent, static_cast<std::int32_t>(b)) != root) {
            throw NetworkError(fmt::format("bus '{}' is not connected to the rest of the network",
                                           buses_[b].id));
        }
    }
    if (radial_ && (cyclic || branches_.size() + 1 != buses_.size())) {
        throw NetworkError(fmt::format(
            "network flagged radial but is not a tree: {} branches for {} buses",
            branches_.size(), buses_.size()));
    }

    for (std::size_t k = 0; k < loads_.size(); ++k) {
        const Load& load = loads_[k];
        const std::string where = fmt::format("loads[{}]", k);
        const auto b = lookup(load.bus, where);
        if (b == source_index_) {
            throw NetworkError(fmt::format("{}: load on source bus '{}'", where, load.bus));
        }
        if (!buses_[b].phases.contains(load.phase)) {
            throw NetworkError(fmt::format("{}: bus '{}' has no phase '{}'", where, load.bus,
                                           phase_char(load.phase)));
        }
        if (!std::isfinite(load.s_nominal.real()) || !std::isfinite(load.s_nominal.imag())) {
            throw NetworkError(fmt::format("{}: s_nominal is not finite", where));
        }
    }
}

void Network::number_nodes() {
    first_node_.assign(buses_.size(), -1);
    const auto place = [&](std::int32_t b) {
        first_node_[b] = static_cast<std::int32_t>(nodes_.size());
        for (const Phase p : buses_[b].phases.phases()) {
            nodes_.push_back({b, p});
        }
    };
    for (std::int32_t b = 0; b < bus_count(); ++b) {
        if (b != source_index_) {
            place(b);
        }
    }
    place(source_index_);
}

std::int32_t Network::source_node_count() const {
    return buses_[source_index_].phases.size();
}

std::int32_t Network::bus_index(std::string_view id) const {
    const auto it = bus_lookup_.find(std::string(id));
    if (it == bus_lookup_.end()) {
        throw NetworkError(fmt::format("unknown bus '{}'", id));
    }
    return it->second;
}

std::int32_t Network::node_index(std::int32_t bus, Phase phase) const {
    const int pos = buses_.at(static_cast<std::size_t>(bus)).phases.position(phase);
    if (pos < 0) {
        throw NetworkError(fmt::format("bus '{}' has no phase '{}'", buses_[bus].id,
                                       phase_char(phase)));
    }
    return first_node_[bus] + pos;
}

Network Network::scale_loads(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw NetworkError("load scale factor must be finite and non-negative");
    }
    Network out = *this;
    for (Load& load : out.loads_) {
        load.s_nominal *= factor;
    }
    return out;
}

bool Network::operator==(const Network& other) const {
    return radial_ == other.radial_ && buses_ == other.buses_ && branches_ == other.branches_ &&
           loads_ == other.loads_ && source_ == other.source_;
}

}  // namespace pfscale::net
