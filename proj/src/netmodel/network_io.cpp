#include "pfscale/netmodel/network_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace pfscale::net {

using nlohmann::json;

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::string_view kind_name(LoadKind kind) {
    return kind == LoadKind::ConstantPower ? "constant_power" : "constant_impedance";
}

// Field access with path-qualified diagnostics.
class Reader {
  public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    const json& require(const char* key, json::value_t type) const {
        if (!node_.is_object()) {
            fail(path_, "expected an object");
        }
        const auto it = node_.find(key);
        const std::string where = path_ + "." + key;
        if (it == node_.end()) {
            fail(where, "missing required field");
        }
        const bool number_ok = type == json::value_t::number_float && it->is_number();
        if (!number_ok && it->type() != type) {
            fail(where, fmt::format("expected {}", type_name(type)));
        }
        return *it;
    }

    std::string string(const char* key) const {
        return require(key, json::value_t::string).get<std::string>();
    }
    double number(const char* key) const {
        return require(key, json::value_t::number_float).get<double>();
    }
    const json& array(const char* key) const { return require(key, json::value_t::array); }

    [[noreturn]] static void fail(const std::string& where, const std::string& what) {
        throw NetworkError(fmt::format("{}: {}", where, what));
    }

    static Complex complex(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(where, "expected a complex number [re, im]");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    static PhaseSet phases(const json& v, const std::string& where) {
        if (!v.is_string()) {
            fail(where, "expected a phase string such as \"abc\"");
        }
        try {
            return PhaseSet::parse(v.get<std::string>());
        } catch (const NetworkError& e) {
            fail(where, e.what());
        }
    }

  private:
    static const char* type_name(json::value_t t) {
        switch (t) {
            case json::value_t::string:
                return "a string";
            case json::value_t::array:
                return "an array";
            case json::value_t::boolean:
                return "a boolean";
            case json::value_t::object:
                return "an object";
            default:
                return "a number";
        }
    }

    const json& node_;
    std::string path_;
};

}  // namespace

json to_json(const Network& net) {
    json buses = json::array();
    for (const Bus& b : net.buses()) {
        buses.push_back({{"id", b.id}, {"phases", b.phases.to_string()}, {"nominal_kv", b.nominal_kv}});
    }
    json branches = json::array();
    for (const Branch& br : net.branches()) {
        json rows = json::array();
        for (int r = 0; r < br.primitive_y.dim; ++r) {
            json row = json::array();
            for (int c = 0; c < br.primitive_y.dim; ++c) {
                row.push_back(complex_json(br.primitive_y(r, c)));
            }
            rows.push_back(std::move(row));
        }
        branches.push_back({{"from", br.from_bus},
                            {"to", br.to_bus},
                            {"phases", br.phases.to_string()},
                            {"primitive_y", std::move(rows)}});
    }
    json loads = json::array();
    for (const Load& l : net.loads()) {
        loads.push_back({{"bus", l.bus},
                         {"phase", std::string(1, phase_char(l.phase))},
                         {"kind", kind_name(l.kind)},
                         {"s_nominal", complex_json(l.s_nominal)},
                         {"connection", "wye"}});
    }
    json volts = json::array();
    for (const Complex& v : net.source().voltage_per_phase) {
        volts.push_back(complex_json(v));
    }
    return {{"radial", net.radial()},
            {"buses", std::move(buses)},
            {"branches", std::move(branches)},
            {"loads", std::move(loads)},
            {"source", {{"bus", net.source().bus}, {"voltage_per_phase", std::move(volts)}}}};
}

Network network_from_json(const json& doc) {
    const Reader top(doc, "$");
    const bool radial = top.require("radial", json::value_t::boolean).get<bool>();

    std::vector<Bus> buses;
    const json& jb = top.array("buses");
    for (std::size_t i = 0; i < jb.size(); ++i) {
        const std::string where = fmt::format("$.buses[{}]", i);
        const Reader r(jb[i], where);
        buses.push_back({r.string("id"), Reader::phases(r.require("phases", json::value_t::string),
                                                        where + ".phases"),
                         r.number("nominal_kv")});
    }

    std::vector<Branch> branches;
    const json& jbr = top.array("branches");
    for (std::size_t i = 0; i < jbr.size(); ++i) {
        const std::string where = fmt::format("$.branches[{}]", i);
        const Reader r(jbr[i], where);
        Branch br;
        br.from_bus = r.string("from");
        br.to_bus = r.string("to");
        br.phases = Reader::phases(r.require("phases", json::value_t::string), where + ".phases");
        const json& rows = r.array("primitive_y");
        const int dim = static_cast<int>(rows.size());
        br.primitive_y = CMatrix(dim);
        for (int row = 0; row < dim; ++row) {
            const std::string rw = fmt::format("{}.primitive_y[{}]", where, row);
            if (!rows[row].is_array() || static_cast<int>(rows[row].size()) != dim) {
                Reader::fail(rw, fmt::format("expected a row of {} complex entries", dim));
            }
            for (int c = 0; c < dim; ++c) {
                br.primitive_y(row, c) = Reader::complex(rows[row][c], fmt::format("{}[{}]", rw, c));
            }
        }
        branches.push_back(std::move(br));
    }

    std::vector<Load> loads;
    const json& jl = top.array("loads");
    for (std::size_t i = 0; i < jl.size(); ++i) {
        const std::string where = fmt::format("$.loads[{}]", i);
        const Reader r(jl[i], where);
        Load load;
        load.bus = r.string("bus");
        try {
            load.phase = parse_phase(r.string("phase"));
        } catch (const NetworkError& e) {
            Reader::fail(where + ".phase", e.what());
        }
        const std::string kind = r.string("kind");
        if (kind == "constant_power") {
            load.kind = LoadKind::ConstantPower;
        } else if (kind == "constant_impedance") {
            load.kind = LoadKind::ConstantImpedance;
        } else {
            Reader::fail(where + ".kind", fmt::format("unknown load kind '{}'", kind));
        }
        load.s_nominal = Reader::complex(r.require("s_nominal", json::value_t::array),
                                         where + ".s_nominal");
        if (jl[i].contains("connection") && jl[i]["connection"] != "wye") {
            Reader::fail(where + ".connection", "only wye connections are supported");
        }
        loads.push_back(std::move(load));
    }

    const Reader rs(top.require("source", json::value_t::object), "$.source");
    SourceSpec source;
    source.bus = rs.string("bus");
    const json& jv = rs.array("voltage_per_phase");
    for (std::size_t i = 0; i < jv.size(); ++i) {
        source.voltage_per_phase.push_back(
            Reader::complex(jv[i], fmt::format("$.source.voltage_per_phase[{}]", i)));
    }

    return Network(std::move(buses), std::move(branches), std::move(loads), std::move(source),
                   radial);
}

std::string serialize_network(const Network& net) { return to_json(net).dump() + "\n"; }

Network parse_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw NetworkError(fmt::format("invalid JSON at byte {}: {}", e.byte, e.what()));
    }
    return network_from_json(doc);
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw NetworkError(fmt::format("cannot open '{}' for writing", path.string()));
    }
    os << serialize_network(net);
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw NetworkError(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return parse_network(buf.str());
    } catch (const NetworkError& e) {
        throw NetworkError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace pfscale::net
