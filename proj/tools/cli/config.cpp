#include "cli/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zefoz/error.hpp"

namespace zefoz::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw Error(ErrorKind::configuration, fmt::format("config key '{}': {}", key, why));
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) fail(key, "expected a number");
    return j.get<double>();
}

Vec3 vec3(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3) fail(key, "expected an array of three numbers");
    Vec3 v;
    for (int k = 0; k < 3; ++k) v[k] = number(j[static_cast<std::size_t>(k)], key);
    return v;
}

std::string fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace

SystemConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::configuration, std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw Error(ErrorKind::configuration, "config must be a JSON object");

    static const std::set<std::string> known = {"name",       "spin_two_I",       "q_principal_MHz", "g_principal_kHz_per_G",
                                                "euler_deg",  "euler_convention", "c2_axis"};
    for (const auto& [key, value] : root.items()) {
        if (!known.contains(key)) fail(key, "unknown key");
    }
    for (const char* key : {"spin_two_I", "q_principal_MHz", "g_principal_kHz_per_G", "euler_deg"}) {
        if (!root.contains(key)) fail(key, "missing");
    }

    SystemConfig c;
    if (root.contains("name")) {
        if (!root["name"].is_string()) fail("name", "expected a string");
        c.name = root["name"].get<std::string>();
    }
    const auto& spin = root["spin_two_I"];
    if (!spin.is_number_integer()) fail("spin_two_I", "expected an integer");
    c.spin_two_i = spin.get<int>();
    if (c.spin_two_i < 1 || c.spin_two_i >= kMaxDim) fail("spin_two_I", "must be between 1 and 15");

    const auto& q = root["q_principal_MHz"];
    if (!q.is_object()) fail("q_principal_MHz", "expected an object {\"E\": ..., \"D\": ...}");
    for (const auto& [key, value] : q.items()) {
        if (key != "E" && key != "D") fail("q_principal_MHz." + key, "unknown key");
    }
    if (!q.contains("E")) fail("q_principal_MHz.E", "missing");
    if (!q.contains("D")) fail("q_principal_MHz.D", "missing");
    c.tensors.e_mhz = number(q["E"], "q_principal_MHz.E");
    c.tensors.d_mhz = number(q["D"], "q_principal_MHz.D");
    c.tensors.g_khz_per_gauss = vec3(root["g_principal_kHz_per_G"], "g_principal_kHz_per_G");
    c.tensors.euler_deg = vec3(root["euler_deg"], "euler_deg");
    if (root.contains("euler_convention")) {
        if (!root["euler_convention"].is_string()) fail("euler_convention", "expected a string");
        try {
            c.tensors.convention = parse_euler_convention(root["euler_convention"].get<std::string>());
        } catch (const Error& e) {
            fail("euler_convention", e.what());
        }
    }
    if (root.contains("c2_axis")) {
        c.c2_axis = vec3(root["c2_axis"], "c2_axis");
        if (c.c2_axis.norm() == 0.0) fail("c2_axis", "must be nonzero");
        c.c2_axis.normalize();
    }

    // tensor invariants are enforced at load time, reported against the key
    // that carries the offending value
    const auto& t = c.tensors;
    const bool q_free = t.e_mhz == 0.0 && t.d_mhz == 0.0;
    if (!q_free && !(t.d_mhz > 0.0)) fail("q_principal_MHz.D", "must be > 0 (or E = D = 0 for no quadrupole)");
    if (!(t.e_mhz >= 0.0)) fail("q_principal_MHz.E", "must be >= 0");
    if (!(t.g_khz_per_gauss.minCoeff() > 0.0)) fail("g_principal_kHz_per_G", "all components must be > 0");
    try {
        build_tensors(c.tensors);
    } catch (const Error& e) {
        throw Error(ErrorKind::configuration, std::string("config tensors rejected: ") + e.what());
    }
    return c;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::configuration, "cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string SystemConfig::canonical_json() const {
    json j;
    j["name"] = name;
    j["spin_two_I"] = spin_two_i;
    j["q_principal_MHz"] = {{"E", tensors.e_mhz}, {"D", tensors.d_mhz}};
    j["g_principal_kHz_per_G"] = {tensors.g_khz_per_gauss[0], tensors.g_khz_per_gauss[1], tensors.g_khz_per_gauss[2]};
    j["euler_deg"] = {tensors.euler_deg[0], tensors.euler_deg[1], tensors.euler_deg[2]};
    j["euler_convention"] = std::string(to_string(tensors.convention));
    j["c2_axis"] = {c2_axis[0], c2_axis[1], c2_axis[2]};
    return j.dump();
}

std::string SystemConfig::hash() const { return fnv1a(canonical_json()); }

SystemConfig with_convention(SystemConfig config, const std::optional<std::string>& tag) {
    if (tag) config.tensors.convention = parse_euler_convention(*tag);
    return config;
}

LoadedSystem instantiate(const SystemConfig& config) {
    return LoadedSystem{config, make_spin_system(config.spin_two_i), build_tensors(config.tensors)};
}

}  // namespace zefoz::cli
