#include "qhex/volume_io.hpp"

#include <bit>
#include <cmath>

#include <json.hpp>

#include "qhex/io_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "dvol raw data is little-endian; big-endian hosts are unsupported");

namespace qhex {

namespace {

std::filesystem::path strip_suffix(const std::filesystem::path& p) {
    std::string s = p.string();
    for (const char* suf : {".dvol.json", ".dvol.raw", ".dvol"}) {
        if (s.size() > std::strlen(suf) && s.ends_with(suf)) {
            s.resize(s.size() - std::strlen(suf));
            break;
        }
    }
    return s;
}

} // namespace

std::filesystem::path dvol_json_path(const std::filesystem::path& base) {
    return strip_suffix(base).string() + ".dvol.json";
}

std::filesystem::path dvol_raw_path(const std::filesystem::path& base) {
    return strip_suffix(base).string() + ".dvol.raw";
}

void write_dvol(const Volume4D& v, const std::filesystem::path& base) {
    nlohmann::json header;
    header["format"] = "dvol-v1";
    header["dims"] = {v.nx(), v.ny(), v.nz(), v.nc()};
    header["voxel_size"] = {v.voxel_size[0], v.voxel_size[1], v.voxel_size[2]};
    header["dtype"] = "f32";
    header["scheme"] = v.scheme_path;
    header["b0_first"] = v.b0_first;
    write_file_atomic(dvol_json_path(base), header.dump(2) + "\n");
    write_file_atomic(dvol_raw_path(base), v.data().data(), v.data().size() * sizeof(float));
}

Volume4D read_dvol(const std::filesystem::path& base) {
    const auto jpath = dvol_json_path(base);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(read_text_file(jpath));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(jpath.string() + ": invalid JSON header: " + e.what());
    }

    try {
        const std::string format = header.value("format", "");
        if (format != "dvol-v1")
            throw ValidationError(jpath.string() + ": unsupported format '" + format + "'");
        const auto dims = header.at("dims").get<std::vector<int>>();
        if (dims.size() != 4) throw ValidationError(jpath.string() + ": dims must have 4 entries");
        const std::string dtype = header.at("dtype").get<std::string>();
        if (dtype != "f32")
            throw ValidationError(jpath.string() + ": unsupported dtype '" + dtype + "'");

        Volume4D v(dims[0], dims[1], dims[2], dims[3]);
        const auto vs = header.at("voxel_size").get<std::vector<double>>();
        if (vs.size() != 3)
            throw ValidationError(jpath.string() + ": voxel_size must have 3 entries");
        v.voxel_size = {vs[0], vs[1], vs[2]};
        v.scheme_path = header.at("scheme").get<std::string>();
        v.b0_first = header.at("b0_first").get<bool>();

        const auto raw = read_binary_file(dvol_raw_path(base));
        if (raw.size() != v.data().size() * sizeof(float))
            throw ValidationError(dvol_raw_path(base).string() + ": raw size " +
                                  std::to_string(raw.size()) + " does not match dims");
        std::memcpy(v.data().data(), raw.data(), raw.size());
        for (float f : v.data())
            if (!std::isfinite(f) || f < 0.0f)
                throw ValidationError(dvol_raw_path(base).string() +
                                      ": negative or non-finite sample");
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(jpath.string() + ": bad header field: " + e.what());
    }
}

} // namespace qhex
