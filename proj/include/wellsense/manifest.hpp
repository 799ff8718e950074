// Run manifests: every command records its inputs, outputs (with content
// hashes), seed and wall-clock so any run can be reproduced exactly.
#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wellsense/core.hpp"

namespace wellsense {

inline std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(content);
}

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
    double wall_clock_seconds = 0.0;
    std::string version = "wellsense/1";

    void add_output(const std::filesystem::path& path) {
        outputs.emplace_back(path.string(), sha256_file(path));
    }

    nlohmann::json to_json() const {
        nlohmann::json outs = nlohmann::json::array();
        for (const auto& [path, hash] : outputs)
            outs.push_back({{"path", path}, {"sha256", hash}});
        return {{"command", command}, {"config", config_path},    {"seed", seed},
                {"inputs", inputs},   {"outputs", outs},          {"wall_clock_s", wall_clock_seconds},
                {"version", version}};
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << to_json().dump(1) << '\n';
    }
};

}  // namespace wellsense
