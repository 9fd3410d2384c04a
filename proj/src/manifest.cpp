#include "risktrace/manifest.hpp"

#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "risktrace/csv.hpp"
#include "risktrace/errors.hpp"

namespace risktrace {

RunManifest RunManifest::for_command(std::string command, std::uint64_t rng_seed) {
    RunManifest manifest;
    manifest.command = std::move(command);
    manifest.rng_seed = rng_seed;
    manifest.code_version = RISKTRACE_VERSION;
    return manifest;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    static const unsigned char empty = 0;
    const unsigned char* data = bytes.empty() ? &empty : bytes.data();
    if (EVP_Digest(data, bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int n = 0; n < len; ++n) {
        out += hex[digest[n] >> 4];
        out += hex[digest[n] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("sha256_file: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    return sha256_hex(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
}

void record_output(RunManifest& manifest, const std::filesystem::path& path) {
    manifest.output_digests[path.filename().string()] = sha256_file(path);
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config;
    j["rng_seed"] = manifest.rng_seed;
    j["code_version"] = manifest.code_version;
    j["outputs"] = manifest.output_digests;
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("read_manifest: cannot open " + file.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("read_manifest: " + file.string() + ": " + e.what());
    }
    RunManifest manifest;
    try {
        manifest.command = j.at("command").get<std::string>();
        manifest.config = j.at("config");
        manifest.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        manifest.code_version = j.at("code_version").get<std::string>();
        manifest.output_digests =
            j.at("outputs").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("read_manifest: malformed manifest " + file.string() + ": " +
                    e.what());
    }
    return manifest;
}

} // namespace risktrace
