#ifndef RISKTRACE_MANIFEST_HPP
#define RISKTRACE_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

namespace risktrace {

/// Provenance record written next to every command's outputs: what ran,
/// with which configuration and seed, and the digest of every file it
/// produced. Contains nothing run-dependent beyond that (no timestamps),
/// so identical runs write identical manifests.
struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t rng_seed = 0;
    std::string code_version;
    std::map<std::string, std::string> output_digests; // filename -> sha256 hex

    /// Manifest skeleton for one command with the library's version baked in.
    static RunManifest for_command(std::string command, std::uint64_t rng_seed);
};

/// Hex SHA-256 of a byte buffer / of a file's contents.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Digest a just-written output file and record it under its basename.
void record_output(RunManifest& manifest, const std::filesystem::path& path);

/// Serialize and write `<dir>/manifest.json`.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

/// Parse a manifest written by write_manifest.
RunManifest read_manifest(const std::filesystem::path& file);

} // namespace risktrace

#endif
