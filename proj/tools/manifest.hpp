#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "cure/error.hpp"

namespace cure::cli {

namespace fs = std::filesystem;

inline std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 unavailable");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

/// Record of one command run. Written to <out-dir>/manifest.json before any
/// output, then rewritten with output digests once the command finishes.
class RunManifest {
public:
    static constexpr const char* file_name = "manifest.json";

    RunManifest(std::string command, std::vector<std::string> argv, fs::path out_dir)
        : out_dir_(std::move(out_dir)) {
        j_["tool"] = "cure";
        j_["version"] = CURE_VERSION;
        j_["command"] = std::move(command);
        j_["argv"] = std::move(argv);
        j_["cwd"] = fs::current_path().string();
        j_["flags"] = nlohmann::json::object();
        j_["inputs"] = nlohmann::json::object();
        j_["outputs"] = nlohmann::json::object();
        j_["status"] = "running";
        j_["started_at"] = utc_now();
    }

    void flag(const std::string& name, nlohmann::json value) { j_["flags"][name] = std::move(value); }
    void seed(std::uint64_t s) { j_["seed"] = s; }
    void input(const std::string& path) { j_["inputs"][path] = sha256_file(path); }

    void begin() {
        fs::create_directories(out_dir_);
        write();
    }

    /// Hashes every regular file under the output directory except the manifest.
    void finish() {
        nlohmann::json outs = nlohmann::json::object();
        for (const auto& e : fs::recursive_directory_iterator(out_dir_)) {
            if (!e.is_regular_file() || e.path().filename() == file_name) continue;
            outs[fs::relative(e.path(), out_dir_).generic_string()] = sha256_file(e.path());
        }
        j_["outputs"] = std::move(outs);
        j_["status"] = "complete";
        j_["finished_at"] = utc_now();
        write();
    }

    const nlohmann::json& json() const { return j_; }

private:
    void write() const {
        std::ofstream out(out_dir_ / file_name);
        if (!out) throw DataError("cannot write manifest in '" + out_dir_.string() + "'");
        out << j_.dump(2) << '\n';
    }

    fs::path out_dir_;
    nlohmann::json j_;
};

} // namespace cure::cli
