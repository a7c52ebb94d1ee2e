#include "artifacts.hpp"

#include <array>
#include <cstdio>

#include <json.hpp>
#include <openssl/evp.h>

#include "mfgabs/error.hpp"
#include "mfgabs/io.hpp"

namespace mfgabs::app {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

void ArtifactSet::add(const std::string& name, std::string content)
{
    if (name.empty() || name == "manifest.json" || name.find('/') != std::string::npos)
        throw IoError("invalid artifact name: " + name);
    files_[name] = std::move(content);
}

std::string ArtifactSet::manifest() const
{
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, content] : files_)
        files.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    return nlohmann::json{{"files", files}}.dump(2) + "\n";
}

void ArtifactSet::commit(const fs::path& directory) const
{
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec)
        throw IoError("cannot create output directory " + directory.string() + ": " + ec.message());
    const fs::path staging = directory / ".staging";
    fs::remove_all(staging, ec);
    try {
        fs::create_directory(staging);
        for (const auto& [name, content] : files_)
            write_text(staging / name, content);
        write_text(staging / "manifest.json", manifest());
        for (const auto& [name, _] : files_)
            fs::rename(staging / name, directory / name);
        fs::rename(staging / "manifest.json", directory / "manifest.json");
        fs::remove(staging);
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(staging, ec);
        throw IoError(std::string("writing outputs to ") + directory.string() + ": " + e.what());
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

}  // namespace mfgabs::app
