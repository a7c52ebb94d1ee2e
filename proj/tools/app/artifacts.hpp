#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace mfgabs::app {

/// Output files collected in memory and committed atomically: nothing
/// reaches the output directory unless every artifact was produced.
class ArtifactSet {
public:
    void add(const std::string& name, std::string content);
    bool contains(const std::string& name) const { return files_.count(name) != 0; }
    const std::string& content(const std::string& name) const { return files_.at(name); }
    const std::map<std::string, std::string>& files() const noexcept { return files_; }

    /// Writes every file plus manifest.json (SHA-256 and size per file, sorted
    /// by name) via a staging directory. On failure the staging directory is
    /// removed and the output directory is left as it was.
    void commit(const std::filesystem::path& directory) const;

    std::string manifest() const;

private:
    std::map<std::string, std::string> files_;
};

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace mfgabs::app
