#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mfgabs/analysis.hpp"
#include "mfgabs/measures.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/policy.hpp"

namespace mfgabs {

/// Shortest decimal that round-trips to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

std::string flow_csv(const SubProbFlow& flow);
std::string absorption_csv(const EmpiricalRecord& record);
std::string chaos_csv(const ChaosTable& table);
std::string nash_gap_csv(const std::vector<NashGapRow>& rows);

/// Writes the whole string, replacing any existing file. Throws IoError naming the path.
void write_text(const std::filesystem::path& path, std::string_view content);

enum class MatrixKind : std::uint8_t { density, value, policy, paths };

/// Row-major matrix with the grid metadata needed to interpret it.
///
/// Layout (little-endian): "MFGM", u32 version, 16-byte ASCII kind tag
/// (NUL padded), u64 rows, u64 cols, f64 dt, u64 seed, f64 x0, f64 dx,
/// then rows·cols f64 values.
struct MatrixFile {
    MatrixKind kind = MatrixKind::density;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> values;

    bool operator==(const MatrixFile&) const = default;
};

inline constexpr std::uint32_t kMatrixVersion = 1;

std::string_view to_string(MatrixKind kind);

MatrixFile density_matrix(const SubProbFlow& flow);
MatrixFile value_matrix(const ValueField& value);
MatrixFile policy_matrix(const FeedbackPolicy& policy);
/// Stored rows × N positions; dt is the simulation step, x0/dx unused (0).
MatrixFile paths_matrix(const EmpiricalRecord& record);

std::string encode_matrix(const MatrixFile& matrix);
/// `source` names the data in error messages.
MatrixFile decode_matrix(std::string_view bytes, const std::string& source);

void write_matrix(const std::filesystem::path& path, const MatrixFile& matrix);
MatrixFile read_matrix(const std::filesystem::path& path);

}  // namespace mfgabs
