#include "mfgabs/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mfgabs/error.hpp"

namespace mfgabs {

static_assert(std::endian::native == std::endian::little, "matrix files assume a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'F', 'G', 'M'};
constexpr std::size_t kTagBytes = 16;

template <class T>
void put(std::string& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T take(std::string_view& in, const std::string& source)
{
    if (in.size() < sizeof(T))
        throw IoError("matrix file truncated: " + source);
    T v;
    std::memcpy(&v, in.data(), sizeof(T));
    in.remove_prefix(sizeof(T));
    return v;
}

void csv_row(std::string& out, std::initializer_list<std::string> cells)
{
    bool first = true;
    for (const std::string& c : cells) {
        if (!first)
            out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

std::string u(std::size_t v) { return std::to_string(v); }

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string flow_csv(const SubProbFlow& flow)
{
    std::string out = "t,survivor_mass,loss,mean\n";
    for (std::size_t k = 0; k < flow.grid.time_points(); ++k)
        csv_row(out, {format_double(flow.grid.t(k)), format_double(flow.survivor_mass[k]), format_double(flow.loss[k]),
                      format_double(flow.mean[k])});
    return out;
}

std::string absorption_csv(const EmpiricalRecord& record)
{
    std::string out = "player,tau\n";
    for (std::size_t i = 0; i < record.particles; ++i)
        csv_row(out, {u(i), format_double(record.tau[i])});
    return out;
}

std::string chaos_csv(const ChaosTable& table)
{
    std::string out = "N,reps,w1_mean,w1_se,massgap_mean\n";
    for (const ChaosRow& r : table)
        csv_row(out, {u(r.N), u(r.replications), format_double(r.w1_mean), format_double(r.w1_se),
                      format_double(r.mass_gap_mean)});
    return out;
}

std::string nash_gap_csv(const std::vector<NashGapRow>& rows)
{
    std::string out = "N,j_eq,j_eq_se,j_dev,j_dev_se,gap,gap_se\n";
    for (const NashGapRow& r : rows)
        csv_row(out, {u(r.N), format_double(r.j_eq), format_double(r.j_eq_se), format_double(r.j_dev),
                      format_double(r.j_dev_se), format_double(r.gap), format_double(r.gap_se)});
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open for writing: " + path.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.close();
    if (!os)
        throw IoError("write failed: " + path.string());
}

std::string_view to_string(MatrixKind kind)
{
    switch (kind) {
    case MatrixKind::density: return "density";
    case MatrixKind::value: return "value";
    case MatrixKind::policy: return "policy";
    case MatrixKind::paths: return "paths";
    }
    return "unknown";
}

MatrixFile density_matrix(const SubProbFlow& flow)
{
    return {MatrixKind::density, flow.grid.time_points(), flow.grid.state_points(), flow.grid.dt(), 0,
            flow.grid.x_lo,      flow.grid.dx(),          flow.density};
}

MatrixFile value_matrix(const ValueField& value)
{
    return {MatrixKind::value, value.grid.time_points(), value.grid.state_points(), value.grid.dt(), 0,
            value.grid.x_lo,   value.grid.dx(),          value.values};
}

MatrixFile policy_matrix(const FeedbackPolicy& policy)
{
    const Grid& g = policy.grid();
    return {MatrixKind::policy, g.time_points(), g.state_points(), g.dt(), 0, g.x_lo, g.dx(),
            std::vector<double>(policy.values().begin(), policy.values().end())};
}

MatrixFile paths_matrix(const EmpiricalRecord& record)
{
    return {MatrixKind::paths, record.stored_steps.size(), record.particles, record.dt(), record.seed, 0.0, 0.0,
            record.positions};
}

std::string encode_matrix(const MatrixFile& m)
{
    if (m.values.size() != m.rows * m.cols)
        throw DomainError("write_matrix: value count does not match rows x cols");
    std::string out;
    out.reserve(80 + m.values.size() * sizeof(double));
    out.append(kMagic.data(), kMagic.size());
    put(out, kMatrixVersion);
    std::array<char, kTagBytes> tag{};
    const std::string_view name = to_string(m.kind);
    std::copy(name.begin(), name.end(), tag.begin());
    out.append(tag.data(), tag.size());
    put(out, m.rows);
    put(out, m.cols);
    put(out, m.dt);
    put(out, m.seed);
    put(out, m.x0);
    put(out, m.dx);
    for (double v : m.values)
        put(out, v);
    return out;
}

void write_matrix(const std::filesystem::path& path, const MatrixFile& m)
{
    write_text(path, encode_matrix(m));
}

MatrixFile decode_matrix(std::string_view in, const std::string& source)
{
    if (in.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), in.begin()))
        throw IoError("not a matrix file: " + source);
    in.remove_prefix(kMagic.size());
    if (take<std::uint32_t>(in, source) != kMatrixVersion)
        throw IoError("unsupported matrix file version: " + source);
    if (in.size() < kTagBytes)
        throw IoError("matrix file truncated: " + source);
    const std::string tag(in.data(), std::find(in.data(), in.data() + kTagBytes, '\0'));
    in.remove_prefix(kTagBytes);
    MatrixFile m;
    bool known = false;
    for (MatrixKind k : {MatrixKind::density, MatrixKind::value, MatrixKind::policy, MatrixKind::paths})
        if (tag == to_string(k)) {
            m.kind = k;
            known = true;
        }
    if (!known)
        throw IoError("unknown matrix kind '" + tag + "': " + source);
    m.rows = take<std::uint64_t>(in, source);
    m.cols = take<std::uint64_t>(in, source);
    m.dt = take<double>(in, source);
    m.seed = take<std::uint64_t>(in, source);
    m.x0 = take<double>(in, source);
    m.dx = take<double>(in, source);
    if (m.cols != 0 && m.rows > in.size() / sizeof(double) / m.cols)
        throw IoError("matrix payload size mismatch: " + source);
    if (in.size() != m.rows * m.cols * sizeof(double))
        throw IoError("matrix payload size mismatch: " + source);
    m.values.resize(m.rows * m.cols);
    if (!in.empty())
        std::memcpy(m.values.data(), in.data(), in.size());
    return m;
}

MatrixFile read_matrix(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return decode_matrix(buf.str(), path.string());
}

}  // namespace mfgabs
