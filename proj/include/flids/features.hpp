#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flids/ingest.hpp"

namespace flids {

enum class Scheme { ThreeRange = 0, Hierarchical = 1 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Encoded per-packet dimensionality: 6 numeric + 3 ip-flag + 3 proto +
// 9 tcp-flag + 2 port one-hot groups of width 3 or 24.
constexpr int kThreeRangeDim = 27;
constexpr int kHierarchicalDim = 69;
int feature_dim(Scheme s);

// The 11 per-packet features before encoding.
struct RawFeatures {
    double len = 0.0;  // wire length in bytes
    double iat = 0.0;  // seconds since the previous kept packet on this stream
    double h = 0.0;    // entropy bits
    uint8_t ip_tos = 0;
    uint8_t ip_flags = 0;
    uint8_t ip_ttl = 0;
    IpProto ip_proto = IpProto::OtherIPv4;
    std::optional<uint16_t> src_port;
    std::optional<uint16_t> dst_port;
    std::optional<uint16_t> tcp_flags;
    std::optional<uint16_t> tcp_win;
};

struct FeatureWarnings {
    uint64_t negative_iat = 0;  // out-of-order timestamps clamped to 0
};

// len from the wire length, iat from the previous timestamp (0 when absent,
// clamped at 0 with a counted warning when the capture is out of order),
// h from the record's entropy; remaining fields copied.
RawFeatures extract_raw(const PacketRecord& rec, std::optional<double> prev_ts,
                        FeatureWarnings* warnings = nullptr);

enum class ThreeRangeBin : int { System = 0, User = 1, Dynamic = 2 };

// IANA ranges: 0-1023 system, 1024-49151 user, 49152-65535 dynamic.
ThreeRangeBin discretize_three_range(uint16_t port);

// One bin of the port generalization hierarchy; ranges are inclusive.
struct PortBin {
    std::string_view name;
    std::vector<std::pair<uint16_t, uint16_t>> ranges;
};

// The 24-bin hierarchy in table order; classification scans top to bottom
// and the final two bins (privileged/nonprivileged) are total catch-alls.
const std::vector<PortBin>& port_hierarchy();

// Index into port_hierarchy() of the first matching bin.
int discretize_hierarchical(uint16_t port);
std::string_view hierarchical_bin_name(int index);

// Fixed-order encoding. Numeric block [len/1514, ln(iat+1), h/8, ip_tos/255,
// ip_ttl/255, tcp_win/65535], then ip-flag indicators (R, DF, MF), proto
// one-hot (TCP, UDP, ICMP; OtherIPv4 all-zero), tcp-flag indicators
// (F,S,R,P,A,U,E,C,N), src-port one-hot, dst-port one-hot. Absent ports and
// TCP fields encode as all-zero blocks.
Eigen::VectorXd encode(const RawFeatures& raw, Scheme scheme);

// Column names in encoding order; frozen by a golden test.
std::vector<std::string> feature_names(Scheme scheme);

// A featurized stream plus its sidecar metadata (never model input).
struct FeatureDataset {
    Eigen::MatrixXd X;  // rows = packets, cols = feature_dim(scheme)
    Scheme scheme = Scheme::Hierarchical;
    std::vector<std::string> device_ids;
    std::vector<Label> labels;
    std::vector<std::string> attack_kinds;  // empty string when none
    std::vector<double> timestamps;

    Eigen::Index rows() const { return X.rows(); }
    void append(const FeatureDataset& other);
};

// Featurizes one device stream in order (iat derivation is stateful).
FeatureDataset featurize(const std::vector<PacketRecord>& stream, Scheme scheme,
                         const std::string& device_id, FeatureWarnings* warnings = nullptr);

// Dense numeric matrix file: header row of column names, one row per packet.
// The sidecar carries device id, label, attack kind and timestamp per row.
void write_matrix_csv(const std::filesystem::path& matrix_path, const FeatureDataset& ds);
void write_sidecar_csv(const std::filesystem::path& sidecar_path, const FeatureDataset& ds);
FeatureDataset read_matrix_csv(const std::filesystem::path& matrix_path,
                               const std::filesystem::path& sidecar_path);
Eigen::MatrixXd read_matrix_only(const std::filesystem::path& matrix_path, Scheme* scheme_out = nullptr);

}  // namespace flids
