#include "flids/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flids {

std::string to_string(Scheme s) {
    return s == Scheme::ThreeRange ? "three-range" : "hierarchical";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "three-range") return Scheme::ThreeRange;
    if (s == "hierarchical") return Scheme::Hierarchical;
    throw ConfigError("unknown scheme: " + s + " (expected three-range|hierarchical)");
}

int feature_dim(Scheme s) {
    return s == Scheme::ThreeRange ? kThreeRangeDim : kHierarchicalDim;
}

RawFeatures extract_raw(const PacketRecord& rec, std::optional<double> prev_ts,
                        FeatureWarnings* warnings) {
    RawFeatures raw;
    raw.len = static_cast<double>(rec.frame_len);
    if (prev_ts) {
        raw.iat = rec.timestamp - *prev_ts;
        if (raw.iat < 0.0) {
            raw.iat = 0.0;
            if (warnings) ++warnings->negative_iat;
        }
    }
    raw.h = record_entropy(rec);
    raw.ip_tos = rec.ip_tos;
    raw.ip_flags = rec.ip_flags;
    raw.ip_ttl = rec.ip_ttl;
    raw.ip_proto = rec.ip_proto;
    raw.src_port = rec.src_port;
    raw.dst_port = rec.dst_port;
    raw.tcp_flags = rec.tcp_flags;
    raw.tcp_win = rec.tcp_win;
    return raw;
}

ThreeRangeBin discretize_three_range(uint16_t port) {
    if (port <= 1023) return ThreeRangeBin::System;
    if (port <= 49151) return ThreeRangeBin::User;
    return ThreeRangeBin::Dynamic;
}

const std::vector<PortBin>& port_hierarchy() {
    // Table order matters: bins at the top take precedence.
    static const std::vector<PortBin> kBins = {
        {"mqttPorts", {{1883, 1883}, {8883, 8883}}},
        {"coapPorts", {{5683, 5683}, {5684, 5684}}},
        {"rtspPorts",
         {{8554, 8554}, {8322, 8322}, {8000, 8003}, {1935, 1935}, {8888, 8888}}},
        {"httpPorts",
         {{80, 80}, {280, 280}, {443, 443}, {591, 591}, {593, 593}, {777, 777}, {488, 488},
          {1183, 1183}, {1184, 1184}, {2069, 2069}, {2301, 2301}, {2381, 2381}, {8008, 8008},
          {8080, 8080}}},
        {"mailPorts",
         {{24, 24}, {25, 25}, {50, 50}, {58, 58}, {61, 61}, {109, 109}, {110, 110}, {143, 143},
          {158, 158}, {174, 174}, {209, 209}, {220, 220}, {406, 406}, {512, 512}, {585, 585},
          {993, 993}, {995, 995}}},
        {"dnsPorts", {{42, 42}, {53, 53}, {81, 81}, {101, 101}, {105, 105}, {261, 261}}},
        {"ftpPorts",
         {{20, 20}, {21, 21}, {47, 47}, {69, 69}, {115, 115}, {152, 152}, {189, 189}, {349, 349},
          {574, 574}, {662, 662}, {989, 989}, {990, 990}}},
        {"shellPorts",
         {{22, 22}, {23, 23}, {59, 59}, {87, 87}, {89, 89}, {107, 107}, {211, 211}, {221, 221},
          {222, 222}, {513, 513}, {614, 614}, {759, 759}, {992, 992}}},
        {"remoteExecPorts", {{512, 512}, {514, 514}}},
        {"authPorts",
         {{13, 13}, {56, 56}, {113, 113}, {316, 316}, {353, 353}, {370, 370}, {749, 749},
          {750, 750}}},
        {"passwordPorts", {{229, 229}, {464, 464}, {586, 586}, {774, 774}}},
        {"newsPorts", {{114, 114}, {119, 119}, {532, 532}, {563, 563}}},
        {"chatPorts", {{194, 194}, {258, 258}, {531, 531}, {994, 994}}},
        {"printPorts", {{35, 35}, {92, 92}, {170, 170}, {515, 515}, {631, 631}}},
        {"timePorts", {{13, 13}, {37, 37}, {52, 52}, {123, 123}, {519, 519}, {525, 525}}},
        {"dbmsPorts", {{65, 65}, {66, 66}, {118, 118}, {150, 150}, {156, 156}, {217, 217}}},
        {"dhcpPorts", {{546, 546}, {547, 547}, {647, 647}, {847, 847}}},
        {"whoisPorts", {{43, 43}, {63, 63}}},
        {"netbiosPorts", {{137, 139}}},
        {"kerberosPorts", {{88, 88}, {748, 748}, {750, 750}}},
        {"RPCPorts",
         {{111, 111}, {121, 121}, {369, 369}, {530, 530}, {567, 567}, {593, 593}, {602, 602}}},
        {"snmpPorts", {{161, 161}, {162, 162}, {391, 391}}},
        {"privilegedPorts", {{0, 1023}}},
        {"nonprivilegedPorts", {{1024, 65535}}},
    };
    return kBins;
}

int discretize_hierarchical(uint16_t port) {
    const auto& bins = port_hierarchy();
    for (size_t i = 0; i < bins.size(); ++i)
        for (const auto& [lo, hi] : bins[i].ranges)
            if (port >= lo && port <= hi) return static_cast<int>(i);
    return static_cast<int>(bins.size()) - 1;  // unreachable: catch-alls cover 0-65535
}

std::string_view hierarchical_bin_name(int index) {
    return port_hierarchy().at(static_cast<size_t>(index)).name;
}

namespace {

int port_group_width(Scheme scheme) { return scheme == Scheme::ThreeRange ? 3 : 24; }

int port_bin_index(uint16_t port, Scheme scheme) {
    if (scheme == Scheme::ThreeRange) return static_cast<int>(discretize_three_range(port));
    return discretize_hierarchical(port);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Eigen::VectorXd encode(const RawFeatures& raw, Scheme scheme) {
    const int p = port_group_width(scheme);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6 + 3 + 3 + 9 + 2 * p);
    int i = 0;
    v[i++] = clamp01(raw.len / 1514.0);
    v[i++] = std::log1p(raw.iat);  // unbounded above, >= 0
    v[i++] = clamp01(raw.h / 8.0);
    v[i++] = raw.ip_tos / 255.0;
    v[i++] = raw.ip_ttl / 255.0;
    v[i++] = raw.tcp_win ? *raw.tcp_win / 65535.0 : 0.0;

    for (int b = 0; b < 3; ++b) v[i++] = (raw.ip_flags >> b) & 1u;

    // proto one-hot over (TCP, UDP, ICMP); OtherIPv4 stays all-zero
    if (raw.ip_proto != IpProto::OtherIPv4) v[i + static_cast<int>(raw.ip_proto)] = 1.0;
    i += 3;

    const uint16_t tf = raw.tcp_flags.value_or(0);
    for (int b = 0; b < 9; ++b) v[i++] = (tf >> b) & 1u;

    if (raw.src_port) v[i + port_bin_index(*raw.src_port, scheme)] = 1.0;
    i += p;
    if (raw.dst_port) v[i + port_bin_index(*raw.dst_port, scheme)] = 1.0;
    i += p;
    return v;
}

std::vector<std::string> feature_names(Scheme scheme) {
    std::vector<std::string> names = {"len", "iat_ln", "h", "ip_tos", "ip_ttl", "tcp_win"};
    for (const char* f : {"R", "DF", "MF"}) names.push_back(std::string("ipf_") + f);
    for (const char* pr : {"TCP", "UDP", "ICMP"}) names.push_back(std::string("proto_") + pr);
    for (const char* f : {"F", "S", "R", "P", "A", "U", "E", "C", "N"})
        names.push_back(std::string("tcpf_") + f);
    std::vector<std::string> bins;
    if (scheme == Scheme::ThreeRange) {
        bins = {"system", "user", "dynamic"};
    } else {
        for (const auto& b : port_hierarchy()) bins.emplace_back(b.name);
    }
    for (const auto& b : bins) names.push_back("sport_" + b);
    for (const auto& b : bins) names.push_back("dport_" + b);
    return names;
}

void FeatureDataset::append(const FeatureDataset& other) {
    if (other.rows() == 0) return;
    if (rows() == 0) {
        *this = other;
        return;
    }
    if (other.X.cols() != X.cols()) throw DataError("feature dimension mismatch on append");
    Eigen::MatrixXd merged(X.rows() + other.X.rows(), X.cols());
    merged << X, other.X;
    X = std::move(merged);
    device_ids.insert(device_ids.end(), other.device_ids.begin(), other.device_ids.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    attack_kinds.insert(attack_kinds.end(), other.attack_kinds.begin(), other.attack_kinds.end());
    timestamps.insert(timestamps.end(), other.timestamps.begin(), other.timestamps.end());
}

FeatureDataset featurize(const std::vector<PacketRecord>& stream, Scheme scheme,
                         const std::string& device_id, FeatureWarnings* warnings) {
    FeatureDataset ds;
    ds.scheme = scheme;
    ds.X.resize(static_cast<Eigen::Index>(stream.size()), feature_dim(scheme));
    std::optional<double> prev_ts;
    for (size_t r = 0; r < stream.size(); ++r) {
        const RawFeatures raw = extract_raw(stream[r], prev_ts, warnings);
        ds.X.row(static_cast<Eigen::Index>(r)) = encode(raw, scheme).transpose();
        prev_ts = stream[r].timestamp;
        ds.device_ids.push_back(device_id);
        ds.labels.push_back(stream[r].label);
        ds.attack_kinds.push_back(stream[r].attack_kind.value_or(""));
        ds.timestamps.push_back(stream[r].timestamp);
    }
    return ds;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& matrix_path, const FeatureDataset& ds) {
    std::ofstream out(matrix_path);
    if (!out) throw DataError("cannot write matrix file: " + matrix_path.string());
    const auto names = feature_names(ds.scheme);
    for (size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.X.cols(); ++c)
            out << (c ? "," : "") << fmt_double(ds.X(r, c));
        out << '\n';
    }
}

void write_sidecar_csv(const std::filesystem::path& sidecar_path, const FeatureDataset& ds) {
    std::ofstream out(sidecar_path);
    if (!out) throw DataError("cannot write sidecar file: " + sidecar_path.string());
    out << "device_id,label,attack_kind,timestamp\n";
    for (Eigen::Index r = 0; r < ds.rows(); ++r) {
        out << ds.device_ids[static_cast<size_t>(r)] << ','
            << to_string(ds.labels[static_cast<size_t>(r)]) << ','
            << ds.attack_kinds[static_cast<size_t>(r)] << ','
            << fmt_double(ds.timestamps[static_cast<size_t>(r)]) << '\n';
    }
}

Eigen::MatrixXd read_matrix_only(const std::filesystem::path& matrix_path, Scheme* scheme_out) {
    std::ifstream in(matrix_path);
    if (!in) throw DataError("cannot open matrix file: " + matrix_path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty matrix file: " + matrix_path.string());
    const size_t ncols = split_csv_line(line).size();
    Scheme scheme;
    if (ncols == kThreeRangeDim) scheme = Scheme::ThreeRange;
    else if (ncols == kHierarchicalDim) scheme = Scheme::Hierarchical;
    else throw DataError("unexpected column count " + std::to_string(ncols) + " in " + matrix_path.string());
    if (scheme_out) *scheme_out = scheme;

    std::vector<double> values;
    size_t nrows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != ncols)
            throw DataError("ragged row in matrix file: " + matrix_path.string());
        for (const auto& f : fields) values.push_back(std::stod(f));
        ++nrows;
    }
    Eigen::MatrixXd X(nrows, ncols);
    for (size_t r = 0; r < nrows; ++r)
        for (size_t c = 0; c < ncols; ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * ncols + c];
    return X;
}

FeatureDataset read_matrix_csv(const std::filesystem::path& matrix_path,
                               const std::filesystem::path& sidecar_path) {
    FeatureDataset ds;
    ds.X = read_matrix_only(matrix_path, &ds.scheme);

    std::ifstream side(sidecar_path);
    if (!side) throw DataError("cannot open sidecar file: " + sidecar_path.string());
    std::string line;
    std::getline(side, line);  // header
    while (std::getline(side, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) throw DataError("ragged sidecar row: " + sidecar_path.string());
        ds.device_ids.push_back(fields[0]);
        ds.labels.push_back(label_from_string(fields[1]));
        ds.attack_kinds.push_back(fields[2]);
        ds.timestamps.push_back(std::stod(fields[3]));
    }
    if (static_cast<Eigen::Index>(ds.device_ids.size()) != ds.X.rows())
        throw DataError("sidecar row count does not match matrix: " + sidecar_path.string());
    return ds;
}

}  // namespace flids
