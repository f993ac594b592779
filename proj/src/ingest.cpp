#include "flids/ingest.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace flids {

using ordered_json = nlohmann::ordered_json;

void IngestStats::merge(const IngestStats& o) {
    kept += o.kept;
    dropped_ipv6 += o.dropped_ipv6;
    dropped_arp += o.dropped_arp;
    dropped_other_ethertype += o.dropped_other_ethertype;
    vlan_tagged += o.vlan_tagged;
    malformed_frames += o.malformed_frames;
    malformed_lines += o.malformed_lines;
}

bool keep_packet(uint16_t ethertype) {
    return ethertype == 0x0800;  // IPv4 only; IPv6 (0x86DD), ARP (0x0806) and the rest drop
}

double shannon_entropy(std::span<const uint8_t> bytes) {
    if (bytes.empty()) return 0.0;
    std::array<uint64_t, 256> counts{};
    for (uint8_t b : bytes) ++counts[b];
    const double n = static_cast<double>(bytes.size());
    double h = 0.0;
    for (uint64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double record_entropy(const PacketRecord& rec) {
    if (rec.entropy) return *rec.entropy;
    return shannon_entropy(rec.packet_bytes);
}

namespace {

// ---- pcap dissection -------------------------------------------------------

constexpr uint32_t kMagicUs = 0xa1b2c3d4;
constexpr uint32_t kMagicUsSwapped = 0xd4c3b2a1;
constexpr uint32_t kMagicNs = 0xa1b23c4d;
constexpr uint32_t kMagicNsSwapped = 0x4d3cb2a1;

uint16_t be16(const uint8_t* p) { return static_cast<uint16_t>((p[0] << 8) | p[1]); }

uint32_t load32(const uint8_t* p, bool swap) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    if (swap) v = __builtin_bswap32(v);
    return v;
}

uint16_t load16(const uint8_t* p, bool swap) {
    uint16_t v;
    std::memcpy(&v, p, 2);
    if (swap) v = __builtin_bswap16(v);
    return v;
}

std::string ipv4_to_string(const uint8_t* p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", p[0], p[1], p[2], p[3]);
    return buf;
}

// Parses one captured Ethernet frame into rec. Returns false when the frame
// is filtered (non-IPv4) or too truncated to dissect the required headers.
enum class FrameResult { kept, filtered_ipv6, filtered_arp, filtered_other, malformed };

FrameResult parse_frame(const uint8_t* data, size_t caplen, uint32_t wirelen, double ts,
                        PacketRecord& rec, bool& vlan) {
    vlan = false;
    if (caplen < 14) return FrameResult::malformed;
    size_t off = 12;
    uint16_t ethertype = be16(data + off);
    off += 2;
    if (ethertype == 0x8100) {  // one 802.1Q tag level
        if (caplen < off + 4) return FrameResult::malformed;
        vlan = true;
        ethertype = be16(data + off + 2);
        off += 4;
    }
    if (!keep_packet(ethertype)) {
        if (ethertype == 0x86DD) return FrameResult::filtered_ipv6;
        if (ethertype == 0x0806) return FrameResult::filtered_arp;
        return FrameResult::filtered_other;
    }

    if (caplen < off + 20) return FrameResult::malformed;
    const uint8_t* ip = data + off;
    const uint8_t version = ip[0] >> 4;
    const size_t ihl = static_cast<size_t>(ip[0] & 0x0f) * 4;
    if (version != 4 || ihl < 20 || caplen < off + ihl) return FrameResult::malformed;

    rec.timestamp = ts;
    rec.frame_len = wirelen;
    rec.ip_tos = ip[1];
    const uint16_t flags_frag = be16(ip + 6);
    rec.ip_flags = 0;
    if (flags_frag & 0x8000) rec.ip_flags |= ipflag::R;
    if (flags_frag & 0x4000) rec.ip_flags |= ipflag::DF;
    if (flags_frag & 0x2000) rec.ip_flags |= ipflag::MF;
    rec.ip_ttl = ip[8];
    const uint8_t proto = ip[9];
    rec.src_ip = ipv4_to_string(ip + 12);
    rec.dst_ip = ipv4_to_string(ip + 16);
    rec.packet_bytes.assign(data, data + caplen);
    rec.entropy.reset();
    rec.src_port.reset();
    rec.dst_port.reset();
    rec.tcp_flags.reset();
    rec.tcp_win.reset();
    rec.label = Label::Unlabeled;

    const uint8_t* l4 = ip + ihl;
    const size_t l4len = caplen - off - ihl;
    switch (proto) {
        case 6: {  // TCP
            if (l4len < 20) return FrameResult::malformed;
            rec.ip_proto = IpProto::TCP;
            rec.src_port = be16(l4);
            rec.dst_port = be16(l4 + 2);
            uint16_t flags = l4[13];
            if (l4[12] & 0x01) flags |= tcpflag::NS;
            rec.tcp_flags = flags;
            rec.tcp_win = be16(l4 + 14);
            break;
        }
        case 17: {  // UDP
            if (l4len < 8) return FrameResult::malformed;
            rec.ip_proto = IpProto::UDP;
            rec.src_port = be16(l4);
            rec.dst_port = be16(l4 + 2);
            break;
        }
        case 1:
            rec.ip_proto = IpProto::ICMP;
            break;
        default:
            rec.ip_proto = IpProto::OtherIPv4;
            break;
    }
    return FrameResult::kept;
}

}  // namespace

std::vector<PacketRecord> read_pcap(const std::filesystem::path& path, IngestStats& stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pcap file: " + path.string());

    uint8_t ghdr[24];
    if (!in.read(reinterpret_cast<char*>(ghdr), sizeof(ghdr)))
        throw DataError("pcap global header truncated: " + path.string());

    uint32_t magic;
    std::memcpy(&magic, ghdr, 4);
    bool swap = false;
    bool nanos = false;
    switch (magic) {
        case kMagicUs: break;
        case kMagicUsSwapped: swap = true; break;
        case kMagicNs: nanos = true; break;
        case kMagicNsSwapped: swap = true; nanos = true; break;
        default:
            throw DataError("not a classic pcap file (bad magic): " + path.string());
    }
    const uint32_t network = load32(ghdr + 20, swap);
    if (network != 1)  // LINKTYPE_ETHERNET
        throw DataError("unsupported pcap link type " + std::to_string(network) + ": " +
                        path.string());

    const double frac_scale = nanos ? 1e-9 : 1e-6;
    std::vector<PacketRecord> out;
    std::vector<uint8_t> buf;
    uint8_t rhdr[16];
    while (in.read(reinterpret_cast<char*>(rhdr), sizeof(rhdr))) {
        const uint32_t ts_sec = load32(rhdr, swap);
        const uint32_t ts_frac = load32(rhdr + 4, swap);
        const uint32_t incl_len = load32(rhdr + 8, swap);
        const uint32_t orig_len = load32(rhdr + 12, swap);
        buf.resize(incl_len);
        if (incl_len > 0 && !in.read(reinterpret_cast<char*>(buf.data()), incl_len)) {
            ++stats.malformed_frames;  // truncated final record
            break;
        }
        const double ts = static_cast<double>(ts_sec) + static_cast<double>(ts_frac) * frac_scale;
        PacketRecord rec;
        bool vlan = false;
        switch (parse_frame(buf.data(), buf.size(), orig_len, ts, rec, vlan)) {
            case FrameResult::kept:
                ++stats.kept;
                if (vlan) ++stats.vlan_tagged;
                out.push_back(std::move(rec));
                break;
            case FrameResult::filtered_ipv6: ++stats.dropped_ipv6; break;
            case FrameResult::filtered_arp: ++stats.dropped_arp; break;
            case FrameResult::filtered_other: ++stats.dropped_other_ethertype; break;
            case FrameResult::malformed: ++stats.malformed_frames; break;
        }
    }
    return out;
}

// ---- line-delimited record files -------------------------------------------

std::string to_string(IpProto p) {
    switch (p) {
        case IpProto::TCP: return "TCP";
        case IpProto::UDP: return "UDP";
        case IpProto::ICMP: return "ICMP";
        case IpProto::OtherIPv4: return "OTHER";
    }
    return "OTHER";
}

IpProto ip_proto_from_string(const std::string& s) {
    if (s == "TCP") return IpProto::TCP;
    if (s == "UDP") return IpProto::UDP;
    if (s == "ICMP") return IpProto::ICMP;
    if (s == "OTHER") return IpProto::OtherIPv4;
    throw DataError("unknown ip_proto: " + s);
}

std::string to_string(Label l) {
    switch (l) {
        case Label::Normal: return "normal";
        case Label::Attack: return "attack";
        case Label::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

Label label_from_string(const std::string& s) {
    if (s == "normal") return Label::Normal;
    if (s == "attack") return Label::Attack;
    if (s == "unlabeled") return Label::Unlabeled;
    throw DataError("unknown label: " + s);
}

namespace {

const char* kIpFlagNames[3] = {"R", "DF", "MF"};
const char* kTcpFlagNames[9] = {"F", "S", "R", "P", "A", "U", "E", "C", "N"};

ordered_json ip_flags_to_json(uint8_t flags) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < 3; ++i)
        if (flags & (1u << i)) arr.push_back(kIpFlagNames[i]);
    return arr;
}

uint8_t ip_flags_from_json(const ordered_json& arr) {
    uint8_t flags = 0;
    for (const auto& v : arr) {
        const std::string s = v.get<std::string>();
        bool known = false;
        for (int i = 0; i < 3; ++i)
            if (s == kIpFlagNames[i]) { flags |= static_cast<uint8_t>(1u << i); known = true; }
        if (!known) throw DataError("unknown ip flag: " + s);
    }
    return flags;
}

ordered_json tcp_flags_to_json(uint16_t flags) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < 9; ++i)
        if (flags & (1u << i)) arr.push_back(kTcpFlagNames[i]);
    return arr;
}

uint16_t tcp_flags_from_json(const ordered_json& arr) {
    uint16_t flags = 0;
    for (const auto& v : arr) {
        const std::string s = v.get<std::string>();
        bool known = false;
        for (int i = 0; i < 9; ++i)
            if (s == kTcpFlagNames[i]) { flags |= static_cast<uint16_t>(1u << i); known = true; }
        if (!known) throw DataError("unknown tcp flag: " + s);
    }
    return flags;
}

}  // namespace

std::string record_to_json_line(const PacketRecord& rec) {
    ordered_json j;
    j["timestamp"] = rec.timestamp;
    j["frame_len"] = rec.frame_len;
    j["ip_tos"] = rec.ip_tos;
    j["ip_flags"] = ip_flags_to_json(rec.ip_flags);
    j["ip_ttl"] = rec.ip_ttl;
    j["ip_proto"] = to_string(rec.ip_proto);
    if (rec.src_port) j["src_port"] = *rec.src_port;
    if (rec.dst_port) j["dst_port"] = *rec.dst_port;
    if (rec.tcp_flags) j["tcp_flags"] = tcp_flags_to_json(*rec.tcp_flags);
    if (rec.tcp_win) j["tcp_win"] = *rec.tcp_win;
    if (!rec.packet_bytes.empty()) j["packet_bytes"] = base64_encode(rec.packet_bytes);
    if (rec.entropy) j["entropy"] = *rec.entropy;
    j["src_ip"] = rec.src_ip;
    j["dst_ip"] = rec.dst_ip;
    j["label"] = to_string(rec.label);
    if (rec.attack_kind) j["attack_kind"] = *rec.attack_kind;
    return j.dump();
}

PacketRecord record_from_json_line(const std::string& line) {
    const ordered_json j = ordered_json::parse(line);
    PacketRecord rec;
    rec.timestamp = j.at("timestamp").get<double>();
    rec.frame_len = j.at("frame_len").get<uint32_t>();
    rec.ip_tos = j.at("ip_tos").get<uint8_t>();
    rec.ip_flags = ip_flags_from_json(j.at("ip_flags"));
    rec.ip_ttl = j.at("ip_ttl").get<uint8_t>();
    rec.ip_proto = ip_proto_from_string(j.at("ip_proto").get<std::string>());
    if (j.contains("src_port")) rec.src_port = j["src_port"].get<uint16_t>();
    if (j.contains("dst_port")) rec.dst_port = j["dst_port"].get<uint16_t>();
    if (j.contains("tcp_flags")) rec.tcp_flags = tcp_flags_from_json(j["tcp_flags"]);
    if (j.contains("tcp_win")) rec.tcp_win = j["tcp_win"].get<uint16_t>();
    if (j.contains("packet_bytes")) rec.packet_bytes = base64_decode(j["packet_bytes"].get<std::string>());
    if (j.contains("entropy")) rec.entropy = j["entropy"].get<double>();
    rec.src_ip = j.value("src_ip", std::string{});
    rec.dst_ip = j.value("dst_ip", std::string{});
    rec.label = label_from_string(j.value("label", std::string{"unlabeled"}));
    if (j.contains("attack_kind")) rec.attack_kind = j["attack_kind"].get<std::string>();

    const bool has_ports = rec.ip_proto == IpProto::TCP || rec.ip_proto == IpProto::UDP;
    if (has_ports && (!rec.src_port || !rec.dst_port))
        throw DataError("TCP/UDP record missing ports");
    if (!has_ports && (rec.src_port || rec.dst_port))
        throw DataError("portless protocol carries ports");
    if (rec.ip_proto != IpProto::TCP && (rec.tcp_flags || rec.tcp_win))
        throw DataError("non-TCP record carries TCP fields");
    return rec;
}

std::vector<PacketRecord> read_records(const std::filesystem::path& path, IngestStats& stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open record file: " + path.string());
    std::vector<PacketRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json_line(line));
            ++stats.kept;
        } catch (const std::exception&) {
            ++stats.malformed_lines;
        }
    }
    return out;
}

void write_records(const std::filesystem::path& path, const std::vector<PacketRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open record file for writing: " + path.string());
    for (const auto& rec : records) out << record_to_json_line(rec) << '\n';
}

}  // namespace flids
