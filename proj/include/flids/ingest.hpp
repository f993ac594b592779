#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flids/common.hpp"

namespace flids {

enum class IpProto : uint8_t { TCP = 0, UDP = 1, ICMP = 2, OtherIPv4 = 3 };
enum class Label : uint8_t { Normal = 0, Attack = 1, Unlabeled = 2 };

// IPv4 header flag bits, feature order (R, DF, MF).
namespace ipflag {
constexpr uint8_t R = 1u << 0;
constexpr uint8_t DF = 1u << 1;
constexpr uint8_t MF = 1u << 2;
}  // namespace ipflag

// TCP flag bits, feature order (F, S, R, P, A, U, E, C, N).
namespace tcpflag {
constexpr uint16_t FIN = 1u << 0;
constexpr uint16_t SYN = 1u << 1;
constexpr uint16_t RST = 1u << 2;
constexpr uint16_t PSH = 1u << 3;
constexpr uint16_t ACK = 1u << 4;
constexpr uint16_t URG = 1u << 5;
constexpr uint16_t ECE = 1u << 6;
constexpr uint16_t CWR = 1u << 7;
constexpr uint16_t NS = 1u << 8;
}  // namespace tcpflag

// One parsed link-layer packet. src_ip/dst_ip are carried for ground-truth
// labeling only and must never reach the models.
struct PacketRecord {
    double timestamp = 0.0;  // seconds since epoch, fractional
    uint32_t frame_len = 0;  // wire length including the Ethernet header
    uint8_t ip_tos = 0;
    uint8_t ip_flags = 0;  // ipflag bits
    uint8_t ip_ttl = 0;
    IpProto ip_proto = IpProto::OtherIPv4;
    std::optional<uint16_t> src_port;  // TCP/UDP only
    std::optional<uint16_t> dst_port;  // TCP/UDP only
    std::optional<uint16_t> tcp_flags;  // tcpflag bits, TCP only
    std::optional<uint16_t> tcp_win;    // TCP only
    std::vector<uint8_t> packet_bytes;  // captured bytes; may be empty for synthetic records
    std::optional<double> entropy;      // precomputed entropy for byte-free records
    std::string src_ip;
    std::string dst_ip;
    Label label = Label::Unlabeled;
    std::optional<std::string> attack_kind;  // synthetic ground truth, evaluation only
};

// Per-stream ingest accounting: kept/dropped counts by ethertype plus
// malformed-frame and malformed-line warnings.
struct IngestStats {
    uint64_t kept = 0;
    uint64_t dropped_ipv6 = 0;
    uint64_t dropped_arp = 0;
    uint64_t dropped_other_ethertype = 0;
    uint64_t vlan_tagged = 0;  // kept frames that carried one 802.1Q tag
    uint64_t malformed_frames = 0;
    uint64_t malformed_lines = 0;

    uint64_t dropped_total() const {
        return dropped_ipv6 + dropped_arp + dropped_other_ethertype;
    }
    void merge(const IngestStats& o);
};

// Ethertype filter: IPv4 is kept, IPv6/ARP are dropped per the feature set's
// IPv4-only design, and every other ethertype is dropped and counted.
bool keep_packet(uint16_t ethertype);

// Base-2 entropy over byte-value frequencies; empty input -> 0. Bounded [0,8].
double shannon_entropy(std::span<const uint8_t> bytes);

// Entropy of a record: the precomputed field when present, else computed
// from the captured bytes.
double record_entropy(const PacketRecord& rec);

// Classic pcap reader (both endiannesses, microsecond and nanosecond magic).
// Dissects Ethernet II -> IPv4 -> {TCP, UDP, ICMP}; one 802.1Q tag level is
// unwrapped. Malformed individual frames are skipped and counted; a malformed
// global header throws DataError.
std::vector<PacketRecord> read_pcap(const std::filesystem::path& path, IngestStats& stats);

// Line-delimited record files (one JSON object per line, canonical key
// order). The format emitted by the synth module and by write_records.
std::vector<PacketRecord> read_records(const std::filesystem::path& path, IngestStats& stats);
void write_records(const std::filesystem::path& path, const std::vector<PacketRecord>& records);

std::string record_to_json_line(const PacketRecord& rec);
PacketRecord record_from_json_line(const std::string& line);

std::string to_string(IpProto p);
std::string to_string(Label l);
IpProto ip_proto_from_string(const std::string& s);
Label label_from_string(const std::string& s);

}  // namespace flids
