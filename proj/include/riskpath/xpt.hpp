#pragma once

// SAS transport (XPORT v5) reader: 80-byte records, ASCII header records,
// IBM System/360 hexadecimal floating point for numeric fields. v8/v9
// extended-name files are rejected. Reference: SAS technical note TS-140.

#include <riskpath/common.hpp>
#include <riskpath/table.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskpath {

inline constexpr std::size_t kXptRecordLen = 80;

// 8 raw bytes of IBM hex float -> binary64, or nullopt for the SAS missing
// sentinels: first byte '.', 'A'..'Z' or '_' followed by seven zero bytes.
// Value is (-1)^s * (F / 2^56) * 16^(e-64) with a 7-bit excess-64 exponent
// and 56-bit fraction; (double)F rounds to nearest, ldexp is then exact.
inline std::optional<double> ibm_to_ieee(std::span<const std::uint8_t, 8> b) {
  const std::uint8_t b0 = b[0];
  bool tail_zero = true;
  for (int i = 1; i < 8; ++i) tail_zero = tail_zero && b[i] == 0;
  if (tail_zero && (b0 == '.' || b0 == '_' || (b0 >= 'A' && b0 <= 'Z'))) return std::nullopt;

  std::uint64_t frac = 0;
  for (int i = 1; i < 8; ++i) frac = (frac << 8) | b[i];
  if (frac == 0) return (b0 & 0x80u) ? -0.0 : 0.0;

  const int exp16 = static_cast<int>(b0 & 0x7fu) - 64;
  const double magnitude = std::ldexp(static_cast<double>(frac), 4 * exp16 - 56);
  return (b0 & 0x80u) ? -magnitude : magnitude;
}

struct XptVariable {
  std::string name;
  bool numeric = true;
  int length = 8;    // bytes per observation
  int position = 0;  // offset within the observation record
};

struct XptMember {
  std::string name;
  std::vector<XptVariable> variables;
  int record_length = 0;  // sum of variable lengths

  void validate() const {
    int sum = 0;
    for (const auto& v : variables) sum += v.length;
    require(sum == record_length, errc::malformed_header,
            "member " + name + ": variable lengths do not add up to the record length");
    for (const auto& v : variables)
      if (v.numeric)
        require(v.length >= 2 && v.length <= 8, errc::malformed_header,
                "numeric variable " + v.name + " has length outside [2,8]");
  }
};

struct XptDataset {
  XptMember member;
  RawTable table;
};

namespace detail {

inline constexpr const char* kLibraryHeader =
    "HEADER RECORD*******LIBRARY HEADER RECORD!!!!!!!";
inline constexpr const char* kMemberHeader =
    "HEADER RECORD*******MEMBER  HEADER RECORD!!!!!!!";
inline constexpr const char* kDscrptrHeader =
    "HEADER RECORD*******DSCRPTR HEADER RECORD!!!!!!!";
inline constexpr const char* kNamestrHeader =
    "HEADER RECORD*******NAMESTR HEADER RECORD!!!!!!!";
inline constexpr const char* kObsHeader =
    "HEADER RECORD*******OBS     HEADER RECORD!!!!!!!";

inline bool record_starts_with(std::span<const std::uint8_t> rec, const char* prefix) {
  const std::size_t len = std::strlen(prefix);
  if (rec.size() < len) return false;
  return std::memcmp(rec.data(), prefix, len) == 0;
}

inline std::string trimmed(std::span<const std::uint8_t> bytes) {
  std::size_t end = bytes.size();
  while (end > 0 && (bytes[end - 1] == ' ' || bytes[end - 1] == '\0')) --end;
  return std::string(reinterpret_cast<const char*>(bytes.data()), end);
}

inline int parse_int_field(std::span<const std::uint8_t> bytes) {
  int value = 0;
  for (std::uint8_t c : bytes) {
    if (c == ' ') continue;
    if (c < '0' || c > '9') return -1;
    value = value * 10 + (c - '0');
  }
  return value;
}

inline std::uint16_t read_u16be(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

inline std::uint32_t read_u32be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline bool all_blank(std::span<const std::uint8_t> bytes) {
  for (std::uint8_t c : bytes)
    if (c != ' ') return false;
  return true;
}

// Sequential cursor over the fixed 80-byte records.
class RecordStream {
 public:
  explicit RecordStream(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool eof() const { return pos_ >= bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::span<const std::uint8_t> peek() const {
    require(pos_ + kXptRecordLen <= bytes_.size(), errc::truncated_observation,
            "stream ends inside an 80-byte record");
    return bytes_.subspan(pos_, kXptRecordLen);
  }

  std::span<const std::uint8_t> take() {
    auto rec = peek();
    pos_ += kXptRecordLen;
    return rec;
  }

  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline XptMember parse_namestr_section(RecordStream& rs) {
  auto header = rs.take();  // NAMESTR header with the variable count
  require(record_starts_with(header, kNamestrHeader), errc::malformed_header,
          "expected NAMESTR header record");
  const int n_vars = parse_int_field(header.subspan(54, 4));
  require(n_vars >= 0, errc::malformed_header, "bad variable count in NAMESTR header");
  return XptMember{.name = "", .variables = std::vector<XptVariable>(n_vars), .record_length = 0};
}

}  // namespace detail

// Parse every member of a v5 transport stream. Numeric fields shorter than
// 8 bytes are zero-padded on the right before conversion, character fields
// are space-trimmed, and all-blank padding after the last observation of a
// member is skipped.
inline std::vector<XptDataset> parse_xpt_members(std::span<const std::uint8_t> bytes) {
  using namespace detail;
  require(!bytes.empty(), errc::malformed_header, "empty stream");

  RecordStream rs(bytes);
  auto lib = rs.take();
  if (!record_starts_with(lib, kLibraryHeader)) {
    if (record_starts_with(lib, "HEADER RECORD*******LIBV8"))
      raise(errc::unsupported_version, "XPORT v8/v9 transport files are not supported");
    raise(errc::malformed_header, "first record is not a v5 library header");
  }
  rs.take();  // first real header record (SAS symbols, version, OS)
  rs.take();  // second real header record (modification timestamp)

  std::vector<XptDataset> members;
  while (!rs.eof()) {
    auto member_header = rs.peek();
    if (record_starts_with(member_header, "HEADER RECORD*******MEMBV8"))
      raise(errc::unsupported_version, "XPORT v8/v9 member records are not supported");
    require(record_starts_with(member_header, kMemberHeader), errc::malformed_header,
            "expected MEMBER header record");
    rs.take();
    const int namestr_len = parse_int_field(member_header.subspan(70, 8));
    require(namestr_len >= 136 && namestr_len <= 256, errc::malformed_header,
            "implausible NAMESTR descriptor size");

    require(record_starts_with(rs.take(), kDscrptrHeader), errc::malformed_header,
            "expected DSCRPTR header record");
    auto member_info = rs.take();  // dataset name, SAS version, OS
    rs.take();                     // timestamps + label + type

    XptDataset ds;
    ds.member = parse_namestr_section(rs);
    ds.member.name = trimmed(member_info.subspan(8, 8));

    // NAMESTR structs are packed back to back, then padded to an 80-byte
    // boundary. Field offsets per TS-140.
    const std::size_t n_vars = ds.member.variables.size();
    const std::size_t section = ((n_vars * namestr_len + kXptRecordLen - 1) / kXptRecordLen) *
                                kXptRecordLen;
    require(rs.pos() + section <= bytes.size(), errc::truncated_observation,
            "stream ends inside the NAMESTR section");
    const std::uint8_t* base = rs.rest().data();
    int offset = 0;
    for (std::size_t v = 0; v < n_vars; ++v) {
      const std::uint8_t* p = base + v * namestr_len;
      XptVariable& var = ds.member.variables[v];
      const int ntype = read_u16be(p);
      require(ntype == 1 || ntype == 2, errc::malformed_header, "NAMESTR ntype must be 1 or 2");
      var.numeric = ntype == 1;
      var.length = read_u16be(p + 4);
      var.name = trimmed(std::span<const std::uint8_t>(p + 8, 8));
      var.position = offset;
      offset += var.length;
    }
    ds.member.record_length = offset;
    ds.member.validate();
    rs.advance(section);

    require(record_starts_with(rs.take(), kObsHeader), errc::malformed_header,
            "expected OBS header record");

    // Observation data runs until the next member header or end of stream.
    const std::size_t obs_start = rs.pos();
    std::size_t obs_end = obs_start;
    while (obs_end + kXptRecordLen <= bytes.size()) {
      auto rec = bytes.subspan(obs_end, kXptRecordLen);
      if (record_starts_with(rec, kMemberHeader) ||
          record_starts_with(rec, "HEADER RECORD*******MEMBV8"))
        break;
      obs_end += kXptRecordLen;
    }
    require(obs_end == bytes.size() || (bytes.size() - obs_end) % kXptRecordLen == 0 ||
                obs_end + kXptRecordLen <= bytes.size(),
            errc::truncated_observation, "stream ends inside an 80-byte record");
    if (obs_end == obs_start && (bytes.size() - obs_start) % kXptRecordLen != 0)
      raise(errc::truncated_observation, "stream ends inside an 80-byte record");

    std::span<const std::uint8_t> obs(bytes.data() + obs_start, obs_end - obs_start);
    const std::size_t reclen = static_cast<std::size_t>(ds.member.record_length);
    std::size_t n_rows = 0;
    if (reclen > 0) {
      n_rows = obs.size() / reclen;
      const std::size_t tail = obs.size() - n_rows * reclen;
      if (tail > 0)
        require(all_blank(obs.subspan(n_rows * reclen)), errc::truncated_observation,
                "trailing bytes after the last observation are not blank padding");
      // Rows consisting entirely of blanks are the 80-byte padding overlap.
      while (n_rows > 0 && all_blank(obs.subspan((n_rows - 1) * reclen, reclen))) --n_rows;
    }

    ds.table.n_rows = n_rows;
    ds.table.columns.reserve(n_vars);
    for (const auto& var : ds.member.variables) {
      RawColumn col;
      col.name = var.name;
      col.numeric = var.numeric;
      if (var.numeric)
        col.values.reserve(n_rows);
      else
        col.text.reserve(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        const std::uint8_t* cell = obs.data() + r * reclen + var.position;
        if (var.numeric) {
          std::array<std::uint8_t, 8> padded{};  // zero-pad short numerics
          std::memcpy(padded.data(), cell, static_cast<std::size_t>(var.length));
          col.values.push_back(ibm_to_ieee(std::span<const std::uint8_t, 8>(padded)));
        } else {
          col.text.push_back(trimmed(std::span<const std::uint8_t>(cell, var.length)));
        }
      }
      ds.table.columns.push_back(std::move(col));
    }
    ds.table.validate();
    members.push_back(std::move(ds));
  }
  require(!members.empty(), errc::malformed_header, "transport file contains no members");
  return members;
}

// First member only; the common case for BRFSS releases.
inline RawTable parse_xpt(std::span<const std::uint8_t> bytes) {
  return parse_xpt_members(bytes).front().table;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline RawTable load_xpt(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return parse_xpt(bytes);
}

}  // namespace riskpath
