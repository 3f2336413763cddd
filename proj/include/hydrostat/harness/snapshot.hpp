#pragma once

// Binary snapshot of a VelocityState.
//
//   "HSN1" | version u32 | nx ny nz u32 | field_count u32 |
//   per field: name_len u32, name, parity u8, (re, im) f64 pairs in centred
//   kx-major order | CRC32 of every preceding byte (u32)
//
// All integers and floats are little-endian. The fields are v1, v2, w and
// "meta", whose first coefficient holds (time, system id).

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hydrostat/errors.hpp"
#include "hydrostat/fields.hpp"

namespace hydrostat {

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& buf, std::size_t end) : buf_(buf), end_(end) {}
  std::size_t offset() const { return pos_; }
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw FormatError("truncated snapshot", pos_);
  }
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline void write_field(ByteWriter& w, const std::string& name, const SpectralField& f) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u8(static_cast<std::uint8_t>(f.parity()));
  for (const Complex& c : f.coeffs()) {
    w.f64(c.real());
    w.f64(c.imag());
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_snapshot(const VelocityState& u) {
  const Grid& g = u.grid();
  detail::ByteWriter w;
  w.bytes("HSN1", 4);
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(g.nx()));
  w.u32(static_cast<std::uint32_t>(g.ny()));
  w.u32(static_cast<std::uint32_t>(g.nz()));
  w.u32(4);
  detail::write_field(w, "v1", u.v1);
  detail::write_field(w, "v2", u.v2);
  detail::write_field(w, "w", u.w);
  SpectralField meta(u.grid_ptr(), Parity::none);
  meta[0] = Complex(u.time, static_cast<double>(static_cast<int>(u.system)));
  detail::write_field(w, "meta", meta);
  auto& buf = w.buffer();
  const std::uint32_t crc = detail::crc32_of(buf.data(), buf.size());
  w.u32(crc);
  return std::move(buf);
}

inline VelocityState decode_snapshot(const std::vector<std::uint8_t>& buf) {
  if (buf.size() < 4 + 4) throw FormatError("truncated snapshot", buf.size());
  const std::size_t payload = buf.size() - 4;
  detail::ByteReader r(buf, payload);
  if (std::memcmp(buf.data(), "HSN1", 4) != 0) throw FormatError("bad magic", 0);
  r.str(4);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version), version_at);
  const std::size_t shape_at = r.offset();
  const std::uint32_t nx = r.u32(), ny = r.u32(), nz = r.u32();
  GridPtr grid;
  try {
    grid = make_grid(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz));
  } catch (const InvalidGrid& e) {
    throw FormatError(std::string("invalid grid shape: ") + e.what(), shape_at);
  }
  const std::size_t count_at = r.offset();
  const std::uint32_t count = r.u32();
  if (count != 4) throw FormatError("expected 4 fields, found " + std::to_string(count), count_at);

  VelocityState u = VelocityState::zeros(grid);
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t name_at = r.offset();
    const std::uint32_t len = r.u32();
    if (len > 64) throw FormatError("field name too long", name_at);
    const std::string name = r.str(len);
    const std::size_t parity_at = r.offset();
    const std::uint8_t parity = r.u8();
    if (parity > 2) throw FormatError("invalid parity tag", parity_at);
    r.need(grid->size() * 16);
    SpectralField f(grid, static_cast<Parity>(parity));
    for (auto& c : f.coeffs()) {
      const double re = r.f64();
      const double im = r.f64();
      c = Complex(re, im);
    }
    if (name == "v1") u.v1 = std::move(f);
    else if (name == "v2") u.v2 = std::move(f);
    else if (name == "w") u.w = std::move(f);
    else if (name == "meta") {
      u.time = f[0].real();
      const int sys = static_cast<int>(f[0].imag());
      if (sys < 0 || sys > static_cast<int>(System::StokesScaled)) throw FormatError("invalid system id", name_at);
      u.system = static_cast<System>(sys);
    } else {
      throw FormatError("unknown field '" + name + "'", name_at);
    }
  }
  if (r.offset() != payload) throw FormatError("trailing bytes before checksum", r.offset());
  detail::ByteReader tail(buf, buf.size());
  for (std::size_t i = 0; i < payload; ++i) tail.u8();
  const std::uint32_t stored = tail.u32();
  if (stored != detail::crc32_of(buf.data(), payload)) throw FormatError("checksum mismatch", payload);
  return u;
}

inline void save_snapshot(const VelocityState& u, const std::string& path) {
  const auto buf = encode_snapshot(u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("failed writing snapshot to '" + path + "'");
}

inline VelocityState load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  const std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(buf);
}

}  // namespace hydrostat
