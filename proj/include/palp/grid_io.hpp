#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "palp/grid.hpp"

// Grid container file: a short text header followed by the node values as
// raw little-endian IEEE-754 doubles, either inline (base64) or in a sibling
// binary file. Values round-trip bit-exactly.
//
//   palp-grid 1
//   dims: 96 96 96
//   origin: -1.5e-01 -1.5e-01 -1.5e-01
//   spacing: 3.157894736842105e-03
//   count: 884736
//   byte_order: little-endian
//   payload: inline            (or: payload: file <name>)
//   <base64 lines>

namespace palp {

enum class GridPayload { inline_base64, sidecar_file };

namespace detail {

inline constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline constexpr std::uint64_t byteswap64(std::uint64_t u) {
  u = ((u & 0x00ff00ff00ff00ffULL) << 8) | ((u >> 8) & 0x00ff00ff00ff00ffULL);
  u = ((u & 0x0000ffff0000ffffULL) << 16) | ((u >> 16) & 0x0000ffff0000ffffULL);
  return (u << 32) | (u >> 32);
}

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += kBase64Alphabet[(v >> 6) & 63];
    out += kBase64Alphabet[v & 63];
  }
  const std::size_t rem = data.size() - i;
  if (rem == 1) {
    const std::uint32_t v = data[i] << 16;
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += kBase64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::array<int, 256> lut;
  lut.fill(-1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kBase64Alphabet[i])] = i;
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
    if (c == '=') break;
    const int v = lut[static_cast<unsigned char>(c)];
    if (v < 0) throw std::invalid_argument("grid file: invalid base64 payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

inline std::vector<std::uint8_t> doubles_to_le_bytes(const std::vector<double>& v) {
  std::vector<std::uint8_t> bytes(v.size() * 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t u;
    std::memcpy(&u, &v[i], 8);
    if constexpr (std::endian::native == std::endian::big) u = byteswap64(u);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(u >> (8 * b));
  }
  return bytes;
}

inline std::vector<double> le_bytes_to_doubles(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 8 != 0)
    throw std::invalid_argument("grid file: payload size is not a multiple of 8");
  std::vector<double> v(bytes.size() / 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b) u = (u << 8) | bytes[i * 8 + b];
    if constexpr (std::endian::native == std::endian::big) u = byteswap64(u);
    std::memcpy(&v[i], &u, 8);
  }
  return v;
}

inline std::string format_full(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

inline void write_grid(const ScalarGrid& grid, const std::filesystem::path& path,
                       GridPayload payload = GridPayload::inline_base64) {
  const GridGeometry& g = grid.geom;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_grid: cannot open " + path.string());
  out << "palp-grid 1\n";
  out << "dims:";
  for (int a = 0; a < g.rank(); ++a) out << ' ' << g.dim(a);
  out << "\norigin: " << detail::format_full(g.origin().x) << ' '
      << detail::format_full(g.origin().y);
  if (g.rank() == 3) out << ' ' << detail::format_full(g.origin().z);
  out << "\nspacing: " << detail::format_full(g.spacing());
  out << "\ncount: " << grid.values.size();
  out << "\nbyte_order: little-endian\n";
  const auto bytes = detail::doubles_to_le_bytes(grid.values);
  if (payload == GridPayload::inline_base64) {
    out << "payload: inline\n";
    const std::string b64 = detail::base64_encode(bytes);
    for (std::size_t i = 0; i < b64.size(); i += 76) out << b64.substr(i, 76) << '\n';
  } else {
    const std::string binary_name = path.filename().string() + ".bin";
    out << "payload: file " << binary_name << '\n';
    std::ofstream bin(path.parent_path() / binary_name, std::ios::binary);
    if (!bin) throw std::invalid_argument("write_grid: cannot open sidecar for " + path.string());
    bin.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!bin) throw numerical_error("write_grid: sidecar write failed");
  }
  if (!out) throw numerical_error("write_grid: write failed");
}

[[nodiscard]] inline ScalarGrid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_grid: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "palp-grid 1")
    throw std::invalid_argument("read_grid: missing palp-grid header in " + path.string());

  std::vector<int> dims;
  Vec3 origin;
  double spacing = 0.0;
  std::size_t count = 0;
  bool have_origin = false, have_spacing = false, have_count = false, little = false;
  std::string payload_kind, sidecar_name;

  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("read_grid: malformed header line: " + line);
    const std::string key = line.substr(0, colon);
    std::istringstream rest(line.substr(colon + 1));
    if (key == "dims") {
      int d;
      while (rest >> d) dims.push_back(d);
    } else if (key == "origin") {
      std::vector<double> o;
      double x;
      while (rest >> x) o.push_back(x);
      if (o.size() != 2 && o.size() != 3)
        throw std::invalid_argument("read_grid: origin needs 2 or 3 components");
      origin = {o[0], o[1], o.size() == 3 ? o[2] : 0.0};
      have_origin = true;
    } else if (key == "spacing") {
      if (!(rest >> spacing)) throw std::invalid_argument("read_grid: bad spacing");
      have_spacing = true;
    } else if (key == "count") {
      if (!(rest >> count)) throw std::invalid_argument("read_grid: bad count");
      have_count = true;
    } else if (key == "byte_order") {
      std::string v;
      rest >> v;
      if (v != "little-endian")
        throw std::invalid_argument("read_grid: unsupported byte_order " + v);
      little = true;
    } else if (key == "payload") {
      rest >> payload_kind;
      if (payload_kind == "file" && !(rest >> sidecar_name))
        throw std::invalid_argument("read_grid: payload file without a name");
      break;
    } else {
      throw std::invalid_argument("read_grid: unknown header key " + key);
    }
  }
  if (dims.empty() || !have_origin || !have_spacing || !have_count || !little ||
      payload_kind.empty())
    throw std::invalid_argument("read_grid: incomplete header in " + path.string());
  if (dims.size() != 2 && dims.size() != 3)
    throw std::invalid_argument("read_grid: dims needs 2 or 3 axes");

  std::vector<std::uint8_t> bytes;
  if (payload_kind == "inline") {
    std::ostringstream b64;
    b64 << in.rdbuf();
    bytes = detail::base64_decode(b64.str());
  } else if (payload_kind == "file") {
    std::ifstream bin(path.parent_path() / sidecar_name, std::ios::binary);
    if (!bin)
      throw std::invalid_argument("read_grid: cannot open sidecar " + sidecar_name + " next to " +
                                  path.string());
    bytes.assign(std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>());
  } else {
    throw std::invalid_argument("read_grid: unknown payload kind " + payload_kind);
  }

  std::vector<double> values = detail::le_bytes_to_doubles(bytes);
  if (values.size() != count)
    throw std::invalid_argument("read_grid: declared count " + std::to_string(count) +
                                " does not match payload size " + std::to_string(values.size()));
  std::array<int, 3> d3 = {dims[0], dims[1], dims.size() == 3 ? dims[2] : 1};
  GridGeometry geom(static_cast<int>(dims.size()), d3, origin, spacing);
  return ScalarGrid(geom, std::move(values));  // rejects NaN/Inf payloads
}

}  // namespace palp
