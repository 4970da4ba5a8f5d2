#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "metafill/errors.hpp"

namespace metafill::binary {

inline std::uint64_t swap_if_big(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  v = swap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_i64(std::ostream& out, std::int64_t v) { write_u64(out, static_cast<std::uint64_t>(v)); }

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated binary file");
  return swap_if_big(v);
}

inline std::int64_t read_i64(std::istream& in) { return static_cast<std::int64_t>(read_u64(in)); }

inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

inline void write_magic(std::ostream& out, const std::string& magic) { out.write(magic.data(), static_cast<long>(magic.size())); }

inline void expect_magic(std::istream& in, const std::string& magic, const std::string& what) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<long>(got.size())) || got != magic)
    throw DataError(what + ": bad magic header");
}

}  // namespace metafill::binary
