#pragma once

// Little-endian binary record helpers for model artifacts.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "flowrank/common.hpp"

namespace flowrank::detail {

inline void write_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 4);
}

inline void write_i32(std::ostream& os, std::int32_t v) {
    write_u32(os, static_cast<std::uint32_t>(v));
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void write_f64_vec(std::ostream& os, const std::vector<double>& v) {
    write_u64(os, v.size());
    for (double d : v) write_f64(os, d);
}

inline std::uint8_t read_u8(std::istream& is) {
    const int c = is.get();
    if (c == std::istream::traits_type::eof()) throw DataError("model artifact: unexpected end of file");
    return static_cast<std::uint8_t>(c);
}

inline std::uint64_t read_u64(std::istream& is) {
    char buf[8];
    if (!is.read(buf, 8)) throw DataError("model artifact: unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

inline std::uint32_t read_u32(std::istream& is) {
    char buf[4];
    if (!is.read(buf, 4)) throw DataError("model artifact: unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

inline std::int32_t read_i32(std::istream& is) {
    return static_cast<std::int32_t>(read_u32(is));
}

inline double read_f64(std::istream& is) {
    return std::bit_cast<double>(read_u64(is));
}

inline std::vector<double> read_f64_vec(std::istream& is) {
    const auto n = read_u64(is);
    std::vector<double> v(n);
    for (auto& d : v) d = read_f64(is);
    return v;
}

}  // namespace flowrank::detail
