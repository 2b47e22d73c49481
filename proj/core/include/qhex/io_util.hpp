#ifndef QHEX_IO_UTIL_HPP
#define QHEX_IO_UTIL_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

#include "qhex/error.hpp"

namespace qhex {

// Writes to "<path>.tmp" then renames, so reruns either produce the complete
// file or leave the old one in place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t bytes);

std::string read_text_file(const std::filesystem::path& path);
std::string read_binary_file(const std::filesystem::path& path);

// Little-endian scalar append/read for the binary container formats. Buf is
// any contiguous byte container (std::string, std::vector<std::uint8_t>).
template <typename T, typename Buf>
void append_le(Buf& buf, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    static_assert(sizeof(typename Buf::value_type) == 1);
    const auto* p = reinterpret_cast<const typename Buf::value_type*>(&value);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T, typename Buf>
T read_le(const Buf& buf, std::size_t& off) {
    static_assert(std::is_trivially_copyable_v<T>);
    static_assert(sizeof(typename Buf::value_type) == 1);
    if (off + sizeof(T) > buf.size()) throw ValidationError("truncated binary file");
    T value;
    std::memcpy(&value, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return value;
}

} // namespace qhex

#endif
