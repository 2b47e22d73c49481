#include "qhex/io_util.hpp"

#include <fstream>

namespace qhex {

void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    write_file_atomic(path, content.data(), content.size());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_binary_file(const std::filesystem::path& path) {
    return read_text_file(path);
}

} // namespace qhex
