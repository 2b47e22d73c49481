#ifndef QHEX_TEST_UTIL_HPP
#define QHEX_TEST_UTIL_HPP

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace qhex_test {

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        const auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 100; ++i) {
            auto p = base / ("qhex-test-" + std::to_string(rd()));
            if (std::filesystem::create_directory(p)) {
                path_ = p;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Asserts fn throws E with a message containing `substr`.
template <typename E, typename Fn>
void expect_throw_contains(Fn&& fn, const std::string& substr) {
    try {
        fn();
        FAIL_CHECK("expected exception containing '" << substr << "', none thrown");
    } catch (const E& e) {
        const std::string msg = e.what();
        if (msg.find(substr) == std::string::npos)
            FAIL_CHECK("message '" << msg << "' does not contain '" << substr << "'");
    } catch (const std::exception& e) {
        FAIL_CHECK("wrong exception type: " << e.what());
    }
}

} // namespace qhex_test

#endif
