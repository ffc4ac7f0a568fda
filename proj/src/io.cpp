#include "psnf/io.hpp"

#include <charconv>

namespace psnf {

std::string format_double(double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace psnf
