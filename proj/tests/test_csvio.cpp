#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprobe/csvio.hpp"

using memprobe::fmt_double;
using memprobe::parse_double;
using memprobe::split_csv_line;

namespace {

std::uint64_t bits(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

}  // namespace

TEST_CASE("fmt_double emits the shortest round-trip form") {
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(-0.0) == "-0");
    CHECK(fmt_double(3.0) == "3");
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(0.25) == "0.25");
    CHECK(fmt_double(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("format and parse round trip bit for bit") {
    const std::vector<double> values = {
        0.0,    -0.0,   1.0,       -1.0,   0.1,     0.25,
        1.0 / 3.0,      2.0 / 3.0, 1e-300, 1e300,   5e-324,
        123456789.0,    3.5e-7,    -2.25,  0.0425,  1e15,
        1e16,           M_PI,      std::numeric_limits<double>::max(),
        std::numeric_limits<double>::min()};
    for (double v : values) {
        const std::string s = fmt_double(v);
        CHECK(bits(parse_double(s)) == bits(v));
    }
}

TEST_CASE("parse_double rejects anything but a full number") {
    CHECK_THROWS_AS(parse_double(""), std::runtime_error);
    CHECK_THROWS_AS(parse_double("abc"), std::runtime_error);
    CHECK_THROWS_AS(parse_double("1.5x"), std::runtime_error);
    CHECK_THROWS_AS(parse_double("1,5"), std::runtime_error);
    CHECK_THROWS_AS(parse_double(" 1.5"), std::runtime_error);
    CHECK_THROWS_AS(parse_double("1.5 "), std::runtime_error);
    CHECK_THROWS_AS(parse_double("--2"), std::runtime_error);
    CHECK(parse_double("-17.5e-3") == -0.0175);
}

TEST_CASE("split_csv_line keeps empty fields") {
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("") == std::vector<std::string>{""});
    CHECK(split_csv_line(",") == std::vector<std::string>{"", ""});
    CHECK(split_csv_line(",x,") == std::vector<std::string>{"", "x", ""});
    CHECK(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});
    CHECK(split_csv_line("1.5,-2,rnn") == std::vector<std::string>{"1.5", "-2", "rnn"});
}
