#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tropigon {

// Exact arbitrary-precision rational. All edge lengths, offsets and
// function values in the library are of this type; nothing ever goes
// through floating point. Expression templates are off so that values mix
// freely with std::min / ternaries.
using Rat = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<
        boost::multiprecision::backends::cpp_int_backend<>>,
    boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::cpp_int;

// Renders as "p" or "p/q" with q > 0 and gcd(p,q) = 1.
std::string rat_to_string(const Rat& r);

// Accepts "p", "p/q", optional leading '-'. Returns nullopt on anything
// else (in particular decimal notation is rejected).
std::optional<Rat> rat_from_string(std::string_view s);

}  // namespace tropigon
