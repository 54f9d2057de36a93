// Exact rational scalar type and text conversions.
//
// Every probability, tolerance and certificate value in this library is a
// rational in lowest terms; no floating point appears on any verdict path.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace abst {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

// Lowest-terms text form: "3/4", "-1/2", integers without the "/1".
inline std::string rat_to_string(const Rat& r) { return r.str(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// Parses "num", "num/den" or a finite decimal ("0.25", ".5") exactly.
// Throws std::invalid_argument on anything else (including den = 0).
Rat rat_from_string(const std::string& text);

}  // namespace abst
