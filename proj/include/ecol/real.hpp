#pragma once
// Quad-precision scalar used for potential bookkeeping.

#include <string>

namespace ecol {

using Real = __float128;

Real real_exp(Real x);
Real real_expm1(Real x);
Real real_log(Real x);
Real real_log1p(Real x);
Real real_abs(Real x);

// Shortest decimal form that survives a round trip through real_parse.
std::string real_to_string(Real x);
Real real_parse(const std::string& s);

inline double to_double(Real x) { return static_cast<double>(x); }

// log(exp(a) + exp(b)) without overflow.
Real log_add_exp(Real a, Real b);

}  // namespace ecol
