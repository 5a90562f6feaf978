#include "ecol/real.hpp"

#include <quadmath.h>

#include <stdexcept>

namespace ecol {

Real real_exp(Real x) { return expq(x); }
Real real_expm1(Real x) { return expm1q(x); }
Real real_log(Real x) { return logq(x); }
Real real_log1p(Real x) { return log1pq(x); }
Real real_abs(Real x) { return fabsq(x); }

std::string real_to_string(Real x) {
  char buf[64];
  quadmath_snprintf(buf, sizeof buf, "%.36Qg", x);
  return buf;
}

Real real_parse(const std::string& s) {
  char* end = nullptr;
  Real v = strtoflt128(s.c_str(), &end);
  if (end == s.c_str()) throw std::invalid_argument("not a number: " + s);
  return v;
}

Real log_add_exp(Real a, Real b) {
  if (a < b) std::swap(a, b);
  return a + log1pq(expq(b - a));
}

}  // namespace ecol
