#include "tropigon/rational.hpp"

namespace tropigon {

std::string rat_to_string(const Rat& r) {
  std::string num = numerator(r).str();
  if (denominator(r) == 1) return num;
  return num + "/" + denominator(r).str();
}

namespace {

std::optional<BigInt> int_from_string(std::string_view s) {
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  if (s[0] == '-' || s[0] == '+') i = 1;
  if (i == s.size()) return std::nullopt;
  for (size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') return std::nullopt;
  return BigInt(std::string(s));
}

}  // namespace

std::optional<Rat> rat_from_string(std::string_view s) {
  size_t slash = s.find('/');
  if (slash == std::string_view::npos) {
    auto n = int_from_string(s);
    if (!n) return std::nullopt;
    return Rat(*n);
  }
  auto n = int_from_string(s.substr(0, slash));
  auto d = int_from_string(s.substr(slash + 1));
  if (!n || !d || *d == 0) return std::nullopt;
  if (*d < 0) return std::nullopt;
  return Rat(*n, *d);
}

}  // namespace tropigon
