#pragma once

#include <cctype>
#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace enmkl::detail {

// Unlike std::stod this accepts subnormals, which exported Grams contain.
inline double parse_double(std::string_view tok) {
  while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
  while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
  if (tok.size() > 1 && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || end != tok.data() + tok.size() || tok.empty())
    throw std::invalid_argument("not a number: '" + std::string(tok) + "'");
  return v;
}

}  // namespace enmkl::detail
