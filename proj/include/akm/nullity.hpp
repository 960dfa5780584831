#pragma once

#include <string_view>

namespace akm {

/// Which nullity condition a structure is built for: R(X,Y)xi is expanded in
/// h for Kmu and in h' = h o phi for KmuPrime.
enum class Nullity { Kmu, KmuPrime };

constexpr std::string_view to_string(Nullity n) { return n == Nullity::Kmu ? "kmu" : "kmup"; }

}  // namespace akm
