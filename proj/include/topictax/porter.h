#pragma once

#include <string>
#include <string_view>

namespace topictax {

// Porter (1980) suffix-stripping stemmer, original rule set. Input is
// expected to be a lowercase ASCII word; other bytes pass through untouched.
// Words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace topictax
