#pragma once

#include <stdexcept>
#include <string>

namespace topictax {

// Bad input: malformed records, duplicate ids, invalid parameters. The CLI
// maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage could not complete on otherwise valid input (degenerate
// corpus, numerical failure). The CLI maps these to exit code 3.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace topictax
