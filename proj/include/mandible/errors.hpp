#pragma once

#include <stdexcept>
#include <string>

namespace mandible {

// Bad or inconsistent input: malformed files, missing landmarks, invalid
// parameters. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input was well-formed but the geometry does not admit an answer
// (disconnected endpoints, coincident landmarks, singular frames).
// The CLI maps these to exit code 3.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mandible
