#pragma once

#include <stdexcept>
#include <string>

namespace koethe {

// Bad user input: malformed config, unparsable expression, out-of-range
// parameters.  The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called on a space that does not satisfy its stated
// hypotheses (e.g. asking for an approximate identity certificate when
// the required conditions were not verified).  CLI exit code 2.
class PreconditionError : public std::runtime_error {
public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Internal invariant broken, or a computed profile failed its own
// consistency assertions.  CLI exit code 3.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace koethe
