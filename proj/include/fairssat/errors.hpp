#ifndef FAIRSSAT_ERRORS_HPP
#define FAIRSSAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fairssat {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Ill-formed objects: prefix/variable mismatches, bad tree shapes, id overflows.
class StructuralError : public Error {
public:
  using Error::Error;
};

// Well-formed objects with out-of-contract values: probabilities outside [0,1],
// missing probability entries, bad metric arguments.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Text inputs that do not parse (SDIMACS, CSV, schema/model JSON).
class ParseError : public Error {
public:
  using Error::Error;
};

// A conditioning context selected zero rows. Carries the group description so
// the caller can decide between skipping the group and aborting.
class EmptyGroupError : public Error {
public:
  explicit EmptyGroupError(const std::string& group)
      : Error("no rows match group {" + group + "}"), group_(group) {}
  const std::string& group() const { return group_; }

private:
  std::string group_;
};

}  // namespace fairssat

#endif
