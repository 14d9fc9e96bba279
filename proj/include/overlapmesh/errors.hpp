#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace olm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class EmptyMeshError : public Error {
public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means end of file.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A geometric computation hit a configuration it cannot resolve within
/// tolerance. Carries the indices of the entities involved.
class DegenerateGeometry : public Error {
public:
  explicit DegenerateGeometry(const std::string& what,
                              std::vector<std::size_t> entities = {})
      : Error(what), entities_(std::move(entities)) {}

  const std::vector<std::size_t>& entities() const noexcept { return entities_; }

private:
  std::vector<std::size_t> entities_;
};

class IndefiniteMatrix : public Error {
public:
  using Error::Error;
};

class InternalConsistency : public Error {
public:
  using Error::Error;
};

}  // namespace olm
