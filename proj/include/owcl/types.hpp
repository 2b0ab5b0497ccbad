#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace owcl {

using ClassId = std::int64_t;

/// Row-major dense matrix; one sample per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A class label or the reserved open marker (written `UN` on disk).
class Label {
public:
  static Label open() { return Label{}; }
  static Label known(ClassId id);

  bool is_open() const { return !id_.has_value(); }
  /// Throws std::logic_error on the open marker.
  ClassId id() const;

  std::string to_string() const;

  friend bool operator==(const Label&, const Label&) = default;

private:
  Label() = default;
  explicit Label(ClassId id) : id_(id) {}
  std::optional<ClassId> id_;
};

inline Label Label::known(ClassId id) {
  if (id < 0) throw std::invalid_argument("class id must be non-negative");
  return Label{id};
}

inline ClassId Label::id() const {
  if (!id_) throw std::logic_error("open marker has no class id");
  return *id_;
}

inline std::string Label::to_string() const { return id_ ? std::to_string(*id_) : std::string("UN"); }

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class StateFormatError : public Error {
public:
  using Error::Error;
};

class SolveError : public Error {
public:
  using Error::Error;
};

class CalibrationError : public Error {
public:
  using Error::Error;
};

class UncalibratedError : public Error {
public:
  using Error::Error;
};

/// Invalid user configuration (CLI exit code 1).
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace owcl
