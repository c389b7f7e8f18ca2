#ifndef TWOCON_ERRORS_HPP
#define TWOCON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace twocon {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TWOCON_DEFINE_ERROR(Name)                  \
  class Name : public Error {                      \
   public:                                         \
    explicit Name(const std::string& what)         \
        : Error(std::string(#Name ": ") + what) {} \
  }

TWOCON_DEFINE_ERROR(NotSkewSymmetric);
TWOCON_DEFINE_ERROR(InvalidDimension);
TWOCON_DEFINE_ERROR(InvalidPartition);
TWOCON_DEFINE_ERROR(NonSquare);
TWOCON_DEFINE_ERROR(DimensionMismatch);
TWOCON_DEFINE_ERROR(InvalidProblem);
TWOCON_DEFINE_ERROR(NoFiniteGain);
TWOCON_DEFINE_ERROR(NumericalFailure);
TWOCON_DEFINE_ERROR(Infeasible);
TWOCON_DEFINE_ERROR(InvalidParameter);
TWOCON_DEFINE_ERROR(InvalidModel);
TWOCON_DEFINE_ERROR(NoSignChange);
TWOCON_DEFINE_ERROR(NonFinite);

#undef TWOCON_DEFINE_ERROR

// JSON syntax error; `what()` carries the byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte)
      : Error("ParseError at byte " + std::to_string(byte) + ": " + what),
        byte_(byte) {}
  std::size_t byte() const noexcept { return byte_; }

 private:
  std::size_t byte_;
};

// Well-formed JSON that violates the model schema. `field()` names the
// offending member.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error("SchemaError in '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace twocon

#endif  // TWOCON_ERRORS_HPP
