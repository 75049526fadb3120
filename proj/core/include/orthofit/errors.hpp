#ifndef ORTHOFIT_ERRORS_HPP
#define ORTHOFIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace orthofit {

// Common base so callers can catch every library failure in one place.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A pivot or triangular diagonal fell below the relative tolerance.
class SingularMatrix : public Error {
public:
  explicit SingularMatrix(const std::string& what) : Error(what) {}
};

class NotSymmetric : public Error {
public:
  explicit NotSymmetric(const std::string& what) : Error(what) {}
};

class NotOrthogonal : public Error {
public:
  explicit NotOrthogonal(const std::string& what) : Error(what) {}
};

class NotPositiveDefinite : public Error {
public:
  explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

// Packed-vector length does not match the triangle it should fill.
class LengthMismatch : public Error {
public:
  explicit LengthMismatch(const std::string& what) : Error(what) {}
};

class BetaOutOfRange : public Error {
public:
  explicit BetaOutOfRange(const std::string& what) : Error(what) {}
};

// Kurtosis shape parameter sits on 0 or its upper bound, where the
// logit reparameterization is undefined.
class BetaOnBoundary : public Error {
public:
  explicit BetaOnBoundary(const std::string& what) : Error(what) {}
};

// A group is too small or its scatter matrix is singular.
class DegenerateGroup : public Error {
public:
  explicit DegenerateGroup(const std::string& what) : Error(what) {}
};

class NonFiniteStart : public Error {
public:
  explicit NonFiniteStart(const std::string& what) : Error(what) {}
};

class NonFiniteObjective : public Error {
public:
  explicit NonFiniteObjective(const std::string& what) : Error(what) {}
};

class NoConvergence : public Error {
public:
  explicit NoConvergence(const std::string& what) : Error(what) {}
};

// Likelihood-ratio comparison between models that are not nested.
class NotNested : public Error {
public:
  explicit NotNested(const std::string& what) : Error(what) {}
};

// Malformed input file: bad header, unknown column, or a cell that is
// missing or not numeric where a number is required.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace orthofit

#endif
