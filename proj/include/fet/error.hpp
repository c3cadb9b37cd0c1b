#pragma once

#include <stdexcept>
#include <string>

namespace fet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or invariant on caller-supplied data does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A referenced type path (or other key) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

/// An input document could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A pluggable backend (retriever, QA model, language model, encoder) failed.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fet
