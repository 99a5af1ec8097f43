#pragma once

#include <stdexcept>
#include <string>

namespace consensus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DegenerateFace : public Error {
 public:
  using Error::Error;
};

class ResolutionMismatch : public Error {
 public:
  using Error::Error;
};

class NoCommonParts : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class Diverged : public Error {
 public:
  using Error::Error;
};

}  // namespace consensus
