#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probthread {

// Base class of every domain error raised by the library. The CLI maps these
// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class MalformedProbability : public Error {
 public:
  using Error::Error;
};

class WeightSumNotOne : public Error {
 public:
  using Error::Error;
};

class UnguardedRecursion : public Error {
 public:
  using Error::Error;
};

class NonRegularProduct : public Error {
 public:
  using Error::Error;
};

class MissingReply : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace probthread
