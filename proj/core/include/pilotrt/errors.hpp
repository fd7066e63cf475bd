#pragma once

#include <stdexcept>
#include <string>

namespace pilotrt {

// Base class for all pilotrt runtime errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state transition that the state machine does not allow. Signals a logic
// bug in the runtime, never swallowed.
class IllegalTransition : public Error {
 public:
  IllegalTransition(const std::string& from, const std::string& to)
      : Error("illegal transition " + from + " -> " + to) {}
};

class InvalidDescription : public Error {
 public:
  using Error::Error;
};

// Pilot asks for more cores than the resource has at all.
class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

class UnknownHandle : public Error {
 public:
  using Error::Error;
};

class NotActive : public Error {
 public:
  using Error::Error;
};

// Allocation request that can never be satisfied on this core map,
// as opposed to a transient NoFit.
class RequestTooLarge : public Error {
 public:
  using Error::Error;
};

// Releasing cores that are not BUSY. Logic-bug signal.
class DoubleRelease : public Error {
 public:
  using Error::Error;
};

class UnsupportedLaunchMethod : public Error {
 public:
  explicit UnsupportedLaunchMethod(const std::string& method)
      : Error("launch method not implemented: " + method) {}
};

class SpawnFailure : public Error {
 public:
  using Error::Error;
};

class StagingFailure : public Error {
 public:
  StagingFailure(const std::string& path, const std::string& cause)
      : Error("staging failed for '" + path + "': " + cause) {}
};

class EmptyLog : public Error {
 public:
  EmptyLog() : Error("profile log contains no usable events") {}
};

class ChannelError : public Error {
 public:
  using Error::Error;
};

}  // namespace pilotrt
