#pragma once

#include <stdexcept>
#include <string>

namespace softgrasp {

/// An operation needs data that does not exist yet (no frame, no reply).
class NotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A peer sent something that does not parse under the wire protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace softgrasp
