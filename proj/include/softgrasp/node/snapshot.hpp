#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace softgrasp::node {

/// One sensor's most recent processed frame as published to readers.
struct SensorSnapshot {
  int sensor_id = 0;
  std::uint64_t seq = 0;           // 0 until the first frame is processed
  std::uint64_t timestamp_ms = 0;  // node-local capture time
  double delta = 0.0;
  bool contact = false;
  bool reference_set = false;

  friend bool operator==(const SensorSnapshot&, const SensorSnapshot&) = default;
};

// Wire protocol: UTF-8 lines terminated by '\n'.
//   LATEST -> SNAP <sensor_id> <seq> <timestamp_ms> <delta:9dp> <contact:0|1> <reference_set:0|1>
//   SETREF -> OK | ERR not-ready
//   PING   -> PONG <sensor_id>
//   other  -> ERR bad-request
enum class Request { Latest, SetRef, Ping };

std::optional<Request> parse_request(std::string_view line);

/// "SNAP ..." line without the terminating newline.
std::string format_snapshot(const SensorSnapshot& snapshot);

/// Parses a SNAP line; throws ProtocolError when malformed.
SensorSnapshot parse_snapshot(std::string_view line);

/// Parses "PONG <id>"; nullopt if the line is not a PONG.
std::optional<int> parse_pong(std::string_view line);

inline constexpr std::string_view kOk = "OK";
inline constexpr std::string_view kErrNotReady = "ERR not-ready";
inline constexpr std::string_view kErrBadRequest = "ERR bad-request";

}  // namespace softgrasp::node
