#include "softgrasp/node/snapshot.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "softgrasp/util/errors.hpp"
#include "softgrasp/util/kv_config.hpp"

namespace softgrasp::node {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ProtocolError(std::string("bad ") + what + " in snapshot: '" + std::string(token) + "'");
  }
  return value;
}

bool parse_flag(std::string_view token, const char* what) {
  if (token == "0") return false;
  if (token == "1") return true;
  throw ProtocolError(std::string("bad ") + what + " flag in snapshot");
}

}  // namespace

std::optional<Request> parse_request(std::string_view line) {
  line = util::trim(line);
  if (line == "LATEST") return Request::Latest;
  if (line == "SETREF") return Request::SetRef;
  if (line == "PING") return Request::Ping;
  return std::nullopt;
}

std::string format_snapshot(const SensorSnapshot& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "SNAP %d %llu %llu %.9f %d %d", s.sensor_id,
                static_cast<unsigned long long>(s.seq),
                static_cast<unsigned long long>(s.timestamp_ms), s.delta, s.contact ? 1 : 0,
                s.reference_set ? 1 : 0);
  return buf;
}

SensorSnapshot parse_snapshot(std::string_view line) {
  const auto tokens = split_ws(util::trim(line));
  if (tokens.size() != 7 || tokens[0] != "SNAP") {
    throw ProtocolError("not a SNAP line: '" + std::string(line) + "'");
  }
  SensorSnapshot s;
  s.sensor_id = parse_number<int>(tokens[1], "sensor id");
  s.seq = parse_number<std::uint64_t>(tokens[2], "seq");
  s.timestamp_ms = parse_number<std::uint64_t>(tokens[3], "timestamp");
  s.delta = parse_number<double>(tokens[4], "delta");
  if (!(s.delta >= 0.0 && s.delta <= 1.0)) throw ProtocolError("snapshot delta outside [0, 1]");
  s.contact = parse_flag(tokens[5], "contact");
  s.reference_set = parse_flag(tokens[6], "reference");
  return s;
}

std::optional<int> parse_pong(std::string_view line) {
  const auto tokens = split_ws(util::trim(line));
  if (tokens.size() != 2 || tokens[0] != "PONG") return std::nullopt;
  int id = 0;
  const auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), id);
  if (ec != std::errc{} || ptr != tokens[1].data() + tokens[1].size()) return std::nullopt;
  return id;
}

}  // namespace softgrasp::node
