#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mr2 {

using NodeId = std::uint32_t;
/// One session per source; the session id is the source's node id.
using SessionId = NodeId;
/// Simulated seconds.
using SimTime = double;

/// A parameter or input value outside its documented domain.
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A node or table entry that does not exist.
class NotFound : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// A metric evaluated where it has no value (empty input, zero denominator).
class UndefinedMetric : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Scenario validation failure; key() names the offending configuration key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string &what)
      : std::runtime_error(key + ": " + what), m_key(std::move(key)) {}
  const std::string &key() const noexcept { return m_key; }

private:
  std::string m_key;
};

} // namespace mr2
