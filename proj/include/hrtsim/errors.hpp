#pragma once

#include <stdexcept>
#include <string>

namespace hrtsim {

/// Configuration problems. `field()` names the offending key when there is one.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { missing_file, syntax, unknown_key, out_of_range, invalid };

  ConfigError(Kind kind, std::string field, const std::string& what)
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// Filesystem failures; the message always carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic that is undefined for the given data (zero variance, ties everywhere...).
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hrtsim
