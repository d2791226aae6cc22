#pragma once

#include <stdexcept>
#include <string>

namespace llata {

/// Malformed or inconsistent input data (files, ids out of range, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inference backend failure (transport, auth, exhausted retries).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle answer could not be turned into a logit vector.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metric undefined for the given input (e.g. homophily of an empty graph).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant; carries a diagnostic dump.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace llata
