// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hwm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or extents do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-domain scalar argument (eps <= 0, delta <= 0, epoch out of range...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward from a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or consumed.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed records, labels, files.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwm
