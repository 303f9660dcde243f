// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace promhr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
   using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data.
class InvalidInput : public Error
{
public:
   using Error::Error;
};

/// A linear system or least-squares problem is (numerically) rank deficient.
class SingularSystem : public Error
{
public:
   SingularSystem(const std::string &what, std::size_t column)
      : Error(what), column_(column) {}

   /// Index of the offending column / pivot.
   std::size_t column() const noexcept { return column_; }

private:
   std::size_t column_;
};

/// Incompatible solver inputs (e.g. a left basis narrower than the right basis).
class ConfigurationError : public Error
{
public:
   using Error::Error;
};

/// Degenerate element geometry or broken assembly data.
class AssemblyError : public Error
{
public:
   using Error::Error;
};

/// A metric that is not defined for its inputs (zero reference norm).
class UndefinedMetric : public Error
{
public:
   using Error::Error;
};

/// Pipeline configuration failed schema validation.
class ValidationError : public Error
{
public:
   using Error::Error;
};

/// Missing, unreadable or stale artifact files.
class ArtifactError : public Error
{
public:
   using Error::Error;
};

} // namespace promhr
