#pragma once

#include <stdexcept>
#include <string>

namespace olfalign {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or value does not match its declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// An embedding file could not be ingested (shape, duplicate id, non-finite value).
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// A molecule id is not present in an embedding table.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Embeddings and perceptual data share no resolvable rows.
class JoinError : public Error {
 public:
  using Error::Error;
};

/// Matrix/vector shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to a numeric routine (out-of-range k, negative strength, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A training target carries no information (single class, constant value).
class DegenerateTargetError : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined on its input (constant vector, single class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Every hyperparameter candidate failed during cross-validation.
class SelectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace olfalign
