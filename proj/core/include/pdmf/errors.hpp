#pragma once

#include <stdexcept>
#include <string>

namespace pdmf {

/// Base class for all structural failures raised by the library.
/// Tolerance overruns on otherwise well-formed inputs are reported through
/// residual values, not exceptions; anything thrown here means the instance
/// (or an intermediate object) violated a contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class EigenvalueOnBranchCut : public Error {
 public:
  using Error::Error;
};

class NotIdempotent : public Error {
 public:
  using Error::Error;
};

class IllConditionedSplit : public Error {
 public:
  using Error::Error;
};

class SingularAtPoint : public Error {
 public:
  using Error::Error;
};

class NotIdempotentAlongPath : public Error {
 public:
  using Error::Error;
};

class TransportDiverged : public Error {
 public:
  using Error::Error;
};

class RankMismatch : public Error {
 public:
  using Error::Error;
};

class SeamDiscontinuity : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NotRealOnRealSlice : public Error {
 public:
  using Error::Error;
};

class StarRelationViolated : public Error {
 public:
  using Error::Error;
};

class SingularAlongPath : public Error {
 public:
  using Error::Error;
};

}  // namespace pdmf
